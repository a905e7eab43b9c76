#pragma once

#include <optional>
#include <vector>

#include "bottlemod/model.hpp"
#include "bottlemod/piecewise.hpp"
#include "bottlemod/solver.hpp"

namespace bottlemod {

struct TimeInterval {
  double t_a = 0.0;
  double t_b = 0.0;
};

// Resource amount delivered at a single instant (infinite rate).
struct Impulse {
  double t = 0.0;
  double amount = 0.0;
};

namespace detail {

inline PiecewiseFn indicator(double a, double b) {
  std::vector<double> xs;
  std::vector<Polynomial> ps;
  if (a > 0.0) {
    xs.push_back(0.0);
    ps.push_back(Polynomial());
  }
  xs.push_back(a);
  ps.push_back(Polynomial::constant(1.0));
  if (std::isfinite(b)) {
    xs.push_back(b);
    ps.push_back(Polynomial());
  }
  return PiecewiseFn(std::move(xs), std::move(ps), Extension::continue_last);
}

inline PiecewiseFn max_with(const PiecewiseFn& f, double floor) {
  return min_of({f.scaled(-1.0), PiecewiseFn::constant(-floor, f.start())}).fn.scaled(-1.0);
}

// Intervals on which pieces of f satisfy `pred(piece value at midpoint)`.
template <class Pred>
std::vector<TimeInterval> intervals_where(const PiecewiseFn& f, double until, Pred pred) {
  std::vector<TimeInterval> out;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double a = f.breakpoint(i);
    if (a >= until) break;
    const double b = std::min(f.piece_end(i), until);
    const double mid = std::isfinite(b) ? 0.5 * (a + b) : a + 1.0;
    if (!pred(f.eval(mid), mid)) continue;
    if (!out.empty() && out.back().t_b >= a) out.back().t_b = b;
    else out.push_back({a, b});
  }
  return out;
}

}  // namespace detail

// P'(t) * R_l'(P(t)), plus the supply consumed while progress stalls on a
// lump-sum amount of resource l.
inline PiecewiseFn resource_demand(const ProgressResult& r, const Process& proc, const ExecutionContext& ctx,
                                   std::size_t l) {
  const PiecewiseFn& req = proc.resource_requirements.at(l).fn;
  PiecewiseFn d = mul(r.progress.derivative(), compose(req.derivative(), r.progress));
  for (const auto& s : r.stalls)
    for (std::size_t i = 0; i < s.resources.size(); ++i)
      if (s.resources[i] == static_cast<int>(l))
        d = add(d, mul(ctx.resource_inputs.at(l), detail::indicator(s.t_a, s.paid_at[i])));
  return d.simplified();
}

struct RelativeUsage {
  PiecewiseFn fn;
  std::vector<TimeInterval> bottleneck_witnesses;  // fully used, or needed with zero supply
};

// demand / supply with 0/0 = 0. Needs a piecewise-constant supply.
inline RelativeUsage relative_usage(const ProgressResult& r, const Process& proc, const ExecutionContext& ctx,
                                    std::size_t l) {
  const PiecewiseFn& input = ctx.resource_inputs.at(l);
  const PiecewiseFn demand = resource_demand(r, proc, ctx, l);
  RelativeUsage out{div_by_pwconstant(demand, input), {}};
  const double until = r.completion_time ? *r.completion_time : kInf;
  out.bottleneck_witnesses =
      detail::intervals_where(out.fn, until, [](double v, double) { return v >= 1.0 - 1e-6; });
  // needed but not supplied
  const PiecewiseFn need = compose(proc.resource_requirements[l].fn.derivative(), r.progress);
  for (const auto& iv : detail::intervals_where(input, until, [&](double v, double t) {
         return v == 0.0 && need.eval(t) > 0.0;
       }))
    out.bottleneck_witnesses.push_back(iv);
  std::sort(out.bottleneck_witnesses.begin(), out.bottleneck_witnesses.end(),
            [](const TimeInterval& a, const TimeInterval& b) { return a.t_a < b.t_a; });
  return out;
}

// Allocated but unused supply: I_l - demand.
inline PiecewiseFn unused_resource(const ProgressResult& r, const Process& proc, const ExecutionContext& ctx,
                                   std::size_t l) {
  return sub(ctx.resource_inputs.at(l), resource_demand(r, proc, ctx, l));
}

// Data consumed so far: R_Dk^-1(P(t)), reading the inverse left-continuously
// so that no data counts as consumed before progress actually moves.
inline PiecewiseFn data_consumed(const ProgressResult& r, const Process& proc, std::size_t k) {
  return compose(generalized_inverse(proc.data_requirements.at(k).fn), r.progress, Side::left);
}

struct BufferedData {
  PiecewiseFn fn;
  std::optional<double> violation;  // time where consumption exceeded delivery
};

// Delivered but not yet consumed: I_Dk(t) - consumed(t), frozen after
// completion and clamped at -tolerance.
inline BufferedData buffered_data(const ProgressResult& r, const Process& proc, const ExecutionContext& ctx,
                                  std::size_t k) {
  PiecewiseFn b = sub(ctx.data_inputs.at(k), data_consumed(r, proc, k));
  if (r.completion_time) b = splice(b, *r.completion_time, PiecewiseFn::constant(b.eval(*r.completion_time)));
  BufferedData out{b, std::nullopt};
  double scale = 1.0;
  for (std::size_t i = 0; i < b.size(); ++i) scale = std::max(scale, std::abs(ctx.data_inputs[k].eval(b.breakpoint(i))));
  const double floor = -tolerance() * scale;
  if (auto w = negativity_witness(b.scaled(1.0 / scale))) {
    out.violation = *w;
    out.fn = detail::max_with(b, floor);
  }
  return out;
}

struct DataOnlyDemand {
  PiecewiseFn fn;
  std::vector<Impulse> impulses;  // instants where P_D jumps and resource is due at once
};

// Supply of resource l under which only the data inputs would limit
// progress: P_D'(t) * R_l'(P_D(t)) with P_D capped at the target.
inline DataOnlyDemand data_only_demand(const Process& proc, const ExecutionContext& ctx, std::size_t l) {
  auto [env, per] = data_progress(proc, ctx);
  const double target = proc.target();
  const PiecewiseFn pd = min_of({env.fn, PiecewiseFn::constant(target, env.fn.start())}).fn;
  const PiecewiseFn& req = proc.resource_requirements.at(l).fn;
  DataOnlyDemand out{mul(pd.derivative(), compose(req.derivative(), pd)).simplified(), {}};
  const double start = std::max(ctx.start_time, pd.start());
  // reaching progress b from a consumes R(b) - R(a) at once; R(0-) = 0
  const double p0 = pd.eval(start);
  const double c0 = req.eval(p0);
  if (c0 > abs_tol(c0)) out.impulses.push_back({start, c0});
  for (std::size_t i = 1; i < pd.size(); ++i) {
    const double t = pd.breakpoint(i);
    if (t <= start || !pd.has_jump_at(i)) continue;
    const double c = req.eval(pd.piece(i)(0.0)) - req.eval(pd.end_value(i - 1));
    if (c > abs_tol(c)) out.impulses.push_back({t, c});
  }
  return out;
}

struct UsageReport {
  struct Resource {
    PiecewiseFn demand;
    std::optional<RelativeUsage> relative;  // absent when the supply is not piecewise-constant
    PiecewiseFn unused;
  };
  struct Data {
    PiecewiseFn consumed;
    BufferedData buffered;
  };
  std::vector<Resource> resources;
  std::vector<Data> data;
};

inline UsageReport usage_report(const ProgressResult& r, const Process& proc, const ExecutionContext& ctx) {
  UsageReport rep;
  for (std::size_t l = 0; l < proc.resource_requirements.size(); ++l) {
    UsageReport::Resource res{resource_demand(r, proc, ctx, l), std::nullopt, PiecewiseFn()};
    res.unused = sub(ctx.resource_inputs[l], res.demand);
    if (ctx.resource_inputs[l].is_piecewise_constant()) res.relative = relative_usage(r, proc, ctx, l);
    rep.resources.push_back(std::move(res));
  }
  for (std::size_t k = 0; k < proc.data_requirements.size(); ++k)
    rep.data.push_back({data_consumed(r, proc, k), buffered_data(r, proc, ctx, k)});
  return rep;
}

}  // namespace bottlemod
