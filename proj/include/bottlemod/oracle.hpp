#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bottlemod/model.hpp"
#include "bottlemod/workflow.hpp"

// Reference simulation by fixed time steps. It shares no algorithm with the
// event-driven solver: inputs are only evaluated pointwise, supply per step
// is integrated by quadrature, and progress per step is found by bisection
// against the resource budget.
namespace bottlemod::oracle {

struct Options {
  double dt = 0.01;
  double horizon = 0.0;  // 0: pick one from the inputs
};

struct Sample {
  double t = 0.0;
  double progress = 0.0;
};

struct Result {
  std::vector<Sample> samples;
  std::optional<double> completion_time;
  std::vector<double> consumed;  // cumulative resource amount per slot at the end
};

namespace detail {

// Integral of f over [a, b] by 5-point Gauss-Legendre on each piece; exact
// for polynomial pieces up to degree 9.
inline double integrate(const PiecewiseFn& f, double a, double b) {
  static constexpr std::array<double, 5> x{0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                           0.9061798459386640};
  static constexpr std::array<double, 5> w{0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                           0.2369268850561891, 0.2369268850561891};
  if (!(b > a)) return 0.0;
  std::vector<double> cuts{a};
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f.breakpoint(i) > a && f.breakpoint(i) < b) cuts.push_back(f.breakpoint(i));
  cuts.push_back(b);
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double m = 0.5 * (cuts[i] + cuts[i + 1]), h = 0.5 * (cuts[i + 1] - cuts[i]);
    for (std::size_t j = 0; j < x.size(); ++j) {
      // stay strictly inside the piece so right-continuity cannot leak in
      const double u = std::clamp(m + h * x[j], cuts[i], std::nextafter(cuts[i + 1], cuts[i]));
      sum += h * w[j] * f.eval(u);
    }
  }
  return sum;
}

// Cumulative requirement just below p, with nothing owed below zero.
inline double owed_before(const PiecewiseFn& req, double p) { return p <= 0.0 ? 0.0 : req.eval_left(p); }

// One process advancing under per-step data limits and resource budgets.
// Within a step the moments where data unblocks or a lump is paid off are
// located by bisection, so supply from before such a moment is not spent on
// progress that could only happen after it.
struct Runner {
  using DataAt = std::function<double(double)>;
  using Supply = std::function<double(std::size_t, double, double)>;

  const Process* proc = nullptr;
  double target = 0.0;
  double start = 0.0;
  double p = 0.0;
  double pd_prev = 0.0;
  std::vector<double> consumed;
  std::optional<double> completion;
  std::vector<double> time_cuts;  // input breakpoints, where supply or data rates may jump

  void init(const Process& pr, double start_time) {
    proc = &pr;
    target = pr.target();
    start = start_time;
    consumed.assign(pr.resource_requirements.size(), 0.0);
  }

  // Data-limited progress at time t for the given cumulative inputs.
  double data_limit(const std::vector<double>& inputs) const {
    double pd = target;
    for (std::size_t k = 0; k < inputs.size(); ++k)
      pd = std::min(pd, proc->data_requirements[k].fn.eval(std::max(0.0, inputs[k])));
    return pd;
  }

  // Largest progress reachable from p with the given extra budget, capped.
  double reach(double cap, const std::vector<double>& budget) const {
    cap = std::max(p, std::min(cap, target));
    const auto& reqs = proc->resource_requirements;
    auto affordable = [&](double q) {
      for (std::size_t l = 0; l < reqs.size(); ++l)
        if (owed_before(reqs[l].fn, q) > consumed[l] + budget[l] + abs_tol(consumed[l] + budget[l])) return false;
      return true;
    };
    // largest affordable breakpoint, then bisect up to the next candidate
    std::vector<double> cand{p};
    for (const auto& r : reqs)
      for (std::size_t i = 0; i < r.fn.size(); ++i)
        if (r.fn.breakpoint(i) > p && r.fn.breakpoint(i) < cap) cand.push_back(r.fn.breakpoint(i));
    cand.push_back(cap);
    std::sort(cand.begin(), cand.end());
    std::size_t i = 0;
    while (i + 1 < cand.size() && affordable(cand[i + 1])) ++i;
    double lo = cand[i];
    if (i + 1 < cand.size()) {
      double hi = cand[i + 1];
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        (affordable(mid) ? lo : hi) = mid;
      }
    }
    return std::max(p, lo);
  }

  // Earliest s in [a, b] with pred(s), assuming pred is monotone; b if none.
  template <class Pred>
  static double earliest(double a, double b, Pred pred) {
    if (pred(a)) return a;
    for (int it = 0; it < 100 && b - a > 1e-15 * std::max(1.0, std::abs(b)); ++it) {
      const double mid = 0.5 * (a + b);
      (pred(mid) ? b : a) = mid;
    }
    return b;
  }

  // Credit supply over [a, b], never past what is owed at `level`. A lump at
  // `level` is only owed once progress sits there, not while approaching it.
  void absorb(const Supply& supply, double a, double b, double level, bool approaching = false) {
    const auto& reqs = proc->resource_requirements;
    for (std::size_t l = 0; l < reqs.size(); ++l) {
      const double cap = approaching ? owed_before(reqs[l].fn, level) : reqs[l].fn.eval(level);
      consumed[l] = std::max(consumed[l], std::min(consumed[l] + supply(l, a, b), cap));
    }
  }

  // Smallest resource requirement breakpoint strictly between a and b.
  double next_kink(double a, double b) const {
    double k = kInf;
    for (const auto& r : proc->resource_requirements)
      for (double x : r.fn.breakpoints())
        if (x > a + abs_tol(a) && x < b - abs_tol(b)) k = std::min(k, x);
    return k;
  }

  // Advance over [t0, t1].
  void step(double t0, double t1, const DataAt& data_at, const Supply& supply) {
    if (completion) return;
    const double pd1 = data_at(t1);
    if (pd1 < pd_prev - abs_tol(pd1, pd_prev))
      throw StepTooCoarse("data-limited progress of '" + proc->name + "' decreased at t = " + std::to_string(t1));
    pd_prev = std::max(pd_prev, pd1);
    double a = t0;
    for (auto it = std::upper_bound(time_cuts.begin(), time_cuts.end(), t0); it != time_cuts.end() && *it < t1; ++it) {
      advance(a, *it, data_at, supply);
      a = *it;
    }
    advance(a, t1, data_at, supply);
  }

  void advance(double t0, double t1, const DataAt& data_at, const Supply& supply) {
    if (completion || !(t1 > t0)) return;
    const double pd1 = data_at(t1);
    const auto& reqs = proc->resource_requirements;
    auto budget_over = [&](double a, double b) {
      std::vector<double> out(reqs.size());
      for (std::size_t l = 0; l < reqs.size(); ++l) out[l] = supply(l, a, b);
      return out;
    };
    double tau = t0;
    std::size_t kinks = 0;
    for (const auto& r : reqs) kinks += r.fn.size();
    for (std::size_t guard = 0; guard < 4 * (kinks + 2) + 64 && tau < t1; ++guard) {
      // wait for data beyond p and for every lump owed at p
      double ready = earliest(tau, t1, [&](double s) { return data_at(s) > p + abs_tol(p); });
      if (!(data_at(t1) > p + abs_tol(p))) ready = kInf;
      for (std::size_t l = 0; l < reqs.size() && ready <= t1; ++l) {
        const double owed = reqs[l].fn.eval(p) - consumed[l];
        if (owed <= abs_tol(reqs[l].fn.eval(p))) continue;
        if (supply(l, tau, t1) < owed - abs_tol(owed)) ready = kInf;
        else ready = std::max(ready, earliest(tau, t1, [&](double s) { return supply(l, tau, s) >= owed - abs_tol(owed); }));
      }
      if (ready > t1) {
        absorb(supply, tau, t1, p);
        return;
      }
      absorb(supply, tau, ready, p);
      tau = ready;
      double q = reach(pd1, budget_over(tau, t1));
      // stop at the first requirement breakpoint, where the limiter may change
      bool stuck = q < std::min(pd1, target) - abs_tol(q) && owes_lump(q);
      if (const double k = next_kink(p, q); k < kInf) {
        q = k;
        stuck = true;
      }
      if (q >= target - abs_tol(target) || stuck) {
        // time at which q is reached inside the step
        const double at = earliest(tau, t1, [&](double s) {
          return reach(data_at(s), budget_over(tau, s)) >= q - abs_tol(q);
        });
        absorb(supply, tau, at, q, true);
        // being at q means everything owed below q has been paid
        for (std::size_t l = 0; l < reqs.size(); ++l) consumed[l] = std::max(consumed[l], owed_before(reqs[l].fn, q));
        p = q;
        tau = at;
        if (p >= target - abs_tol(target)) {
          completion = std::max(at, start);
          return;
        }
        continue;
      }
      absorb(supply, tau, t1, q);
      p = q;
      return;
    }
  }

  // Some requirement jumps at q, so progress past q waits for a payment.
  bool owes_lump(double q) const {
    for (const auto& r : proc->resource_requirements)
      if (r.fn.eval(q) > owed_before(r.fn, q) + abs_tol(r.fn.eval(q))) return true;
    return false;
  }
};

inline std::vector<double> all_breakpoints(const std::vector<PiecewiseFn>& fns) {
  std::vector<double> out;
  for (const auto& f : fns) out.insert(out.end(), f.breakpoints().begin(), f.breakpoints().end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline double default_horizon(const std::vector<PiecewiseFn>& fns, double start) {
  double last = start;
  for (const auto& f : fns) last = std::max(last, f.breakpoints().back());
  return 2.0 * last + 1000.0;
}

}  // namespace detail

// Simulate one process in its context.
inline Result simulate(const Process& proc, const ExecutionContext& ctx, const Options& opts = {}) {
  if (!(opts.dt > 0.0)) throw InvalidParameter("oracle step must be positive");
  std::vector<PiecewiseFn> all = ctx.data_inputs;
  all.insert(all.end(), ctx.resource_inputs.begin(), ctx.resource_inputs.end());
  const double horizon = opts.horizon > 0.0 ? opts.horizon : detail::default_horizon(all, ctx.start_time);

  detail::Runner run;
  run.init(proc, ctx.start_time);
  run.time_cuts = detail::all_breakpoints(all);
  Result res;
  res.samples.push_back({0.0, 0.0});
  std::vector<double> inputs(ctx.data_inputs.size());
  const auto steps = static_cast<long long>(std::ceil(horizon / opts.dt));
  for (long long n = 0; n < steps && !run.completion; ++n) {
    const double t0 = n * opts.dt, t1 = (n + 1) * opts.dt;
    if (t1 > ctx.start_time) {
      const double a = std::max(t0, ctx.start_time);
      auto data_at = [&](double s) {
        for (std::size_t k = 0; k < inputs.size(); ++k) inputs[k] = ctx.data_inputs[k].eval(s);
        return run.data_limit(inputs);
      };
      auto supply = [&](std::size_t l, double x, double y) { return detail::integrate(ctx.resource_inputs[l], x, y); };
      run.step(a, t1, data_at, supply);
    }
    res.samples.push_back({t1, run.p});
  }
  res.completion_time = run.completion;
  res.consumed = run.consumed;
  return res;
}

struct WorkflowResult {
  std::map<std::string, Result> processes;
  std::optional<double> makespan;
  std::vector<std::string> starved;  // processes that never completed
};

// Simulate a whole workflow on one clock. Pool shares are handed over in the
// step after their holder completes.
inline WorkflowResult simulate(const Workflow& wf, const Options& opts = {}) {
  if (!(opts.dt > 0.0)) throw InvalidParameter("oracle step must be positive");
  const auto order = topo_order(wf);
  std::vector<PiecewiseFn> all;
  double latest_start = 0.0;
  for (const auto& wp : wf.processes) {
    latest_start = std::max(latest_start, wp.start_time);
    for (const auto& [slot, b] : wp.bindings)
      if (b.fn) all.push_back(*b.fn);
  }
  for (const auto& pool : wf.pools) all.push_back(pool.capacity);
  const double horizon = opts.horizon > 0.0 ? opts.horizon : detail::default_horizon(all, latest_start);

  std::map<std::string, detail::Runner> runs;
  std::map<std::string, Result> out;
  for (const auto& name : order) {
    runs[name].init(wf.find(name)->process, wf.find(name)->start_time);
    runs[name].time_cuts = detail::all_breakpoints(all);
    out[name].samples.push_back({0.0, 0.0});
  }
  auto done = [&](const std::string& n) { return runs.at(n).completion.has_value(); };

  // share of `pool` held by `name` for the coming step
  auto share_of = [&](const std::string& name, const PoolShare& s) {
    double f = effective_fraction(wf, s);
    if (done(name) && !s.release_to.empty()) f = 0.0;
    for (const auto& wp : wf.processes)
      for (const auto& [slot, b] : wp.bindings) {
        if (!b.share || b.share->pool != s.pool || !done(wp.process.name)) continue;
        const auto& rt = b.share->release_to;
        if (std::find(rt.begin(), rt.end(), name) == rt.end() || done(name)) continue;
        const auto active = std::count_if(rt.begin(), rt.end(), [&](const std::string& x) { return !done(x); });
        f += effective_fraction(wf, *b.share) / static_cast<double>(active);
      }
    return f;
  };

  const auto steps = static_cast<long long>(std::ceil(horizon / opts.dt));
  for (long long n = 0; n < steps; ++n) {
    const double t0 = n * opts.dt, t1 = (n + 1) * opts.dt;
    bool all_done = true;
    // shares are fixed from the state at the start of the step
    std::map<std::string, std::vector<double>> fractions;
    for (const auto& name : order) {
      const WorkflowProcess& wp = *wf.find(name);
      auto& fr = fractions[name];
      for (const auto& r : wp.process.resource_requirements) {
        const Binding& b = wp.bindings.at(r.name);
        fr.push_back(b.share ? share_of(name, *b.share) : 0.0);
      }
    }
    for (const auto& name : order) {
      detail::Runner& run = runs.at(name);
      const WorkflowProcess& wp = *wf.find(name);
      bool gated = false;
      for (const auto& g : wf.gate_predecessors(name)) {
        const auto& c = runs.at(g).completion;
        if (!c) gated = true;
        else run.start = std::max(run.start, *c);
      }
      if (!gated && t1 > run.start && !run.completion) {
        std::vector<double> inputs;
        for (const auto& d : wp.process.data_requirements) {
          const DataEdge* edge = nullptr;
          for (const auto& e : wf.edges)
            if (e.to == name && e.slot == d.name) edge = &e;
          if (edge) {
            const Process& pp = wf.find(edge->from)->process;
            for (const auto& o : pp.outputs)
              if (o.name == edge->output) inputs.push_back(o.fn.eval(runs.at(edge->from).p));
          } else {
            inputs.push_back(wp.bindings.at(d.name).fn->eval(t1));
          }
        }
        // upstream progress is only known at step ends, so data is held over the step
        const double pd = run.data_limit(inputs);
        auto supply = [&](std::size_t l, double x, double y) {
          const Binding& b = wp.bindings.at(wp.process.resource_requirements[l].name);
          if (b.fn) return detail::integrate(*b.fn, x, y);
          return fractions[name][l] * detail::integrate(wf.find_pool(b.share->pool)->capacity, x, y);
        };
        run.step(std::max(t0, run.start), t1, [pd](double) { return pd; }, supply);
      }
      out[name].samples.push_back({t1, run.p});
      all_done &= run.completion.has_value();
    }
    if (all_done) break;
  }

  WorkflowResult res;
  double makespan = 0.0;
  for (const auto& name : order) {
    Result& r = out[name];
    r.completion_time = runs.at(name).completion;
    r.consumed = runs.at(name).consumed;
    if (r.completion_time) makespan = std::max(makespan, *r.completion_time);
    else res.starved.push_back(name);
    res.processes[name] = std::move(r);
  }
  if (res.starved.empty()) res.makespan = makespan;
  return res;
}

}  // namespace bottlemod::oracle
