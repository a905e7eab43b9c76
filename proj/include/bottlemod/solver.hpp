#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "bottlemod/model.hpp"
#include "bottlemod/piecewise.hpp"

namespace bottlemod {

struct Limiter {
  enum class Kind { data, resource, finished };
  Kind kind = Kind::finished;
  int index = -1;

  static Limiter data(int k) { return {Kind::data, k}; }
  static Limiter resource(int l) { return {Kind::resource, l}; }
  static Limiter finished() { return {Kind::finished, -1}; }

  friend bool operator==(const Limiter&, const Limiter&) = default;
  friend auto operator<=>(const Limiter&, const Limiter&) = default;
};

inline std::string to_string(const Limiter& l) {
  switch (l.kind) {
    case Limiter::Kind::data: return "data" + std::to_string(l.index);
    case Limiter::Kind::resource: return "resource" + std::to_string(l.index);
    case Limiter::Kind::finished: return "finished";
  }
  return "?";
}

struct BottleneckSegment {
  double t_a = 0.0;
  double t_b = kInf;
  Limiter limiter;
  std::vector<Limiter> co_limiters;
};

// Interval during which progress waits for lump-sum resource amounts.
struct StallInterval {
  double t_a = 0.0;
  double t_b = 0.0;
  double level = 0.0;           // progress held during the stall
  std::vector<int> resources;   // resources paying a lump at this level
  std::vector<double> paid_at;  // when each of them finished paying
};

struct ProgressResult {
  PiecewiseFn progress;                // P(t)
  PiecewiseFn data_progress;           // P_D(t)
  std::vector<PiecewiseFn> per_input;  // P_Dk(t)
  LabeledFn data_envelope;             // P_D with argmin labels
  std::optional<double> completion_time;
  std::vector<BottleneckSegment> bottlenecks;
  PiecewiseFn max_speed_trace;  // the speed bound active on each interval
  std::vector<StallInterval> stalls;
  double start_time = 0.0;
  double target = 0.0;
  std::size_t iterations = 0;

  const BottleneckSegment* segment_at(double t) const {
    for (const auto& s : bottlenecks)
      if (t >= s.t_a && t < s.t_b) return &s;
    return nullptr;
  }
  // Sequence of primary limiters, excluding the final Finished segment.
  std::vector<Limiter> limiter_sequence() const {
    std::vector<Limiter> out;
    for (const auto& s : bottlenecks)
      if (s.limiter.kind != Limiter::Kind::finished) out.push_back(s.limiter);
    return out;
  }
};

struct SolverOptions {
  std::size_t max_iterations = 1000000;
};

// P_Dk = R_Dk(I_Dk(t)) and their labeled minimum. With no data inputs the
// data bound is the constant target.
inline std::pair<LabeledFn, std::vector<PiecewiseFn>> data_progress(const Process& proc,
                                                                     const ExecutionContext& ctx) {
  if (ctx.data_inputs.size() != proc.data_requirements.size())
    throw InvalidParameter("process '" + proc.name + "': data input count does not match requirements");
  std::vector<PiecewiseFn> per;
  per.reserve(ctx.data_inputs.size());
  for (std::size_t k = 0; k < ctx.data_inputs.size(); ++k)
    per.push_back(compose(proc.data_requirements[k].fn, ctx.data_inputs[k]));
  if (per.empty()) return {LabeledFn{PiecewiseFn::constant(proc.target()), {{}}}, per};
  return {min_of(per), per};
}

namespace detail {

struct Lump {
  double level;
  double amount;
  int resource;
  bool paid = false;
};

// Builder for the piecewise progress function and its per-piece limiters.
class ProgressBuilder {
 public:
  struct Tag {
    Limiter primary;
    std::vector<Limiter> co;
  };

  void emit(double x, Polynomial p, Tag tag, Polynomial speed) {
    // on ties keep the limiter that was already active
    const std::size_t prev = !xs_.empty() && !(x > xs_.back()) ? tags_.size() - 1 : tags_.size();
    if (prev > 0 && tag.primary != tags_[prev - 1].primary) {
      auto it = std::find(tag.co.begin(), tag.co.end(), tags_[prev - 1].primary);
      if (it != tag.co.end()) std::swap(*it, tag.primary);
    }
    if (!xs_.empty() && !(x > xs_.back())) {
      ps_.back() = std::move(p);
      tags_.back() = std::move(tag);
      speeds_.back() = std::move(speed);
      return;
    }
    xs_.push_back(x);
    ps_.push_back(std::move(p));
    tags_.push_back(std::move(tag));
    speeds_.push_back(std::move(speed));
  }

  // Copy f's pieces on [from, to) with tags from `tag_of(piece index)`.
  template <class TagOf>
  void copy(const PiecewiseFn& f, double from, double to, TagOf tag_of, const PiecewiseFn* speed = nullptr) {
    for (std::size_t i = f.index_at(from); i < f.size(); ++i) {
      const double a = f.breakpoint(i);
      if (a >= to) break;
      const double x = std::max(a, from);
      Polynomial sp = speed ? speed->piece(speed->index_at(x)).shifted(x - speed->breakpoint(speed->index_at(x)))
                            : f.piece(i).derivative().shifted(x - a);
      emit(x, f.piece(i).shifted(x - a), tag_of(i), std::move(sp));
      // speed functions may have breakpoints inside f's piece
      if (speed) {
        const double end = std::min(to, f.piece_end(i));
        for (std::size_t j = speed->index_at(x) + 1; j < speed->size() && speed->breakpoint(j) < end; ++j) {
          const double y = speed->breakpoint(j);
          emit(y, f.piece(i).shifted(y - a), tag_of(i), speed->piece(j));
        }
      }
    }
  }

  const std::vector<double>& xs() const { return xs_; }
  const std::vector<Tag>& tags() const { return tags_; }

  PiecewiseFn progress() const { return PiecewiseFn(xs_, ps_, Extension::continue_last); }
  PiecewiseFn speeds() const { return PiecewiseFn(xs_, speeds_, Extension::continue_last); }

 private:
  std::vector<double> xs_;
  std::vector<Polynomial> ps_;
  std::vector<Tag> tags_;
  std::vector<Polynomial> speeds_;
};

inline std::vector<Limiter> union_limiters(std::vector<Limiter> a, const std::vector<Limiter>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

inline std::vector<BottleneckSegment> build_segments(const std::vector<double>& xs,
                                                     const std::vector<ProgressBuilder::Tag>& tags, double start,
                                                     std::optional<double> completion) {
  std::vector<BottleneckSegment> segs;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] < start) continue;
    const double b = i + 1 < xs.size() ? xs[i + 1] : kInf;
    const auto& tag = tags[i];
    if (!segs.empty() && segs.back().limiter == tag.primary) {
      segs.back().t_b = b;
      segs.back().co_limiters = union_limiters(segs.back().co_limiters, tag.co);
      continue;
    }
    segs.push_back({xs[i], b, tag.primary, tag.co});
  }
  // drop jitter-sized segments into their left neighbour
  const double horizon = std::max(1.0, (completion ? *completion : (segs.empty() ? start : segs.back().t_a)) - start);
  std::vector<BottleneckSegment> out;
  for (auto& s : segs) {
    const bool tiny = s.t_b - s.t_a < 1e-9 * horizon && s.limiter.kind != Limiter::Kind::finished;
    if (tiny && !out.empty()) {
      out.back().t_b = s.t_b;
      continue;
    }
    if (!out.empty() && out.back().limiter == s.limiter) {
      out.back().t_b = s.t_b;
      out.back().co_limiters = union_limiters(out.back().co_limiters, s.co_limiters);
      continue;
    }
    if (!out.empty() && out.back().t_b - out.back().t_a < 1e-9 * horizon &&
        out.back().limiter.kind != Limiter::Kind::finished) {
      // a tiny leading segment yields to its right neighbour
      s.t_a = out.back().t_a;
      out.back() = s;
      continue;
    }
    out.push_back(s);
  }
  for (auto& s : out) std::erase(s.co_limiters, s.limiter);
  return out;
}

// first_reach, forgiving a shortfall within tolerance of the level.
inline std::optional<double> reach_level(const PiecewiseFn& f, double level, double after) {
  if (auto t = first_reach(f, level, after)) return t;
  return first_reach(f, level - abs_tol(level), after);
}

}  // namespace detail

// Forward pass over time that caps progress by the data bound P_D and by the
// resource supplies. On each interval progress either follows P_D (data
// mode), climbs at the resource-limited speed min_l I_l / R_l'(p) (resource
// mode), or waits while lump-sum resource amounts are paid (stall).
inline ProgressResult impose_resource_limits(const Process& proc, const ExecutionContext& ctx, LabeledFn envelope,
                                             std::vector<PiecewiseFn> per_input, const SolverOptions& opts = {}) {
  const std::size_t L = proc.resource_requirements.size();
  if (ctx.resource_inputs.size() != L)
    throw InvalidParameter("process '" + proc.name + "': resource input count does not match requirements");
  const double target = proc.target();
  const double s = ctx.start_time;
  const PiecewiseFn& PD = envelope.fn;

  std::vector<PiecewiseFn> R, dR, cum, demand;
  std::vector<detail::Lump> lumps;
  std::vector<double> r_breaks;
  for (std::size_t l = 0; l < L; ++l) {
    const PiecewiseFn& r = proc.resource_requirements[l].fn;
    if (r.max_degree() > 1)
      throw InvalidParameter("process '" + proc.name + "': resource requirement " + std::to_string(l) +
                             " must be piecewise-linear");
    R.push_back(r);
    dR.push_back(r.derivative());
    cum.push_back(ctx.resource_inputs[l].antiderivative(0.0));
    demand.push_back(mul(PD.derivative(), compose(dR.back(), PD)));
    const double r0 = r.eval(r.start());
    if (r0 > abs_tol(r0)) lumps.push_back({r.start(), r0, static_cast<int>(l)});
    for (std::size_t i = 1; i < r.size(); ++i) {
      if (r.has_jump_at(i)) lumps.push_back({r.breakpoint(i), r.jump_at(i), static_cast<int>(l)});
      r_breaks.push_back(r.breakpoint(i));
    }
  }
  std::sort(r_breaks.begin(), r_breaks.end());

  std::vector<double> pd_jumps;
  for (std::size_t i = 1; i < PD.size(); ++i)
    if (PD.jump_at(i) > abs_tol(PD.end_value(i - 1), PD.piece(i)(0.0))) pd_jumps.push_back(PD.breakpoint(i));

  using Tag = detail::ProgressBuilder::Tag;
  detail::ProgressBuilder out;
  ProgressResult res;
  res.start_time = s;
  res.target = target;

  if (s > 0.0) out.emit(0.0, Polynomial(), Tag{Limiter::finished(), {}}, Polynomial());

  auto data_tag = [&](const std::vector<int>& labels) {
    Tag t{labels.empty() ? Limiter::finished() : Limiter::data(labels.front()), {}};
    for (std::size_t i = 1; i < labels.size(); ++i) t.co.push_back(Limiter::data(labels[i]));
    return t;
  };
  auto near = [](double a, double b) { return std::abs(a - b) <= abs_tol(a, b); };

  double cur = s;
  double p = 0.0;
  std::size_t it = 0;
  while (true) {
    if (++it > opts.max_iterations)
      throw NonTermination("process '" + proc.name + "': solver exceeded " + std::to_string(opts.max_iterations) +
                           " iterations");

    if (p >= target - abs_tol(target)) {
      res.completion_time = cur;
      p = target;
      break;
    }

    // lump-sum resource amounts due at the current level
    {
      StallInterval stall{cur, cur, p, {}, {}};
      int last = -1;
      for (auto& lump : lumps) {
        if (lump.paid || !near(lump.level, p)) continue;
        const double have = cum[lump.resource].eval(cur);
        auto done = detail::reach_level(cum[lump.resource], have + lump.amount, cur);
        if (!done)
          throw NoProgress("process '" + proc.name + "': resource " + std::to_string(lump.resource) +
                           " never supplies the amount needed at progress " + std::to_string(p));
        lump.paid = true;
        stall.resources.push_back(lump.resource);
        stall.paid_at.push_back(*done);
        if (*done >= stall.t_b) {
          stall.t_b = *done;
          last = lump.resource;
        }
      }
      if (!stall.resources.empty()) {
        if (stall.t_b > cur) {
          Tag tag{Limiter::resource(last), {}};
          for (int l : stall.resources)
            if (l != last) tag.co.push_back(Limiter::resource(l));
          out.emit(cur, Polynomial::constant(p), tag, Polynomial());
          cur = stall.t_b;
          res.stalls.push_back(std::move(stall));
        }
        continue;
      }
    }

    const double pd_here = PD.eval(cur);
    bool resource_mode = p < pd_here - abs_tol(pd_here, p);
    if (!resource_mode)
      for (std::size_t l = 0; l < L && !resource_mode; ++l)
        resource_mode = scan_state(demand[l], ctx.resource_inputs[l], cur).initial;

    if (resource_mode) {
      double p_next = target;
      auto nb = std::upper_bound(r_breaks.begin(), r_breaks.end(), p + abs_tol(p));
      if (nb != r_breaks.end()) p_next = std::min(p_next, *nb);

      std::vector<PiecewiseFn> speeds;
      std::vector<int> active;
      for (std::size_t l = 0; l < L; ++l) {
        const double c = dR[l].eval(p);
        if (c > 0.0) {
          speeds.push_back(ctx.resource_inputs[l].restricted(cur).scaled(1.0 / c));
          active.push_back(static_cast<int>(l));
        }
      }
      if (active.empty()) {
        // nothing to pay for up to the next requirement breakpoint
        p = std::min(p_next, pd_here);
        continue;
      }
      LabeledFn speed = min_of(speeds);
      const PiecewiseFn pnew = speed.fn.antiderivative(p);
      auto reach = first_reach(pnew, p_next, cur);
      const StateScan gap = scan_state(PD, pnew, cur);

      if (!gap.initial) {
        // resource speed already keeps up: follow P_D over one sub-interval
        double end = gap.first_end;
        if (reach) end = std::min(end, *reach);
        if (!std::isfinite(end)) throw NoProgress("process '" + proc.name + "': no further progress is possible");
        out.copy(PD, cur, end, [&](std::size_t i) { return data_tag(envelope.labels[i]); });
        p = std::min(PD.eval_left(end), target);
        cur = end;
        continue;
      }

      std::optional<double> end;
      bool reached = false;
      if (gap.change_at) end = gap.change_at;
      if (reach && (!end || *reach <= *end)) {
        end = reach;
        reached = true;
      }
      if (!end)
        throw NoProgress("process '" + proc.name + "': resources stay insufficient to reach progress " +
                         std::to_string(p_next));
      auto tag_of = [&](std::size_t i) {
        Tag t{Limiter::resource(active[static_cast<std::size_t>(speed.labels[i].front())]), {}};
        for (std::size_t j = 1; j < speed.labels[i].size(); ++j)
          t.co.push_back(Limiter::resource(active[static_cast<std::size_t>(speed.labels[i][j])]));
        return t;
      };
      out.copy(pnew, cur, *end, tag_of, &speed.fn);
      p = reached ? p_next : std::min(pnew.eval(*end), PD.eval(*end));
      cur = *end;
      continue;
    }

    // data mode: P follows P_D until something forces a change
    std::optional<double> end;
    auto take = [&](std::optional<double> t) {
      if (t && *t > cur && (!end || *t < *end)) end = t;
    };
    for (std::size_t l = 0; l < L; ++l) take(scan_state(demand[l], ctx.resource_inputs[l], cur).change_at);
    auto nj = std::upper_bound(pd_jumps.begin(), pd_jumps.end(), cur);
    if (nj != pd_jumps.end()) take(*nj);
    double next_lump = kInf;
    for (const auto& lump : lumps)
      if (!lump.paid && lump.level > p + abs_tol(p)) next_lump = std::min(next_lump, lump.level);
    if (std::isfinite(next_lump)) take(first_reach(PD, next_lump, cur));
    take(detail::reach_level(PD, target, cur));

    const double to = end ? *end : kInf;
    out.copy(PD, cur, to, [&](std::size_t i) { return data_tag(envelope.labels[i]); });
    if (!end) break;  // data never suffices: no completion
    cur = *end;
    const double left = PD.eval_left(cur);
    if (std::isfinite(next_lump) && near(left, next_lump)) p = next_lump;
    else if (near(left, target) || left > target) p = target;
    else p = left;
  }

  if (res.completion_time) out.emit(*res.completion_time, Polynomial::constant(target), Tag{Limiter::finished(), {}},
                                    Polynomial());

  res.progress = out.progress().simplified();
  res.max_speed_trace = out.speeds();
  res.bottlenecks = detail::build_segments(out.xs(), out.tags(), s, res.completion_time);
  res.data_progress = PD;
  res.per_input = std::move(per_input);
  res.data_envelope = std::move(envelope);
  res.iterations = it;
  return res;
}

inline ProgressResult solve(const Process& proc, const ExecutionContext& ctx, const SolverOptions& opts = {}) {
  auto [env, per] = data_progress(proc, ctx);
  return impose_resource_limits(proc, ctx, std::move(env), std::move(per), opts);
}

}  // namespace bottlemod
