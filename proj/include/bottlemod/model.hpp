#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bottlemod/piecewise.hpp"

namespace bottlemod {

// Cumulative input amount -> maximum achievable progress.
struct DataRequirement {
  std::string name;
  PiecewiseFn fn;
};

// Progress -> cumulative resource amount. Must be piecewise-linear.
struct ResourceRequirement {
  std::string name;
  PiecewiseFn fn;
};

// Progress -> cumulative output amount.
struct OutputSpec {
  std::string name;
  PiecewiseFn fn;
};

// Supremum of f over its domain (+inf if it grows without bound).
inline double supremum(const PiecewiseFn& f) {
  double m = -kInf;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Polynomial& p = f.piece(i);
    const double w = f.piece_width(i);
    if (!std::isfinite(w)) {
      if (!p.is_constant()) {
        if (p.coeffs().back() > 0.0) return kInf;
        for (double r : real_roots(p.derivative(), 0.0, kInf)) m = std::max(m, p(r));
      }
      m = std::max(m, p(0.0));
      continue;
    }
    m = std::max({m, p(0.0), p(w)});
    if (!p.is_constant())
      for (double r : real_roots(p.derivative(), 0.0, w)) m = std::max(m, p(r));
  }
  return m;
}

struct Process {
  std::string name;
  std::vector<DataRequirement> data_requirements;
  std::vector<ResourceRequirement> resource_requirements;
  std::vector<OutputSpec> outputs;
  std::optional<double> target_progress;  // defaults to the last output's maximum

  double target() const {
    if (target_progress) return *target_progress;
    if (outputs.empty()) throw InvalidParameter("process '" + name + "' has no outputs and no target_progress");
    const double t = supremum(outputs.back().fn);
    if (!std::isfinite(t))
      throw InvalidParameter("process '" + name + "' needs an explicit target_progress: last output is unbounded");
    return t;
  }
};

// Environment of one process: cumulative data inputs I_Dk(t) and resource
// rates I_Rl(t), all in absolute time starting at t = 0.
struct ExecutionContext {
  std::vector<PiecewiseFn> data_inputs;
  std::vector<PiecewiseFn> resource_inputs;
  double start_time = 0.0;
};

struct Violation {
  enum class Kind {
    monotonicity,
    piecewise_linearity,
    unreachable_target,
    negative_resource_input,
    domain_start,
    slot_count,
    invalid_target,
    reference,
    binding,
    pool_capacity,
  };
  Kind kind;
  std::string function;
  std::string message;
  std::optional<double> witness;
};

inline const char* to_string(Violation::Kind k) {
  switch (k) {
    case Violation::Kind::monotonicity: return "MonotonicityViolation";
    case Violation::Kind::piecewise_linearity: return "PiecewiseLinearityViolation";
    case Violation::Kind::unreachable_target: return "UnreachableTarget";
    case Violation::Kind::negative_resource_input: return "NegativeResourceInput";
    case Violation::Kind::domain_start: return "DomainStartViolation";
    case Violation::Kind::slot_count: return "SlotCountMismatch";
    case Violation::Kind::invalid_target: return "InvalidTarget";
    case Violation::Kind::reference: return "UnresolvedReference";
    case Violation::Kind::binding: return "BindingError";
    case Violation::Kind::pool_capacity: return "PoolOvercommitted";
  }
  return "Violation";
}

// First point where f < 0 beyond tolerance, or nullopt.
inline std::optional<double> negativity_witness(const PiecewiseFn& f) {
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Polynomial& p = f.piece(i);
    const double a = f.breakpoint(i), w = f.piece_width(i);
    std::vector<double> cand{0.0};
    if (std::isfinite(w)) cand.push_back(w * (1.0 - 1e-12));
    if (!p.is_constant())
      for (double r : real_roots(p.derivative(), 0.0, w)) cand.push_back(r);
    for (double u : cand)
      if (p(u) < -tolerance() * std::max(1.0, std::abs(p(0.0)))) return a + u;
    if (!std::isfinite(w) && !p.is_constant() && p.coeffs().back() < 0.0) {
      double far = 1.0;
      for (double r : real_roots(p, 0.0, kInf)) far = std::max(far, r + 1.0);
      return a + far;
    }
  }
  return std::nullopt;
}

namespace detail {

inline void check_monotone(std::vector<Violation>& out, const std::string& what, const PiecewiseFn& f) {
  if (auto w = monotonicity_violation(f))
    out.push_back({Violation::Kind::monotonicity, what, what + " is not non-decreasing", *w});
}

inline void check_start(std::vector<Violation>& out, const std::string& what, const PiecewiseFn& f) {
  if (f.start() != 0.0)
    out.push_back({Violation::Kind::domain_start, what, what + " must start at 0", f.start()});
}

}  // namespace detail

// Structural checks on a process and its context. Never throws for
// well-formed functions; an empty result means the pair is solvable.
inline std::vector<Violation> validate(const Process& proc, const ExecutionContext* ctx = nullptr) {
  std::vector<Violation> out;
  const std::string& pn = proc.name;

  for (const auto& d : proc.data_requirements) {
    const std::string what = pn + ".data_requirements." + d.name;
    detail::check_start(out, what, d.fn);
    detail::check_monotone(out, what, d.fn);
    if (d.fn.eval(d.fn.start()) < -tolerance())
      out.push_back({Violation::Kind::monotonicity, what, what + " is negative at 0", d.fn.start()});
  }
  for (const auto& r : proc.resource_requirements) {
    const std::string what = pn + ".resource_requirements." + r.name;
    detail::check_start(out, what, r.fn);
    detail::check_monotone(out, what, r.fn);
    for (std::size_t i = 0; i < r.fn.size(); ++i)
      if (r.fn.piece(i).degree() > 1) {
        out.push_back({Violation::Kind::piecewise_linearity, what,
                       what + " must be piecewise-linear (piece of degree " +
                           std::to_string(r.fn.piece(i).degree()) + ")",
                       r.fn.breakpoint(i)});
        break;
      }
  }
  if (proc.outputs.empty())
    out.push_back({Violation::Kind::slot_count, pn + ".outputs", "a process needs at least one output", {}});
  for (const auto& o : proc.outputs) {
    const std::string what = pn + ".outputs." + o.name;
    detail::check_start(out, what, o.fn);
    detail::check_monotone(out, what, o.fn);
  }

  std::optional<double> target;
  try {
    target = proc.target();
  } catch (const Error& e) {
    out.push_back({Violation::Kind::invalid_target, pn + ".target_progress", e.what(), {}});
  }
  if (target && !(*target > 0.0))
    out.push_back({Violation::Kind::invalid_target, pn + ".target_progress", "target_progress must be positive",
                   *target});
  if (target)
    for (const auto& d : proc.data_requirements) {
      const double sup = supremum(d.fn);
      if (sup < *target - abs_tol(sup, *target))
        out.push_back({Violation::Kind::unreachable_target, pn + ".data_requirements." + d.name,
                       "target_progress " + std::to_string(*target) + " exceeds the requirement's maximum " +
                           std::to_string(sup),
                       sup});
    }

  if (ctx) {
    if (ctx->data_inputs.size() != proc.data_requirements.size())
      out.push_back({Violation::Kind::slot_count, pn + ".data_inputs",
                     "expected " + std::to_string(proc.data_requirements.size()) + " data inputs, got " +
                         std::to_string(ctx->data_inputs.size()),
                     {}});
    if (ctx->resource_inputs.size() != proc.resource_requirements.size())
      out.push_back({Violation::Kind::slot_count, pn + ".resource_inputs",
                     "expected " + std::to_string(proc.resource_requirements.size()) + " resource inputs, got " +
                         std::to_string(ctx->resource_inputs.size()),
                     {}});
    for (std::size_t k = 0; k < ctx->data_inputs.size(); ++k) {
      const std::string what = pn + ".data_inputs[" + std::to_string(k) + "]";
      detail::check_start(out, what, ctx->data_inputs[k]);
      detail::check_monotone(out, what, ctx->data_inputs[k]);
    }
    for (std::size_t l = 0; l < ctx->resource_inputs.size(); ++l) {
      const std::string what = pn + ".resource_inputs[" + std::to_string(l) + "]";
      detail::check_start(out, what, ctx->resource_inputs[l]);
      if (auto w = negativity_witness(ctx->resource_inputs[l]))
        out.push_back({Violation::Kind::negative_resource_input, what, what + " is negative", *w});
    }
    if (!(ctx->start_time >= 0.0) || !std::isfinite(ctx->start_time))
      out.push_back({Violation::Kind::domain_start, pn + ".start_time", "start_time must be finite and >= 0",
                     ctx->start_time});
  }
  return out;
}

inline std::vector<Violation> validate(const Process& proc, const ExecutionContext& ctx) { return validate(proc, &ctx); }

// Canonical requirement shapes.
namespace canonical {

// Progress proportional to input (or resource proportional to progress).
inline PiecewiseFn stream(double slope) {
  if (!(slope > 0.0)) throw InvalidParameter("stream slope must be positive");
  return PiecewiseFn::linear(slope);
}

// No progress until `input_total` has arrived, then `target` at once.
inline PiecewiseFn burst(double input_total, double target) {
  if (!(input_total > 0.0)) throw InvalidParameter("burst threshold must be positive");
  if (!(target > 0.0)) throw InvalidParameter("burst target must be positive");
  return PiecewiseFn({0.0, input_total}, {Polynomial::constant(0.0), Polynomial::constant(target)});
}

// Stream capped at `total` input (progress saturates at slope * total).
inline PiecewiseFn stream_until(double slope, double total) {
  if (!(slope > 0.0) || !(total > 0.0)) throw InvalidParameter("stream slope and total must be positive");
  return PiecewiseFn({0.0, total}, {Polynomial::linear(0.0, slope)}, Extension::hold);
}

// Entire resource amount needed before any progress.
inline PiecewiseFn resource_burst(double total) {
  if (!(total > 0.0)) throw InvalidParameter("resource burst total must be positive");
  return PiecewiseFn::constant(total);
}

inline DataRequirement data_stream(std::string name, double slope) { return {std::move(name), stream(slope)}; }
inline DataRequirement data_burst(std::string name, double input_total, double target) {
  return {std::move(name), burst(input_total, target)};
}
inline ResourceRequirement resource_stream(std::string name, double slope) {
  return {std::move(name), stream(slope)};
}
inline ResourceRequirement resource_burst(std::string name, double total) {
  return {std::move(name), resource_burst(total)};
}

}  // namespace canonical

}  // namespace bottlemod
