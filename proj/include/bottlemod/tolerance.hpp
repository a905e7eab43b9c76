#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

namespace bottlemod {

// Errors ---------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : Error {
  using Error::Error;
};
struct DivisionByZero : Error {
  using Error::Error;
};
struct NotPiecewiseConstant : Error {
  using Error::Error;
};
struct NotMonotone : Error {
  using Error::Error;
};
struct InvalidParameter : Error {
  using Error::Error;
};
struct NoProgress : Error {
  using Error::Error;
};
struct NonTermination : Error {
  using Error::Error;
};
struct StepTooCoarse : Error {
  using Error::Error;
};
struct UnknownParameter : Error {
  using Error::Error;
};
struct SchemaError : Error {
  using Error::Error;
};
struct CyclicDependency : Error {
  CyclicDependency(const std::string& msg, std::vector<std::string> cycle_) : Error(msg), cycle(std::move(cycle_)) {}
  std::vector<std::string> cycle;
};

// Tolerance ------------------------------------------------------------------

namespace detail {
inline std::atomic<double>& tolerance_storage() {
  static std::atomic<double> value{1e-9};
  return value;
}
}  // namespace detail

// Global relative tolerance used for root isolation, monotonicity checks and
// intersection deduplication.
inline double tolerance() { return detail::tolerance_storage().load(std::memory_order_relaxed); }

inline void set_tolerance(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw InvalidParameter("tolerance must be positive and finite");
  detail::tolerance_storage().store(eps, std::memory_order_relaxed);
}

// Reads BOTTLEMOD_TOLERANCE, if set. Returns true when the variable was applied.
inline bool apply_tolerance_from_env() {
  const char* raw = std::getenv("BOTTLEMOD_TOLERANCE");
  if (raw == nullptr || *raw == '\0') return false;
  char* end = nullptr;
  double eps = std::strtod(raw, &end);
  if (end == raw || *end != '\0') throw InvalidParameter(std::string("BOTTLEMOD_TOLERANCE is not a number: ") + raw);
  set_tolerance(eps);
  return true;
}

// Absolute tolerance for comparing quantities of the given magnitudes.
inline double abs_tol(double a, double b = 0.0) {
  return tolerance() * std::max({1.0, std::abs(a), std::abs(b)});
}

inline bool approx_equal(double a, double b) { return std::abs(a - b) <= abs_tol(a, b); }

}  // namespace bottlemod
