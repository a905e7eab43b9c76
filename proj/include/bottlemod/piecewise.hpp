#pragma once

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bottlemod/polynomial.hpp"
#include "bottlemod/tolerance.hpp"

namespace bottlemod {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Extension { hold, continue_last };

// A function of one real variable made of polynomial pieces.
//
// Piece i covers [x_i, x_{i+1}) and is stored in the local variable (x - x_i);
// the last piece covers [x_n, +inf). Evaluation at a breakpoint uses the piece
// to its right, so jumps are value discontinuities at breakpoints and the left
// limit is available through eval_left(). An optional inclusive upper domain
// bound is used by generalized inverses whose range is bounded.
class PiecewiseFn {
 public:
  PiecewiseFn() : x_{0.0}, p_{Polynomial()} {}

  // breakpoints.size() == pieces.size(): last piece is unbounded.
  // breakpoints.size() == pieces.size() + 1: the final breakpoint ends the
  // given pieces and `ext` decides what happens beyond it.
  PiecewiseFn(std::vector<double> breakpoints, std::vector<Polynomial> pieces, Extension ext = Extension::hold,
              double upper = kInf)
      : x_(std::move(breakpoints)), p_(std::move(pieces)), upper_(upper) {
    if (p_.empty()) throw InvalidParameter("piecewise function needs at least one piece");
    if (x_.size() == p_.size() + 1) {
      const double end = x_.back();
      if (ext == Extension::hold) {
        const std::size_t last = p_.size() - 1;
        p_.push_back(Polynomial::constant(p_[last](end - x_[last])));
      } else {
        x_.pop_back();
      }
    } else if (x_.size() != p_.size()) {
      throw InvalidParameter("breakpoint count must equal piece count (or piece count + 1)");
    }
    for (std::size_t i = 0; i < x_.size(); ++i) {
      if (!std::isfinite(x_[i])) throw InvalidParameter("breakpoints must be finite");
      if (i > 0 && !(x_[i] > x_[i - 1])) throw InvalidParameter("breakpoints must be strictly increasing");
      for (double c : p_[i].coeffs())
        if (!std::isfinite(c)) throw InvalidParameter("coefficients must be finite");
    }
  }

  static PiecewiseFn constant(double v, double x0 = 0.0) { return PiecewiseFn({x0}, {Polynomial::constant(v)}); }
  static PiecewiseFn linear(double slope, double c0 = 0.0, double x0 = 0.0) {
    return PiecewiseFn({x0}, {Polynomial::linear(c0, slope)});
  }
  static PiecewiseFn identity(double x0 = 0.0) { return PiecewiseFn({x0}, {Polynomial::linear(x0, 1.0)}); }

  std::size_t size() const { return x_.size(); }
  double breakpoint(std::size_t i) const { return x_[i]; }
  const std::vector<double>& breakpoints() const { return x_; }
  const Polynomial& piece(std::size_t i) const { return p_[i]; }
  const std::vector<Polynomial>& pieces() const { return p_; }
  double start() const { return x_.front(); }
  double upper() const { return upper_; }
  double piece_end(std::size_t i) const { return i + 1 < x_.size() ? x_[i + 1] : kInf; }
  double piece_width(std::size_t i) const { return piece_end(i) - x_[i]; }

  std::size_t max_degree() const {
    std::size_t d = 0;
    for (const auto& p : p_) d = std::max(d, p.degree());
    return d;
  }
  bool is_piecewise_constant() const {
    return std::all_of(p_.begin(), p_.end(), [](const Polynomial& p) { return p.is_constant(); });
  }

  // Index of the piece used at x (the right piece at breakpoints).
  std::size_t index_at(double x) const {
    check_domain(x);
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    return it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  }

  double operator()(double x) const { return eval(x); }
  double eval(double x) const {
    const std::size_t i = index_at(x);
    return p_[i](std::max(0.0, x - x_[i]));
  }
  // Left limit; undefined at the domain start.
  double eval_left(double x) const {
    if (!(x > x_.front())) throw DomainError("left limit requested at or before the domain start");
    check_domain(x);
    auto it = std::lower_bound(x_.begin(), x_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    return p_[i](x - x_[i]);
  }
  // Value approached from the left at the end of piece i.
  double end_value(std::size_t i) const {
    const double w = piece_width(i);
    return std::isfinite(w) ? p_[i](w) : p_[i](0.0);
  }

  double jump_at(std::size_t i) const { return i == 0 ? 0.0 : p_[i](0.0) - end_value(i - 1); }
  bool has_jump_at(std::size_t i) const {
    if (i == 0) return false;
    const double l = end_value(i - 1), r = p_[i](0.0);
    return std::abs(r - l) > abs_tol(l, r);
  }

  PiecewiseFn derivative() const {
    std::vector<Polynomial> d;
    d.reserve(p_.size());
    for (const auto& p : p_) d.push_back(p.derivative());
    return PiecewiseFn(x_, std::move(d), Extension::continue_last, upper_);
  }

  // Continuous antiderivative with value c0 at the domain start.
  PiecewiseFn antiderivative(double c0 = 0.0) const {
    std::vector<Polynomial> a;
    a.reserve(p_.size());
    double acc = c0;
    for (std::size_t i = 0; i < p_.size(); ++i) {
      a.push_back(p_[i].antiderivative(acc));
      if (i + 1 < p_.size()) acc = a.back()(x_[i + 1] - x_[i]);
    }
    return PiecewiseFn(x_, std::move(a), Extension::continue_last, upper_);
  }

  // Same function with the domain cut to start at `from`.
  PiecewiseFn restricted(double from) const {
    const std::size_t i = index_at(from);
    std::vector<double> xs{from};
    std::vector<Polynomial> ps{p_[i].shifted(from - x_[i])};
    for (std::size_t j = i + 1; j < x_.size(); ++j) {
      xs.push_back(x_[j]);
      ps.push_back(p_[j]);
    }
    return PiecewiseFn(std::move(xs), std::move(ps), Extension::continue_last, upper_);
  }

  PiecewiseFn scaled(double s) const {
    std::vector<Polynomial> ps;
    ps.reserve(p_.size());
    for (const auto& p : p_) ps.push_back(p.scaled(s));
    return PiecewiseFn(x_, std::move(ps), Extension::continue_last, upper_);
  }

  PiecewiseFn with_upper(double upper) const {
    PiecewiseFn r = *this;
    r.upper_ = upper;
    return r;
  }

  // Drops breakpoints where the next piece merely continues the previous one.
  PiecewiseFn simplified() const {
    std::vector<double> xs{x_[0]};
    std::vector<Polynomial> ps{p_[0]};
    for (std::size_t i = 1; i < x_.size(); ++i) {
      const Polynomial cont = ps.back().shifted(x_[i] - xs.back());
      if (same_coeffs(cont, p_[i])) continue;
      xs.push_back(x_[i]);
      ps.push_back(p_[i]);
    }
    return PiecewiseFn(std::move(xs), std::move(ps), Extension::continue_last, upper_);
  }

  friend bool operator==(const PiecewiseFn& a, const PiecewiseFn& b) {
    return a.x_ == b.x_ && a.p_ == b.p_ && a.upper_ == b.upper_;
  }

 private:
  static bool same_coeffs(const Polynomial& a, const Polynomial& b) {
    const std::size_t n = std::max(a.coeffs().size(), b.coeffs().size());
    for (std::size_t k = 0; k < n; ++k) {
      const double u = a[k], v = b[k];
      if (std::abs(u - v) > 1e-12 * std::max({std::abs(u), std::abs(v), 1e-300}) && !(u == 0.0 && v == 0.0))
        return false;
    }
    return true;
  }

  void check_domain(double x) const {
    if (std::isnan(x)) throw DomainError("evaluation at NaN");
    if (x < x_.front()) throw DomainError("evaluation left of the domain start " + std::to_string(x_.front()));
    if (x > upper_ + abs_tol(upper_)) throw DomainError("evaluation beyond the domain end " + std::to_string(upper_));
  }

  std::vector<double> x_;
  std::vector<Polynomial> p_;
  double upper_ = kInf;
};

// A piecewise function whose pieces carry the index set of the source
// functions attaining it (argmin labels).
struct LabeledFn {
  PiecewiseFn fn;
  std::vector<std::vector<int>> labels;

  const std::vector<int>& labels_at(double x) const { return labels[fn.index_at(x)]; }
};

struct MonotoneTag {
  enum class Kind { non_decreasing, none };
  Kind kind = Kind::non_decreasing;
  double tolerance = 0.0;
};

namespace detail {

inline void warn(const std::string& msg) { std::clog << "bottlemod: warning: " << msg << '\n'; }

struct Interval {
  double a;
  double b;
  std::vector<Polynomial> local;  // each source piece expanded at a
  std::vector<std::size_t> index;
};

// Common refinement of several functions on [from, inf).
inline std::vector<Interval> refine(std::span<const PiecewiseFn* const> fs, double from) {
  std::vector<double> pts{from};
  for (const PiecewiseFn* f : fs)
    for (double x : f->breakpoints())
      if (x > from) pts.push_back(x);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  std::vector<Interval> out;
  out.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    Interval iv{pts[i], i + 1 < pts.size() ? pts[i + 1] : kInf, {}, {}};
    for (const PiecewiseFn* f : fs) {
      auto it = std::upper_bound(f->breakpoints().begin(), f->breakpoints().end(), iv.a);
      const std::size_t k = static_cast<std::size_t>(it - f->breakpoints().begin()) - 1;
      iv.index.push_back(k);
      iv.local.push_back(f->piece(k).shifted(iv.a - f->breakpoint(k)));
    }
    out.push_back(std::move(iv));
  }
  return out;
}

inline double common_start(std::span<const PiecewiseFn* const> fs) {
  double s = -kInf;
  for (const PiecewiseFn* f : fs) s = std::max(s, f->start());
  return s;
}

inline double common_upper(std::span<const PiecewiseFn* const> fs) {
  double u = kInf;
  for (const PiecewiseFn* f : fs) u = std::min(u, f->upper());
  return u;
}

template <class Op>
PiecewiseFn binary(const PiecewiseFn& f, const PiecewiseFn& g, Op op) {
  const PiecewiseFn* fs[] = {&f, &g};
  const double from = common_start(fs);
  std::vector<double> xs;
  std::vector<Polynomial> ps;
  for (auto& iv : refine(fs, from)) {
    xs.push_back(iv.a);
    ps.push_back(op(iv.local[0], iv.local[1]));
  }
  return PiecewiseFn(std::move(xs), std::move(ps), Extension::continue_last, common_upper(fs));
}

// A test point inside the local sub-interval [u0, u1).
inline double probe(double u0, double u1, double origin) {
  if (std::isfinite(u1)) return 0.5 * (u0 + u1);
  return u0 + std::max(1.0, std::abs(origin + u0));
}

}  // namespace detail

inline PiecewiseFn add(const PiecewiseFn& f, const PiecewiseFn& g) {
  return detail::binary(f, g, [](const Polynomial& a, const Polynomial& b) { return a + b; });
}
inline PiecewiseFn sub(const PiecewiseFn& f, const PiecewiseFn& g) {
  return detail::binary(f, g, [](const Polynomial& a, const Polynomial& b) { return a - b; });
}
inline PiecewiseFn mul(const PiecewiseFn& f, const PiecewiseFn& g) {
  return detail::binary(f, g, [](const Polynomial& a, const Polynomial& b) { return a * b; });
}
inline PiecewiseFn operator+(const PiecewiseFn& f, const PiecewiseFn& g) { return add(f, g); }
inline PiecewiseFn operator-(const PiecewiseFn& f, const PiecewiseFn& g) { return sub(f, g); }
inline PiecewiseFn operator*(const PiecewiseFn& f, const PiecewiseFn& g) { return mul(f, g); }

inline bool has_jump(const PiecewiseFn& f, double x) {
  const auto& xs = f.breakpoints();
  auto it = std::lower_bound(xs.begin(), xs.end(), x);
  if (it == xs.end() || *it != x) return false;
  return f.has_jump_at(static_cast<std::size_t>(it - xs.begin()));
}

// f / g for piecewise-constant g. Where g is zero the quotient is zero if f is
// zero there too ("no demand"), otherwise DivisionByZero.
inline PiecewiseFn div_by_pwconstant(const PiecewiseFn& f, const PiecewiseFn& g) {
  if (!g.is_piecewise_constant()) throw NotPiecewiseConstant("divisor has a non-constant piece");
  return detail::binary(f, g, [](const Polynomial& a, const Polynomial& b) {
    const double d = b[0];
    if (d == 0.0) {
      const bool zero = std::all_of(a.coeffs().begin(), a.coeffs().end(),
                                    [](double c) { return std::abs(c) <= tolerance(); });
      if (!zero) throw DivisionByZero("division by a zero piece where the dividend is non-zero");
      return Polynomial();
    }
    return a.scaled(1.0 / d);
  });
}

// Section-wise lower envelope with argmin labels. Ties within tolerance are
// reported as multi-element label sets; the lowest index supplies the piece.
inline LabeledFn min_of(std::span<const PiecewiseFn> fs) {
  if (fs.empty()) throw InvalidParameter("min of an empty set");
  std::vector<const PiecewiseFn*> ptrs;
  for (const auto& f : fs) ptrs.push_back(&f);
  const double from = detail::common_start(ptrs);

  LabeledFn out{PiecewiseFn(), {}};
  std::vector<double> xs;
  std::vector<Polynomial> ps;
  std::vector<std::vector<int>> labels;
  // identity of the last emitted piece, for merging
  std::vector<int> last_labels;
  std::size_t last_interval = static_cast<std::size_t>(-1);
  int last_winner = -1;

  const auto intervals = detail::refine(ptrs, from);
  for (std::size_t ii = 0; ii < intervals.size(); ++ii) {
    const auto& iv = intervals[ii];
    const double w = iv.b - iv.a;
    std::vector<double> cuts{0.0};
    for (std::size_t i = 0; i < fs.size(); ++i)
      for (std::size_t j = i + 1; j < fs.size(); ++j)
        for (double r : real_roots(iv.local[i] - iv.local[j], 0.0, w))
          if (r > 0.0 && r < w) cuts.push_back(r);
    std::sort(cuts.begin(), cuts.end());
    cuts.push_back(w);

    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double u0 = cuts[c], u1 = cuts[c + 1];
      if (!(u1 > u0)) continue;
      if (c > 0 && c + 2 < cuts.size() && u1 - u0 <= 1e-13 * std::max(1.0, std::abs(iv.a + u0))) continue;
      const double u = detail::probe(u0, u1, iv.a);
      std::vector<double> v(fs.size());
      double m = kInf;
      for (std::size_t k = 0; k < fs.size(); ++k) {
        v[k] = iv.local[k](u);
        m = std::min(m, v[k]);
      }
      std::vector<int> tie;
      for (std::size_t k = 0; k < fs.size(); ++k)
        if (v[k] - m <= abs_tol(m, v[k])) tie.push_back(static_cast<int>(k));
      const int winner = tie.front();
      if (!xs.empty() && last_interval == ii && last_winner == winner && last_labels == tie) continue;
      xs.push_back(iv.a + u0);
      ps.push_back(iv.local[static_cast<std::size_t>(winner)].shifted(u0));
      labels.push_back(tie);
      last_labels = tie;
      last_interval = ii;
      last_winner = winner;
    }
  }
  // guard against breakpoints collapsing through rounding
  std::vector<double> cx;
  std::vector<Polynomial> cp;
  std::vector<std::vector<int>> cl;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!cx.empty() && !(xs[i] > cx.back())) {
      cp.back() = ps[i];
      cl.back() = labels[i];
      continue;
    }
    cx.push_back(xs[i]);
    cp.push_back(ps[i]);
    cl.push_back(labels[i]);
  }
  out.fn = PiecewiseFn(std::move(cx), std::move(cp), Extension::continue_last, detail::common_upper(ptrs));
  out.labels = std::move(cl);
  return out;
}

inline LabeledFn min_of(std::initializer_list<PiecewiseFn> fs) {
  std::vector<PiecewiseFn> v(fs);
  return min_of(std::span<const PiecewiseFn>(v));
}

// First point x >= after where f is non-decreasing violated, or nullopt.
inline std::optional<double> monotonicity_violation(const PiecewiseFn& f, double slack = -1.0) {
  const double eps = slack >= 0.0 ? slack : tolerance();
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double a = f.breakpoint(i);
    if (i > 0) {
      const double l = f.end_value(i - 1), r = f.piece(i)(0.0);
      if (r < l - eps * std::max({1.0, std::abs(l), std::abs(r)})) return a;
    }
    const Polynomial& p = f.piece(i);
    if (p.is_constant()) continue;
    const Polynomial d = p.derivative();
    const double w = f.piece_width(i);
    std::vector<double> cand{0.0};
    if (std::isfinite(w)) cand.push_back(w);
    for (double r : real_roots(d.derivative(), 0.0, w)) cand.push_back(r);
    for (double u : cand) {
      const double dv = d(u);
      if (dv < -eps * std::max({1.0, std::abs(p(u)), std::abs(dv)})) return a + u;
    }
    if (!std::isfinite(w) && d.degree() >= 1 && d.coeffs().back() < 0.0) {
      double far = 1.0;
      for (double r : real_roots(d, 0.0, kInf)) far = std::max(far, 2.0 * r + 1.0);
      return a + far;
    }
  }
  return std::nullopt;
}

inline bool satisfies(const PiecewiseFn& f, const MonotoneTag& tag) {
  if (tag.kind == MonotoneTag::Kind::none) return true;
  return !monotonicity_violation(f, tag.tolerance > 0.0 ? tag.tolerance : -1.0).has_value();
}

// min{x >= after : f(x) >= level} for non-decreasing f, or nullopt.
inline std::optional<double> first_reach(const PiecewiseFn& f, double level, double after) {
  after = std::max(after, f.start());
  std::size_t i = f.index_at(after);
  for (; i < f.size(); ++i) {
    const double a = f.breakpoint(i);
    const double s = std::max(after, a);
    const Polynomial& p = f.piece(i);
    const double u0 = s - a;
    if (p(u0) >= level) return s;
    const double w = f.piece_width(i);
    for (double r : real_roots(p - Polynomial::constant(level), u0, w))
      if (r >= u0 && r < w) return a + r;
  }
  return std::nullopt;
}

// Result of scanning the ordering state [f > g] to the right of a point.
struct StateScan {
  bool initial = false;             // state on the first sub-interval
  double first_end = kInf;          // end of the first sub-interval
  std::optional<double> change_at;  // first point where the state differs
};

inline StateScan scan_state(const PiecewiseFn& f, const PiecewiseFn& g, double after) {
  const PiecewiseFn* fs[] = {&f, &g};
  const double from = std::max(after, detail::common_start(fs));
  StateScan out;
  bool have_initial = false;
  for (const auto& iv : detail::refine(fs, from)) {
    const double w = iv.b - iv.a;
    const Polynomial d = iv.local[0] - iv.local[1];
    std::vector<double> cuts{0.0};
    for (double r : real_roots(d, 0.0, w))
      if (r > 0.0 && r < w) cuts.push_back(r);
    cuts.push_back(w);
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const double u0 = cuts[c], u1 = cuts[c + 1];
      if (!(u1 > u0)) continue;
      const double u = detail::probe(u0, u1, iv.a);
      const double fv = iv.local[0](u), gv = iv.local[1](u);
      const bool state = fv - gv > abs_tol(fv, gv);
      if (!have_initial) {
        have_initial = true;
        out.initial = state;
        out.first_end = iv.a + u1;
        continue;
      }
      if (state != out.initial) {
        out.change_at = iv.a + u0;
        return out;
      }
    }
  }
  return out;
}

// Smallest x >= after at which the ordering of f and g (f > g versus f <= g)
// changes from what it is just to the right of `after`.
inline std::optional<double> first_crossing(const PiecewiseFn& f, const PiecewiseFn& g, double after) {
  return scan_state(f, g, after).change_at;
}

enum class Side { right, left };

// outer(inner(x)). `inner` must be non-decreasing. With Side::left, the outer
// function is read left-continuously wherever inner rests exactly on one of
// its breakpoints (used with generalized inverses).
inline PiecewiseFn compose(const PiecewiseFn& outer, const PiecewiseFn& inner, Side side = Side::right) {
  if (auto bad = monotonicity_violation(inner))
    throw NotMonotone("inner function of a composition decreases near x=" + std::to_string(*bad));

  std::vector<double> xs;
  std::vector<Polynomial> ps;
  const auto& ob = outer.breakpoints();
  auto outer_index = [&](double v) -> std::size_t {
    if (v < ob.front()) {
      if (ob.front() - v > abs_tol(v, ob.front()))
        throw DomainError("inner range falls below the outer domain start");
      return 0;
    }
    auto it = std::upper_bound(ob.begin(), ob.end(), v);
    std::size_t k = static_cast<std::size_t>(it - ob.begin()) - 1;
    if (side == Side::left && k > 0 && v - ob[k] <= abs_tol(v, ob[k])) --k;
    return k;
  };
  auto emit = [&](double x, Polynomial p) {
    if (!xs.empty() && !(x > xs.back())) {
      ps.back() = std::move(p);
      return;
    }
    xs.push_back(x);
    ps.push_back(std::move(p));
  };

  for (std::size_t j = 0; j < inner.size(); ++j) {
    const double a = inner.breakpoint(j);
    const double w = inner.piece_width(j);
    const Polynomial& r = inner.piece(j);
    double us = 0.0;
    std::size_t k = outer_index(r(0.0));
    while (true) {
      double ue = w;
      if (k + 1 < ob.size()) {
        const double y = ob[k + 1];
        const double rv = r(us);
        // left side: stay on the lower piece only while inner rests on y
        const bool past = side == Side::right ? rv >= y : (rv > y + abs_tol(y) || (rv >= y - abs_tol(y) && !r.is_constant()));
        if (past) {
          ++k;
          continue;
        }
        if (!r.is_constant()) {
          for (double root : real_roots(r - Polynomial::constant(y), us, w)) {
            if (root > us) {
              ue = std::min(ue, root);
              break;
            }
          }
        }
      }
      const Polynomial local_inner = r.shifted(us) - Polynomial::constant(ob[k]);
      const double x = a + us;
      if (!(std::isfinite(ue) && ue - us <= 1e-13 * std::max(1.0, std::abs(x))) || ue >= w)
        emit(x, Polynomial::compose(outer.piece(k), local_inner));
      if (ue >= w) break;
      us = ue;
      ++k;
      if (k >= ob.size()) break;
    }
  }

  PiecewiseFn result(std::move(xs), std::move(ps), Extension::continue_last);
  if (result.max_degree() > 9) detail::warn("composition produced a piece of degree " + std::to_string(result.max_degree()));

  if (std::isfinite(outer.upper())) {
    auto past = first_reach(inner, outer.upper() + abs_tol(outer.upper()), inner.start());
    if (past) {
      if (*past <= inner.start()) throw DomainError("inner range exceeds the outer domain end");
      result = result.with_upper(*past);
    }
  }
  return result;
}

// Left generalized inverse g(y) = min{x : f(x) >= y} of a non-decreasing f.
//
// The result is stored right-continuously, so at its jumps the exact inverse
// value is the left limit (eval_left). Values y <= f(x_0) map to x_0; a
// leading constant piece from min(f(x_0) - 1, 0) makes that representable.
// Linear pieces invert exactly; higher-degree pieces are inverted through 64
// monotone chords each. If f ends on a constant, g's domain ends there.
inline PiecewiseFn generalized_inverse(const PiecewiseFn& f) {
  if (auto bad = monotonicity_violation(f))
    throw NotMonotone("cannot invert: function decreases near x=" + std::to_string(*bad));

  std::vector<double> ys;
  std::vector<Polynomial> ps;
  auto emit = [&](double y, Polynomial p) {
    if (!ys.empty() && !(y > ys.back())) {
      if (y < ys.back()) return;
      ps.back() = std::move(p);
      return;
    }
    ys.push_back(y);
    ps.push_back(std::move(p));
  };

  const double y0 = f.piece(0)(0.0);
  emit(std::min(y0 - 1.0, 0.0), Polynomial::constant(f.start()));
  double reached = y0;  // largest y covered so far
  double upper = kInf;

  for (std::size_t i = 0; i < f.size(); ++i) {
    const double a = f.breakpoint(i);
    const Polynomial& p = f.piece(i);
    const double vs = p(0.0);
    if (vs > reached + abs_tol(vs, reached)) {
      emit(reached, Polynomial::constant(a));  // jump in f -> flat stretch in g
      reached = vs;
    }
    const double w = f.piece_width(i);
    const bool last = i + 1 == f.size();
    const bool flat = p.is_constant() || (std::isfinite(w) && p(w) - vs <= abs_tol(vs, p(w)));
    if (flat) {
      if (last) upper = reached;
      continue;
    }
    if (p.degree() == 1) {
      const double s = p[1];
      emit(std::max(vs, reached), Polynomial::linear(a + (std::max(vs, reached) - vs) / s, 1.0 / s));
      reached = std::isfinite(w) ? p(w) : kInf;
      continue;
    }
    const double span = std::isfinite(w) ? w : std::max(1.0, std::abs(a));
    if (!std::isfinite(w)) {
      // unbounded nonlinear last piece: chords over one span, then the final slope
      detail::warn("inverting a nonlinear unbounded piece; using chords and a tangent tail");
    }
    constexpr int kChords = 64;
    for (int c = 0; c < kChords; ++c) {
      const double u0 = span * c / kChords, u1 = span * (c + 1) / kChords;
      const double v0 = p(u0), v1 = p(u1);
      if (v1 - v0 <= abs_tol(v0, v1)) continue;
      emit(std::max(v0, reached), Polynomial::linear(a + u0 + (std::max(v0, reached) - v0) * (u1 - u0) / (v1 - v0),
                                                     (u1 - u0) / (v1 - v0)));
      reached = v1;
    }
    if (!std::isfinite(w)) {
      const double slope = p.derivative()(span);
      if (slope > 0.0) emit(reached, Polynomial::linear(a + span, 1.0 / slope));
      reached = kInf;
    }
  }
  return PiecewiseFn(std::move(ys), std::move(ps), Extension::continue_last, upper);
}

// base on [x_0, from), patch on [from, inf).
inline PiecewiseFn splice(const PiecewiseFn& base, double from, const PiecewiseFn& patch) {
  if (from < base.start() || from < patch.start()) throw DomainError("splice point outside a domain");
  std::vector<double> xs;
  std::vector<Polynomial> ps;
  for (std::size_t i = 0; i < base.size() && base.breakpoint(i) < from; ++i) {
    xs.push_back(base.breakpoint(i));
    ps.push_back(base.piece(i));
  }
  const PiecewiseFn tail = patch.restricted(from);
  for (std::size_t i = 0; i < tail.size(); ++i) {
    xs.push_back(tail.breakpoint(i));
    ps.push_back(tail.piece(i));
  }
  return PiecewiseFn(std::move(xs), std::move(ps), Extension::continue_last, patch.upper());
}

// Definite integral of f over [a, b].
inline double integral(const PiecewiseFn& f, double a, double b) {
  const PiecewiseFn F = f.antiderivative(0.0);
  return F.eval(b) - F.eval(a);
}

}  // namespace bottlemod
