#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <vector>

namespace bottlemod {

// Dense univariate polynomial, coefficients lowest degree first. Always holds
// at least one coefficient.
class Polynomial {
 public:
  Polynomial() : c_{0.0} {}
  Polynomial(std::initializer_list<double> coeffs) : c_(coeffs) { normalize(); }
  explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) { normalize(); }

  static Polynomial constant(double v) { return Polynomial({v}); }
  static Polynomial linear(double c0, double c1) { return Polynomial({c0, c1}); }

  const std::vector<double>& coeffs() const { return c_; }
  double operator[](std::size_t i) const { return i < c_.size() ? c_[i] : 0.0; }
  std::size_t degree() const { return c_.size() - 1; }
  bool is_constant() const { return c_.size() == 1; }
  bool is_zero() const { return c_.size() == 1 && c_[0] == 0.0; }

  double operator()(double u) const {
    double r = c_.back();
    for (std::size_t i = c_.size() - 1; i-- > 0;) r = r * u + c_[i];
    return r;
  }

  Polynomial derivative() const {
    if (c_.size() == 1) return Polynomial();
    std::vector<double> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * static_cast<double>(i);
    return Polynomial(std::move(d));
  }

  Polynomial antiderivative(double c0 = 0.0) const {
    std::vector<double> a(c_.size() + 1);
    a[0] = c0;
    for (std::size_t i = 0; i < c_.size(); ++i) a[i + 1] = c_[i] / static_cast<double>(i + 1);
    return Polynomial(std::move(a));
  }

  // q(u) = p(u + d)
  Polynomial shifted(double d) const {
    if (d == 0.0 || c_.size() == 1) return *this;
    std::vector<double> a = c_;
    const std::size_t n = a.size() - 1;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = n; j-- > i;) a[j] += d * a[j + 1];
    return Polynomial(std::move(a));
  }

  // q(u) = p(s * u)
  Polynomial stretched(double s) const {
    std::vector<double> a = c_;
    double f = 1.0;
    for (double& x : a) {
      x *= f;
      f *= s;
    }
    return Polynomial(std::move(a));
  }

  Polynomial scaled(double s) const {
    std::vector<double> a = c_;
    for (double& x : a) x *= s;
    return Polynomial(std::move(a));
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) { return combine(a, b, 1.0); }
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return combine(a, b, -1.0); }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    std::vector<double> r(a.c_.size() + b.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(r));
  }

  // outer(inner(u))
  static Polynomial compose(const Polynomial& outer, const Polynomial& inner) {
    Polynomial r = Polynomial::constant(outer.c_.back());
    for (std::size_t i = outer.c_.size() - 1; i-- > 0;) r = r * inner + Polynomial::constant(outer.c_[i]);
    return r;
  }

  friend bool operator==(const Polynomial&, const Polynomial&) = default;

 private:
  static Polynomial combine(const Polynomial& a, const Polynomial& b, double sign) {
    std::vector<double> r(std::max(a.c_.size(), b.c_.size()), 0.0);
    for (std::size_t i = 0; i < r.size(); ++i) {
      double x = a[i];
      double y = sign * b[i];
      double s = x + y;
      // snap cancellation noise so equal functions subtract to exactly zero
      if (std::abs(s) <= 1e-13 * (std::abs(x) + std::abs(y))) s = 0.0;
      r[i] = s;
    }
    return Polynomial(std::move(r));
  }

  void normalize() {
    if (c_.empty()) c_.push_back(0.0);
    while (c_.size() > 1 && c_.back() == 0.0) c_.pop_back();
  }

  std::vector<double> c_;
};

namespace detail {

inline void push_root(std::vector<double>& out, double r, double lo, double hi) {
  if (!std::isfinite(r)) return;
  double slack = 1e-12 * std::max(1.0, std::abs(r));
  if (r < lo - slack || r > hi + slack) return;
  out.push_back(std::clamp(r, lo, hi));
}

inline double bisect(const Polynomial& p, double a, double b, double fa) {
  for (int it = 0; it < 200; ++it) {
    double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    double fm = p(m);
    if (fm == 0.0) return m;
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

// Real roots of p inside [lo, hi] (hi may be +inf), sorted and deduplicated.
// Closed form up to degree 2; above that, roots are isolated between the
// critical points and refined by bisection.
inline std::vector<double> real_roots(const Polynomial& p, double lo, double hi) {
  std::vector<double> out;
  const auto& c = p.coeffs();
  const std::size_t n = p.degree();
  if (n == 0) return out;
  if (n == 1) {
    detail::push_root(out, -c[0] / c[1], lo, hi);
    return out;
  }
  if (n == 2) {
    const double a = c[2], b = c[1], cc = c[0];
    const double disc = b * b - 4.0 * a * cc;
    const double scale = b * b + std::abs(4.0 * a * cc);
    if (disc < 0.0) {
      if (disc >= -1e-12 * scale) detail::push_root(out, -b / (2.0 * a), lo, hi);
    } else {
      const double sq = std::sqrt(disc);
      const double q = -0.5 * (b + std::copysign(sq, b));
      if (q != 0.0) {
        detail::push_root(out, q / a, lo, hi);
        detail::push_root(out, cc / q, lo, hi);
      } else {
        detail::push_root(out, 0.0, lo, hi);
      }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  // Cauchy bound keeps the search finite.
  double bound = 0.0;
  for (std::size_t i = 0; i < n; ++i) bound = std::max(bound, std::abs(c[i] / c[n]));
  bound += 1.0;
  const double a0 = std::max(lo, -bound);
  const double b0 = std::min(hi, bound);
  if (a0 > b0) return out;

  std::vector<double> pts{a0};
  for (double r : real_roots(p.derivative(), a0, b0)) pts.push_back(r);
  pts.push_back(b0);

  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double a = pts[i], b = pts[i + 1];
    const double fa = p(a), fb = p(b);
    if (fa == 0.0) {
      out.push_back(a);
      continue;
    }
    if (i > 0) {
      // tangential root at a critical point
      double mag = 0.0, x = 1.0;
      for (double ci : c) {
        mag += std::abs(ci) * x;
        x *= std::abs(a);
      }
      if (std::abs(fa) <= 1e-12 * mag) {
        out.push_back(a);
        continue;
      }
    }
    if (b > a && (fa < 0.0) != (fb < 0.0) && fb != 0.0) out.push_back(detail::bisect(p, a, b, fa));
  }
  if (p(b0) == 0.0) out.push_back(b0);
  std::sort(out.begin(), out.end());
  std::vector<double> dedup;
  for (double r : out)
    if (dedup.empty() || r - dedup.back() > 1e-14 * std::max(1.0, std::abs(r))) dedup.push_back(r);
  return dedup;
}

}  // namespace bottlemod
