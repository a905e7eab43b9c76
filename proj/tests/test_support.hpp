#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "bottlemod/piecewise.hpp"

namespace bottlemod::testing {

inline bool rel_close(double a, double b, double rel = 1e-9, double abs_floor = 1e-9) {
  return std::abs(a - b) <= std::max(abs_floor, rel * std::max(std::abs(a), std::abs(b)));
}

// Random piecewise polynomial on [0, inf) with up to `max_pieces` pieces of
// degree <= max_degree; jumps allowed.
inline PiecewiseFn random_fn(std::mt19937& rng, int max_pieces = 6, int max_degree = 3) {
  std::uniform_int_distribution<int> npieces(1, max_pieces), deg(0, max_degree);
  std::uniform_real_distribution<double> width(0.2, 3.0), coef(-2.0, 2.0);
  const int n = npieces(rng);
  std::vector<double> xs{0.0};
  std::vector<Polynomial> ps;
  for (int i = 0; i < n; ++i) {
    if (i > 0) xs.push_back(xs.back() + width(rng));
    std::vector<double> c(static_cast<std::size_t>(deg(rng)) + 1);
    for (double& x : c) x = coef(rng);
    ps.emplace_back(std::move(c));
  }
  return PiecewiseFn(std::move(xs), std::move(ps), Extension::continue_last);
}

// Random non-decreasing piecewise function: each piece is a non-decreasing
// polynomial of degree <= max_degree (built from non-negative derivative
// coefficients), with optional upward jumps.
inline PiecewiseFn random_monotone(std::mt19937& rng, int max_pieces = 5, int max_degree = 2, bool jumps = true,
                                   bool bounded_last = false) {
  std::uniform_int_distribution<int> npieces(1, max_pieces), deg(0, max_degree);
  std::uniform_real_distribution<double> width(0.3, 3.0), pos(0.0, 2.0), unit(0.0, 1.0);
  const int n = npieces(rng);
  std::vector<double> xs{0.0};
  std::vector<Polynomial> ps;
  double value = pos(rng);
  for (int i = 0; i < n; ++i) {
    if (i > 0) {
      const double w = width(rng);
      value = ps.back()(w);
      xs.push_back(xs.back() + w);
      if (jumps && unit(rng) < 0.3) value += pos(rng);
    }
    int d = deg(rng);
    if (bounded_last && i + 1 == n) d = 0;
    // derivative with non-negative coefficients => non-decreasing on u >= 0
    std::vector<double> dc(static_cast<std::size_t>(std::max(d, 1)));
    for (double& x : dc) x = d == 0 ? 0.0 : pos(rng);
    Polynomial p = Polynomial(dc).antiderivative(value);
    if (d == 0) p = Polynomial::constant(value);
    ps.push_back(p);
  }
  return PiecewiseFn(std::move(xs), std::move(ps), Extension::continue_last);
}

// Sample points: every breakpoint, breakpoint +/- eps, and uniform randoms.
inline std::vector<double> sample_points(std::mt19937& rng, const std::vector<const PiecewiseFn*>& fs, int count,
                                         double lo = 0.0, double hi = 20.0) {
  std::vector<double> pts;
  for (const auto* f : fs)
    for (double x : f->breakpoints()) {
      pts.push_back(x);
      pts.push_back(x + 1e-7);
      if (x - 1e-7 >= lo) pts.push_back(x - 1e-7);
    }
  std::uniform_real_distribution<double> u(lo, hi);
  while (static_cast<int>(pts.size()) < count) pts.push_back(u(rng));
  std::sort(pts.begin(), pts.end());
  return pts;
}

}  // namespace bottlemod::testing
