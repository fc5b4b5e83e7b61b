#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "evmanifold/errors.hpp"

namespace evmanifold {

struct NelderMeadResult {
  std::vector<double> x;
  double fmin = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Derivative-free simplex minimizer (standard reflection/expansion/contraction
// coefficients). Good enough for the 3-parameter likelihood surfaces here;
// callers encode constraints by returning +inf outside the feasible set.
template <typename F>
inline NelderMeadResult nelder_mead(F&& f, std::vector<double> x0, double step,
                                    int max_iter = 2000, double ftol = 1e-10) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> simplex(n + 1, x0);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += step;
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i <= n; ++i) fv[i] = f(simplex[i]);

  NelderMeadResult res;
  for (int iter = 0; iter < max_iter; ++iter) {
    std::vector<std::size_t> ord(n + 1);
    std::iota(ord.begin(), ord.end(), 0u);
    std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = ord[0], worst = ord[n], second = ord[n - 1];

    if (std::fabs(fv[worst] - fv[best]) <=
        ftol * (std::fabs(fv[best]) + std::fabs(fv[worst]) + 1e-300)) {
      res.x = simplex[best];
      res.fmin = fv[best];
      res.iterations = iter;
      res.converged = true;
      return res;
    }

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k];
    }
    for (std::size_t k = 0; k < n; ++k) centroid[k] /= n;

    auto blend = [&](double coef) {
      std::vector<double> p(n);
      for (std::size_t k = 0; k < n; ++k) {
        p[k] = centroid[k] + coef * (simplex[worst][k] - centroid[k]);
      }
      return p;
    };

    auto reflected = blend(-1.0);
    const double fr = f(reflected);
    if (fr < fv[best]) {
      auto expanded = blend(-2.0);
      const double fe = f(expanded);
      if (fe < fr) {
        simplex[worst] = std::move(expanded);
        fv[worst] = fe;
      } else {
        simplex[worst] = std::move(reflected);
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      simplex[worst] = std::move(reflected);
      fv[worst] = fr;
    } else {
      auto contracted = blend(0.5);
      const double fc = f(contracted);
      if (fc < fv[worst]) {
        simplex[worst] = std::move(contracted);
        fv[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == best) continue;
          for (std::size_t k = 0; k < n; ++k) {
            simplex[i][k] = 0.5 * (simplex[i][k] + simplex[best][k]);
          }
          fv[i] = f(simplex[i]);
        }
      }
    }
  }
  std::vector<std::size_t> ord(n + 1);
  std::iota(ord.begin(), ord.end(), 0u);
  std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
  res.x = simplex[ord[0]];
  res.fmin = fv[ord[0]];
  res.iterations = max_iter;
  res.converged = false;
  return res;
}

// Brent's 1-D minimizer on [a,b] (golden section with parabolic steps).
template <typename F>
inline double brent_min(F&& f, double a, double b, double xtol = 1e-9, int max_iter = 200) {
  constexpr double golden = 0.3819660112501051;
  double x = a + golden * (b - a);
  double w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  for (int iter = 0; iter < max_iter; ++iter) {
    const double mid = 0.5 * (a + b);
    const double tol1 = xtol * std::fabs(x) + 1e-12;
    const double tol2 = 2.0 * tol1;
    if (std::fabs(x - mid) <= tol2 - 0.5 * (b - a)) return x;
    bool parabolic = false;
    if (std::fabs(e) > tol1) {
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::fabs(q);
      if (std::fabs(p) < std::fabs(0.5 * q * e) && p > q * (a - x) && p < q * (b - x)) {
        e = d;
        d = p / q;
        parabolic = true;
      }
    }
    if (!parabolic) {
      e = (x < mid) ? b - x : a - x;
      d = golden * e;
    }
    const double u = (std::fabs(d) >= tol1) ? x + d : x + (d > 0 ? tol1 : -tol1);
    const double fu = f(u);
    if (fu <= fx) {
      if (u < x) b = x; else a = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return x;
}

struct BracketConfig {
  double rel_tol = 1e-10;
  int max_iter = 200;
  double bracket_growth = 4.0;
};

// Smallest y > 0 with F(y) >= q for a non-decreasing CDF F. Brackets by
// geometric expansion from [lo0, hi0], then bisects; immune to the ~1e-10
// quadrature noise that plagues derivative-based root finding on these CDFs.
template <typename F>
inline double invert_monotone_cdf(F&& cdf, double q, const BracketConfig& cfg,
                                  double lo0 = 1e-8, double hi0 = 1.0) {
  double lo = lo0, hi = hi0;
  double flo = cdf(lo);
  double fhi = cdf(hi);
  int grow = 0;
  while (flo > q && lo > 1e-280) {
    hi = lo;
    fhi = flo;
    lo /= cfg.bracket_growth;
    flo = cdf(lo);
    if (++grow > cfg.max_iter) throw numeric_error("lower bracket not found");
  }
  grow = 0;
  while (fhi < q) {
    lo = hi;
    flo = fhi;
    hi *= cfg.bracket_growth;
    fhi = cdf(hi);
    if (++grow > cfg.max_iter) {
      throw numeric_error("upper bracket not found (q=" + std::to_string(q) + ")");
    }
  }
  if (flo > fhi + 1e-9) throw numeric_error("conditional CDF is not monotone");
  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if ((hi - lo) <= cfg.rel_tol * mid) return mid;
    if (cdf(mid) >= q) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace evmanifold
