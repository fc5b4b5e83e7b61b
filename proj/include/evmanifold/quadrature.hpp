#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "evmanifold/errors.hpp"
#include "evmanifold/special.hpp"

namespace evmanifold {

// Gaussian quadrature rule. For the Hermite flavour the weights integrate
// against exp(-x^2) and sum to sqrt(pi); for Legendre they sum to 2.
struct GaussQuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  int count = 0;
};

namespace detail {

// Golub-Welsch via symmetric tridiagonal QL with implicit shifts. Only the
// first component of each eigenvector is carried (vector z), which is all the
// weight formula needs: w_i = mu0 * z_i^2.
inline void tridiag_eigen(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z) {
  const int n = static_cast<int>(d.size());
  e.push_back(0.0);
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= 1e-16 * dd) break;
      }
      if (m != l) {
        if (++iter == 50) throw numeric_error("quadrature eigensolve did not converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0 ? std::fabs(r) : -std::fabs(r)));
        double s = 1.0, c = 1.0, p = 0.0;
        for (int i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          f = z[i + 1];
          z[i + 1] = s * z[i] + c * f;
          z[i] = c * z[i] - s * f;
        }
        if (r == 0.0 && m - 1 >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

inline std::shared_ptr<const GaussQuadRule> make_hermite(int n) {
  std::vector<double> d(n, 0.0);
  std::vector<double> e(n - 1);
  for (int i = 1; i < n; ++i) e[i - 1] = std::sqrt(i / 2.0);
  std::vector<double> z(n, 0.0);
  z[0] = 1.0;
  tridiag_eigen(d, e, z);
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return d[a] < d[b]; });
  auto rule = std::make_shared<GaussQuadRule>();
  rule->count = n;
  rule->nodes.resize(n);
  rule->weights.resize(n);
  const double mu0 = std::sqrt(kPi);
  for (int i = 0; i < n; ++i) {
    rule->nodes[i] = d[idx[i]];
    rule->weights[i] = mu0 * z[idx[i]] * z[idx[i]];
  }
  return rule;
}

// Legendre nodes by Newton iteration on P_n with the Chebyshev initial guess.
inline std::shared_ptr<const GaussQuadRule> make_legendre(int n) {
  auto rule = std::make_shared<GaussQuadRule>();
  rule->count = n;
  rule->nodes.resize(n);
  rule->weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    rule->nodes[i] = -x;
    rule->nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule->weights[i] = w;
    rule->weights[n - 1 - i] = w;
  }
  return rule;
}

template <typename Maker>
inline std::shared_ptr<const GaussQuadRule> cached_rule(int n, Maker make,
                                                        std::map<int, std::shared_ptr<const GaussQuadRule>>& cache,
                                                        std::mutex& mu) {
  if (n < 2) throw numeric_error("quadrature rule needs at least 2 nodes");
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto rule = make(n);
  cache.emplace(n, rule);
  return rule;
}

}  // namespace detail

inline std::shared_ptr<const GaussQuadRule> gauss_hermite(int n) {
  static std::map<int, std::shared_ptr<const GaussQuadRule>> cache;
  static std::mutex mu;
  return detail::cached_rule(n, detail::make_hermite, cache, mu);
}

inline std::shared_ptr<const GaussQuadRule> gauss_legendre(int n) {
  static std::map<int, std::shared_ptr<const GaussQuadRule>> cache;
  static std::mutex mu;
  return detail::cached_rule(n, detail::make_legendre, cache, mu);
}

// integral of f(z) over [a,b] with an n-point Legendre rule.
template <typename F>
inline double integrate_legendre(F&& f, double a, double b, const GaussQuadRule& rule) {
  const double mid = 0.5 * (a + b);
  const double hw = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < rule.count; ++i) {
    acc += rule.weights[i] * f(mid + hw * rule.nodes[i]);
  }
  return acc * hw;
}

// E[f(Z)] for Z standard normal, via Gauss-Hermite (substitution z = sqrt(2)x).
template <typename F>
inline double gauss_expectation(F&& f, const GaussQuadRule& rule) {
  double acc = 0.0;
  for (int i = 0; i < rule.count; ++i) {
    acc += rule.weights[i] * f(kSqrt2 * rule.nodes[i]);
  }
  return acc / std::sqrt(kPi);
}

}  // namespace evmanifold
