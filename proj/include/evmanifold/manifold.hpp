#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "evmanifold/errors.hpp"
#include "evmanifold/evmodels.hpp"
#include "evmanifold/margins.hpp"

namespace evmanifold {

// Regression manifolds: for a dependence model on unit-Frechet margins, the
// conditional quantile y(q | x) traced over a (q, x) grid. Mapping back to
// the data scale goes through the empirical margins.

enum class ManifoldScale { frechet, original };

struct SolverConfig {
  double rel_tol = 1e-10;
  int max_iter = 200;
  double bracket_growth = 4.0;

  void validate() const {
    if (!(rel_tol > 0.0)) throw data_error("solver rel_tol must be positive");
    if (max_iter < 20) throw data_error("solver max_iter must be at least 20");
    if (!(bracket_growth > 1.0)) throw data_error("solver bracket_growth must exceed 1");
  }
};

struct RegressionManifold {
  std::vector<double> q_grid;
  std::vector<double> x_grid;
  std::vector<std::vector<double>> y;  // one row per quantile level
  ManifoldScale scale = ManifoldScale::frechet;
};

inline std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) {
    throw data_error("log-spaced grid needs 0 < lo < hi and n >= 2");
  }
  std::vector<double> g(n);
  const double llo = std::log(lo), lhi = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = std::exp(llo + (lhi - llo) * static_cast<double>(i) / (n - 1.0));
  }
  g.front() = lo;
  g.back() = hi;
  return g;
}

inline std::vector<double> default_q_grid() {
  std::vector<double> q(19);
  for (int i = 0; i < 19; ++i) q[i] = 0.05 * (i + 1);
  return q;
}

inline std::vector<double> default_x_grid() { return log_spaced(0.5, 100.0, 40); }

// Smallest y with conditional_cdf(y | x) >= q. Bracket from [1e-8, 1], grow
// the upper end geometrically until it straddles q, then bisect. Bisection
// tolerates the quadrature noise a derivative-based method would amplify.
// Near-degenerate levels get a wider starting bracket and a looser tolerance;
// fits there are intrinsically less precise.
inline double conditional_quantile(const EvModel& model, double q, double x,
                                   const SolverConfig& cfg = {}) {
  cfg.validate();
  if (!(q > 0.0 && q < 1.0)) throw data_error("quantile level must lie in (0,1)");
  if (!(x > 0.0)) throw data_error("conditioning value must be positive");
  const bool extreme = q < 0.01 || q > 0.99;
  const double tol = extreme ? std::max(cfg.rel_tol, 1e-8) : cfg.rel_tol;
  double lo = extreme ? 1e-12 : 1e-8;
  double hi = extreme ? 10.0 : 1.0;
  const auto F = [&](double yy) { return conditional_cdf(model, yy, x); };
  double flo = F(lo);
  double fhi = F(hi);
  int steps = 0;
  while (flo > q) {
    lo /= cfg.bracket_growth;
    flo = F(lo);
    if (++steps > cfg.max_iter || lo < 1e-290) {
      throw numeric_error("conditional quantile bracket not found below y=" +
                          std::to_string(lo));
    }
  }
  steps = 0;
  while (fhi < q) {
    hi *= cfg.bracket_growth;
    fhi = F(hi);
    if (++steps > cfg.max_iter || hi > 1e290) {
      throw numeric_error("conditional quantile bracket not found above y=" +
                          std::to_string(hi));
    }
  }
  if (flo > fhi + 1e-9) {
    throw numeric_error("conditional CDF decreased across the bracket (non-monotone)");
  }
  for (int it = 0; it < cfg.max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (F(mid) >= q) {
      hi = mid;
    } else {
      lo = mid;
    }
    if (hi - lo <= tol * hi) break;
  }
  return 0.5 * (lo + hi);
}

inline RegressionManifold build_manifold(const EvModel& model,
                                         const std::vector<double>& q_grid,
                                         const std::vector<double>& x_grid,
                                         const SolverConfig& cfg = {}) {
  cfg.validate();
  if (q_grid.empty() || x_grid.empty()) throw data_error("manifold grids must be non-empty");
  if (!std::is_sorted(q_grid.begin(), q_grid.end()) ||
      !std::is_sorted(x_grid.begin(), x_grid.end())) {
    throw data_error("manifold grids must be sorted ascending");
  }
  RegressionManifold m;
  m.q_grid = q_grid;
  m.x_grid = x_grid;
  m.y.assign(q_grid.size(), std::vector<double>(x_grid.size(), 0.0));
  for (std::size_t i = 0; i < q_grid.size(); ++i) {
    for (std::size_t j = 0; j < x_grid.size(); ++j) {
      double v;
      try {
        v = conditional_quantile(model, q_grid[i], x_grid[j], cfg);
      } catch (const std::exception& e) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "manifold cell q=%g x=%g: %s", q_grid[i], x_grid[j],
                      e.what());
        throw numeric_error(buf);
      }
      if (!(v > 0.0) || !std::isfinite(v)) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "manifold cell q=%g x=%g is not positive finite",
                      q_grid[i], x_grid[j]);
        throw numeric_error(buf);
      }
      m.y[i][j] = v;
    }
  }
  for (std::size_t j = 0; j < x_grid.size(); ++j) {
    for (std::size_t i = 1; i < q_grid.size(); ++i) {
      const double slack = 1e-12 * std::max(1.0, std::fabs(m.y[i][j]));
      if (m.y[i][j] < m.y[i - 1][j] - slack) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "quantile ordering violated at x=%g between q=%g and q=%g",
                      x_grid[j], q_grid[i - 1], q_grid[i]);
        throw numeric_error(buf);
      }
    }
  }
  return m;
}

// Closed-form large-x approximation of the logistic regression line,
//   y ~ intercept(alpha, q) + {q^{-1/(1-alpha)} - 1}^{-alpha} x.
// Asymptotic in x; the intercept can go negative under weak dependence.
inline double logistic_approx_line(double alpha, double q, double x) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw data_error("logistic approximation needs alpha strictly inside (0,1)");
  }
  if (!(q > 0.0 && q < 1.0)) throw data_error("quantile level must lie in (0,1)");
  if (!(x > 0.0)) throw data_error("conditioning value must be positive");
  const double r = std::pow(q, 1.0 / (alpha - 1.0)) - 1.0;
  const double slope = std::pow(r, -alpha);
  const double intercept = alpha / (1.0 - alpha) * std::pow(r, -alpha - 1.0) *
                           (std::pow(q, alpha / (1.0 - alpha)) - 1.0) *
                           std::pow(q, 1.0 / (alpha - 1.0));
  return intercept + slope * x;
}

// Pulls a Frechet-scale manifold back to the data scale: each coordinate z
// maps to the empirical quantile of its own margin at exp(-1/z), the inverse
// of the rank transform that produced the Frechet sample.
inline RegressionManifold manifold_to_original_scale(const RegressionManifold& m,
                                                     const std::vector<double>& x_data,
                                                     const std::vector<double>& y_data) {
  if (m.scale == ManifoldScale::original) {
    throw data_error("manifold is already on the original scale");
  }
  if (x_data.empty() || y_data.empty()) {
    throw data_error("original-scale mapping needs non-empty margin samples");
  }
  const EmpiricalCdf fx(x_data);
  const EmpiricalCdf fy(y_data);
  RegressionManifold out = m;
  out.scale = ManifoldScale::original;
  for (auto& xv : out.x_grid) xv = fx.quantile(std::exp(-1.0 / xv));
  for (auto& row : out.y) {
    for (auto& v : row) v = fy.quantile(std::exp(-1.0 / v));
  }
  return out;
}

struct QuantileTable {
  std::vector<double> q_levels;
  std::vector<double> x_levels;  // conditioning levels as supplied
  std::vector<std::vector<double>> y;
  ManifoldScale scale = ManifoldScale::frechet;
};

inline QuantileTable predict_quantile_table(const EvModel& model,
                                            const std::vector<double>& x_levels,
                                            const std::vector<double>& q_levels,
                                            const SolverConfig& cfg = {}) {
  if (x_levels.empty() || q_levels.empty()) {
    throw data_error("quantile table needs non-empty level sets");
  }
  QuantileTable t;
  t.q_levels = q_levels;
  t.x_levels = x_levels;
  t.y.assign(q_levels.size(), std::vector<double>(x_levels.size(), 0.0));
  for (std::size_t i = 0; i < q_levels.size(); ++i) {
    for (std::size_t j = 0; j < x_levels.size(); ++j) {
      t.y[i][j] = conditional_quantile(model, q_levels[i], x_levels[j], cfg);
    }
  }
  return t;
}

// Data-scale variant: covariate levels are values of the raw X margin. Each
// level is pushed through the empirical X CDF onto Frechet scale, and the
// predicted quantiles are pulled back through the empirical Y margin.
inline QuantileTable predict_quantile_table(const EvModel& model,
                                            const std::vector<double>& x_levels,
                                            const std::vector<double>& q_levels,
                                            const std::vector<double>& x_data,
                                            const std::vector<double>& y_data,
                                            const SolverConfig& cfg = {}) {
  if (x_levels.empty() || q_levels.empty()) {
    throw data_error("quantile table needs non-empty level sets");
  }
  if (x_data.empty() || y_data.empty()) {
    throw data_error("data-scale quantile table needs non-empty margin samples");
  }
  const EmpiricalCdf fx(x_data);
  const EmpiricalCdf fy(y_data);
  QuantileTable t;
  t.q_levels = q_levels;
  t.x_levels = x_levels;
  t.scale = ManifoldScale::original;
  t.y.assign(q_levels.size(), std::vector<double>(x_levels.size(), 0.0));
  for (std::size_t j = 0; j < x_levels.size(); ++j) {
    const double p = fx(x_levels[j]);
    if (p <= 0.0) {
      throw data_error("covariate level " + std::to_string(x_levels[j]) +
                       " lies below the observed X range");
    }
    const double xf = -1.0 / std::log(p);
    for (std::size_t i = 0; i < q_levels.size(); ++i) {
      const double yf = conditional_quantile(model, q_levels[i], xf, cfg);
      t.y[i][j] = fy.quantile(std::exp(-1.0 / yf));
    }
  }
  return t;
}

// Aligned plain-text rendering: one column per conditioning level, one row
// per quantile level.
inline std::string format_quantile_table(const QuantileTable& t) {
  std::string out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%10s", "q \\ x");
  out += buf;
  for (double x : t.x_levels) {
    std::snprintf(buf, sizeof buf, " %14.6g", x);
    out += buf;
  }
  out += '\n';
  for (std::size_t i = 0; i < t.q_levels.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%9.4g%%", 100.0 * t.q_levels[i]);
    out += buf;
    for (std::size_t j = 0; j < t.x_levels.size(); ++j) {
      std::snprintf(buf, sizeof buf, " %14.6g", t.y[i][j]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace evmanifold
