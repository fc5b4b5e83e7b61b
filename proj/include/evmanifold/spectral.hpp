#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "evmanifold/errors.hpp"
#include "evmanifold/optimize.hpp"
#include "evmanifold/quadrature.hpp"
#include "evmanifold/rng.hpp"
#include "evmanifold/special.hpp"

namespace evmanifold {

// Logistic-Normal spectral density on [0,1]. The location is pinned at 0:
// that is exactly the condition under which the density has mean 1/2, which a
// spectral measure must satisfy. Only the log-ratio scale sigma is free.
struct LnSpectral {
  double sigma = 1.0;

  void validate() const {
    if (!(sigma > 0.0)) throw data_error("spectral sigma must be positive");
  }
};

// h(w) = exp(-logit(w)^2 / (2 sigma^2)) / (sigma sqrt(2 pi) w (1-w)),
// with the limit value 0 at both endpoints.
inline double ln_density(double w, const LnSpectral& m) {
  m.validate();
  if (w <= 0.0 || w >= 1.0) return 0.0;
  const double v = logit(w);
  return std::exp(-v * v / (2.0 * m.sigma * m.sigma)) / (m.sigma * kSqrt2Pi * w * (1.0 - w));
}

namespace detail {

// Core truncated integral T(c) = int_c^1 w h(w) dw. The substitution
// w = logistic(sigma z) turns it into int_{z_c}^inf logistic(sigma z) phi(z) dz
// with z_c = logit(c)/sigma. For z_c < 0 the reflection
//   T(c) = 1/2 - Phi(z_c) + T(1-c)
// moves the quadrature onto [z_c, 0]-free territory; a single Legendre panel
// over a long interval straddling the origin loses digits otherwise.
inline double tail_weight_from_zc(double zc, double sigma, const GaussQuadRule& gl) {
  const double hi = zc + 12.0;  // phi decays below 1e-31 past 12 sd beyond z_c
  // The logistic factor has a transition layer of width ~1/sigma near the
  // panel's left edge; a split at that scale keeps large sigma resolved.
  const double split = std::min(hi, zc + std::min(6.0, 36.0 / sigma));
  double acc = 0.0;
  const double edges[3] = {zc, split, hi};
  for (int p = 0; p < 2; ++p) {
    if (edges[p + 1] <= edges[p]) continue;
    const double mid = 0.5 * (edges[p] + edges[p + 1]);
    const double hw = 0.5 * (edges[p + 1] - edges[p]);
    double panel = 0.0;
    for (int i = 0; i < gl.count; ++i) {
      const double z = mid + hw * gl.nodes[i];
      panel += gl.weights[i] * logistic(sigma * z) * std::exp(-0.5 * z * z);
    }
    acc += panel * hw;
  }
  return acc / kSqrt2Pi;
}

inline double tail_weight_raw(double c, double sigma, const GaussQuadRule& gl) {
  if (c <= 0.0) return 0.5;
  if (c >= 1.0) return 0.0;
  const double zc = logit(c) / sigma;
  if (zc >= 0.0) return tail_weight_from_zc(zc, sigma, gl);
  return 0.5 - norm_cdf(zc) + tail_weight_from_zc(-zc, sigma, gl);
}

// Same with the log-ratio of the angle supplied directly (logit(c) = lr), so
// extreme angles do not round to 0 or 1 on the way in.
inline double tail_weight_from_logratio(double lr, double sigma, const GaussQuadRule& gl) {
  const double zc = lr / sigma;
  if (zc >= 0.0) return tail_weight_from_zc(zc, sigma, gl);
  return 0.5 - norm_cdf(zc) + tail_weight_from_zc(-zc, sigma, gl);
}

inline double log_tail_weight_from_logratio(double lr, double sigma, const GaussQuadRule& gl) {
  const double t = tail_weight_from_logratio(lr, sigma, gl);
  if (t > 0.0) return std::log(t);
  // Underflowed: T(c) is squeezed between c*Phibar(z_c) and Phibar(z_c);
  // the lower bound is accurate enough for likelihood rejection purposes.
  const double zc = lr / sigma;
  return log_norm_sf(zc) - std::log1p(std::exp(-lr));
}

}  // namespace detail

// int_{wstar}^1 w h(w) dw, the upper tail of the spectral mean. rule.count
// sets the resolution; the truncated integral itself runs on a Legendre panel
// in the Gaussian variable (a Hermite rule cannot see the cut at z_c).
// With check=true the result is verified against a doubled rule.
inline double tail_weight_integral(double wstar, const LnSpectral& m, const GaussQuadRule& rule,
                                   bool check = true) {
  m.validate();
  if (!(wstar >= 0.0 && wstar <= 1.0)) throw data_error("wstar must lie in [0,1]");
  const auto gl = gauss_legendre(rule.count);
  const double val = detail::tail_weight_raw(wstar, m.sigma, *gl);
  if (check) {
    const auto gl2 = gauss_legendre(2 * rule.count);
    const double ref = detail::tail_weight_raw(wstar, m.sigma, *gl2);
    if (std::fabs(val - ref) > 1e-8 * (std::fabs(ref) + 1e-300) + 1e-14) {
      throw numeric_error("tail weight integral failed refinement check at wstar=" +
                          std::to_string(wstar));
    }
  }
  return val;
}

// int_0^1 w h(w) dw as a Gaussian expectation of logistic(sigma z). Must be
// 1/2 for any sigma; kept as a live computation (not a constant) precisely so
// the mean-constraint tests exercise the quadrature. mu_shift is a test hook
// that displaces the underlying normal away from the constrained value 0.
inline double spectral_moment(const LnSpectral& m, const GaussQuadRule& rule,
                              double mu_shift = 0.0, bool check = true) {
  m.validate();
  auto f = [&](double z) { return logistic(m.sigma * z + mu_shift); };
  const double val = gauss_expectation(f, rule);
  if (check) {
    const auto r2 = gauss_hermite(2 * rule.count);
    const double ref = gauss_expectation(f, *r2);
    if (std::fabs(val - ref) > 1e-8 * (std::fabs(ref) + 1e-300)) {
      throw numeric_error("spectral moment failed refinement check");
    }
  }
  return val;
}

// Exponent measure V(x,y) = 2 int max(w/x, (1-w)/y) h(w) dw. The integrand
// switches branch at w* = x/(x+y); splitting there gives
//   V = 2 [ T(w*)/x + T(1-w*)/y ]
// using the symmetry of h about 1/2 for the lower branch.
inline double exponent_integral(double x, double y, const LnSpectral& m,
                                const GaussQuadRule& rule, bool check = true) {
  m.validate();
  if (!(x > 0.0) || !(y > 0.0)) throw data_error("exponent measure requires x,y > 0");
  const auto gl = gauss_legendre(rule.count);
  const double lr = std::log(x) - std::log(y);  // logit(w*) without rounding
  const double val = 2.0 * (detail::tail_weight_from_logratio(lr, m.sigma, *gl) / x +
                            detail::tail_weight_from_logratio(-lr, m.sigma, *gl) / y);
  if (check) {
    const auto gl2 = gauss_legendre(2 * rule.count);
    const double ref = 2.0 * (detail::tail_weight_from_logratio(lr, m.sigma, *gl2) / x +
                              detail::tail_weight_from_logratio(-lr, m.sigma, *gl2) / y);
    if (std::fabs(val - ref) > 1e-8 * (std::fabs(ref) + 1e-300)) {
      throw numeric_error("exponent integral failed refinement check");
    }
  }
  return val;
}

// Conditional CDF of Y given X = x under the semiparametric model:
//   G(y|x) = 2 exp(1/x - V(x,y)) T(w*).
inline double ln_conditional_cdf(double y, double x, const LnSpectral& m,
                                 const GaussQuadRule& rule) {
  m.validate();
  if (!(x > 0.0) || !(y > 0.0)) throw data_error("conditional requires x,y > 0");
  const auto gl = gauss_legendre(rule.count);
  const double lr = std::log(x) - std::log(y);
  const double t1 = detail::tail_weight_from_logratio(lr, m.sigma, *gl);
  const double t2 = detail::tail_weight_from_logratio(-lr, m.sigma, *gl);
  const double v = 2.0 * (t1 / x + t2 / y);
  const double lc = std::log(2.0) + std::log(t1) + 1.0 / x - v;
  return std::min(1.0, std::exp(lc));
}

// Log of the bivariate density g = d2G/dxdy under the semiparametric model.
// Differentiating G = exp(-V) twice gives, with w* = x/(x+y),
//   g = exp(-V) [ 4 T(w*) T(1-w*) / (x y)^2 + 2 h(w*) / (x+y)^3 ].
// Both bracket terms can underflow for extreme angles at small sigma, so the
// sum is assembled in log space.
inline double ln_log_density(double x, double y, const LnSpectral& m,
                             const GaussQuadRule& rule) {
  m.validate();
  if (!(x > 0.0) || !(y > 0.0)) throw data_error("density requires x,y > 0");
  const auto gl = gauss_legendre(rule.count);
  const double lx = std::log(x), ly = std::log(y);
  const double lr = lx - ly;
  const double logr = std::log(x + y);
  const double s = m.sigma;

  // log[ 2 h(w*) / (x+y)^3 ]; uses log w* = lx - logr, log(1-w*) = ly - logr.
  const double la = std::log(2.0) - lr * lr / (2.0 * s * s) - std::log(s) -
                    0.5 * std::log(2.0 * kPi) - lx - ly - logr;
  const double lt1 = detail::log_tail_weight_from_logratio(lr, s, *gl);
  const double lt2 = detail::log_tail_weight_from_logratio(-lr, s, *gl);
  const double lp = std::log(4.0) - 2.0 * (lx + ly) + lt1 + lt2;

  const double t1 = detail::tail_weight_from_logratio(lr, s, *gl);
  const double t2 = detail::tail_weight_from_logratio(-lr, s, *gl);
  const double v = 2.0 * (t1 / x + t2 / y);
  return log_add_exp(la, lp) - v;
}

struct PseudoAngles {
  std::vector<double> w;       // angles x/(x+y), strictly inside (0,1)
  std::vector<double> r;       // radii of retained pairs
  std::vector<double> x, y;    // the retained pairs themselves
  double u = 0.0;              // radius threshold
  std::size_t k = 0;           // exceedance count
};

// Pseudo-angular decomposition: radii r = x + y, angles w = x/r, retaining
// pairs whose radius exceeds the empirical quantile_level of r.
inline PseudoAngles extract_pseudo_angles(const std::vector<double>& x,
                                          const std::vector<double>& y,
                                          double quantile_level = 0.98) {
  if (x.size() != y.size()) throw data_error("pseudo angles need equal-length margins");
  if (!(quantile_level > 0.0 && quantile_level < 1.0)) {
    throw data_error("quantile level must lie in (0,1)");
  }
  const std::size_t n = x.size();
  if (n == 0) throw data_error("pseudo angles of empty sample");
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
      throw data_error("pseudo angles require positive coordinates");
    }
    r[i] = x[i] + y[i];
  }
  std::vector<double> sorted = r;
  std::sort(sorted.begin(), sorted.end());
  long idx = static_cast<long>(std::ceil(quantile_level * n)) - 1;
  idx = std::max(0L, std::min<long>(idx, n - 1));
  const double u = sorted[idx];

  PseudoAngles out;
  out.u = u;
  for (std::size_t i = 0; i < n; ++i) {
    if (r[i] > u) {
      out.w.push_back(x[i] / r[i]);
      out.r.push_back(r[i]);
      out.x.push_back(x[i]);
      out.y.push_back(y[i]);
    }
  }
  out.k = out.w.size();
  if (out.k < 10) {
    throw data_error("only " + std::to_string(out.k) +
                     " exceedances above the radius threshold; need at least 10 "
                     "(lower the threshold level)");
  }
  return out;
}

struct SigmaFit {
  double sigma = 1.0;
  double loglik = 0.0;
};

namespace detail {

inline double ln_nll(const std::vector<double>& x, const std::vector<double>& y,
                     double sigma, const GaussQuadRule& rule) {
  const LnSpectral m{sigma};
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc -= ln_log_density(x[i], y[i], m, rule);
  }
  return acc;
}

// One-off verification that the configured node count resolves the exponent
// integral to the contract tolerance over the data and sigma range in play.
inline void refinement_probe(const std::vector<double>& x, const std::vector<double>& y,
                             double lo, double hi, const GaussQuadRule& rule) {
  const std::size_t n = x.size();
  const std::size_t step = std::max<std::size_t>(1, n / 4);
  for (double sigma : {lo, std::sqrt(lo * hi), hi}) {
    const LnSpectral m{sigma};
    for (std::size_t i = 0; i < n; i += step) {
      exponent_integral(x[i], y[i], m, rule, /*check=*/true);
    }
  }
}

}  // namespace detail

// Maximum likelihood for sigma on paired Frechet-scale observations. The
// likelihood can be multi-modal in sigma, so a coarse 25-point scan over
// log sigma precedes the 1-D refinement.
inline SigmaFit fit_sigma_mle(const std::vector<double>& x, const std::vector<double>& y,
                              const GaussQuadRule& rule,
                              std::pair<double, double> bounds = {0.01, 100.0}) {
  if (x.size() != y.size() || x.empty()) throw data_error("sigma fit needs paired samples");
  if (!(bounds.first > 0.0 && bounds.second > bounds.first)) {
    throw data_error("sigma bounds must satisfy 0 < lo < hi");
  }
  detail::refinement_probe(x, y, bounds.first, bounds.second, rule);

  const double llo = std::log(bounds.first);
  const double lhi = std::log(bounds.second);
  constexpr int grid_n = 25;
  const double step = (lhi - llo) / (grid_n - 1);
  double best_ls = llo;
  double best_nll = std::numeric_limits<double>::infinity();
  double worst_nll = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid_n; ++i) {
    const double ls = llo + i * step;
    const double nll = detail::ln_nll(x, y, std::exp(ls), rule);
    if (nll < best_nll) {
      best_nll = nll;
      best_ls = ls;
    }
    worst_nll = std::max(worst_nll, nll);
  }
  if (!std::isfinite(best_nll)) throw numeric_error("sigma likelihood non-finite on scan grid");
  if (worst_nll - best_nll < 1e-8 * (std::fabs(best_nll) + 1.0)) {
    throw numeric_error("sigma likelihood is flat over the search range (k too small?)");
  }

  const double a = std::max(llo, best_ls - step);
  const double b = std::min(lhi, best_ls + step);
  const double ls_hat = brent_min(
      [&](double ls) { return detail::ln_nll(x, y, std::exp(ls), rule); }, a, b, 1e-8);
  const double nll_hat = detail::ln_nll(x, y, std::exp(ls_hat), rule);
  SigmaFit fit;
  fit.sigma = std::exp(nll_hat <= best_nll ? ls_hat : best_ls);
  fit.loglik = -std::min(nll_hat, best_nll);
  return fit;
}

struct PosteriorBand {
  std::vector<double> draws;   // post-burn-in sigma draws
  std::vector<double> w_grid;
  std::vector<double> h_mean;
  std::vector<double> h_lo;    // pointwise 2.5% envelope of h
  std::vector<double> h_hi;    // pointwise 97.5% envelope
  double accept_rate = 0.0;
  bool accept_rate_ok = true;
};

namespace detail {

inline double quantile_interp(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * (v.size() - 1);
  const std::size_t i = static_cast<std::size_t>(pos);
  if (i + 1 >= v.size()) return v.back();
  const double frac = pos - i;
  return v[i] * (1.0 - frac) + v[i + 1] * frac;
}

}  // namespace detail

// Random-walk Metropolis on log sigma with a Normal(0, 1.5^2) prior and a
// fixed 0.3 proposal step, started at the MLE. The credible band is the
// pointwise 2.5/97.5% envelope of the spectral density over the draws.
inline PosteriorBand sigma_posterior_band(const std::vector<double>& x,
                                          const std::vector<double>& y,
                                          const GaussQuadRule& rule, std::uint64_t seed,
                                          int iters = 10000, int burnin = 4000,
                                          std::vector<double> w_grid = {}) {
  if (iters <= burnin) throw data_error("posterior iterations must exceed burn-in");
  if (w_grid.empty()) {
    for (int i = 0; i <= 200; ++i) w_grid.push_back(i / 200.0);
  }
  const SigmaFit mle = fit_sigma_mle(x, y, rule);

  constexpr double prior_sd = 1.5;
  constexpr double prop_sd = 0.3;
  auto log_post = [&](double ls) {
    return -detail::ln_nll(x, y, std::exp(ls), rule) - ls * ls / (2.0 * prior_sd * prior_sd);
  };

  Rng chain_rng = Rng(seed).stream("sigma-posterior");
  double ls = std::log(mle.sigma);
  double lp = log_post(ls);
  std::size_t accepted = 0;

  PosteriorBand out;
  out.draws.reserve(iters - burnin);
  for (int it = 0; it < iters; ++it) {
    const double prop = ls + prop_sd * chain_rng.normal();
    const double lp_prop = log_post(prop);
    if (std::log(chain_rng.uniform()) < lp_prop - lp) {
      ls = prop;
      lp = lp_prop;
      ++accepted;
    }
    if (it >= burnin) out.draws.push_back(std::exp(ls));
  }
  out.accept_rate = static_cast<double>(accepted) / iters;
  out.accept_rate_ok = out.accept_rate >= 0.1 && out.accept_rate <= 0.6;

  out.w_grid = std::move(w_grid);
  out.h_mean.resize(out.w_grid.size());
  out.h_lo.resize(out.w_grid.size());
  out.h_hi.resize(out.w_grid.size());
  std::vector<double> vals(out.draws.size());
  for (std::size_t j = 0; j < out.w_grid.size(); ++j) {
    double mean = 0.0;
    for (std::size_t d = 0; d < out.draws.size(); ++d) {
      vals[d] = ln_density(out.w_grid[j], LnSpectral{out.draws[d]});
      mean += vals[d];
    }
    out.h_mean[j] = mean / out.draws.size();
    out.h_lo[j] = detail::quantile_interp(vals, 0.025);
    out.h_hi[j] = detail::quantile_interp(vals, 0.975);
  }
  return out;
}

// Moment matching of a two-component Dirichlet onto the Logistic-Normal:
// mu = psi(a1) - psi(a2), sigma^2 = psi'(a1) + psi'(a2).
inline std::pair<double, double> dirichlet_to_ln(double a1, double a2) {
  if (!(a1 > 0.0) || !(a2 > 0.0)) throw data_error("Dirichlet parameters must be positive");
  return {digamma(a1) - digamma(a2), trigamma(a1) + trigamma(a2)};
}

}  // namespace evmanifold
