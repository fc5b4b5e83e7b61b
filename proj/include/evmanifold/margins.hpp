#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "evmanifold/errors.hpp"
#include "evmanifold/optimize.hpp"
#include "evmanifold/series.hpp"
#include "evmanifold/special.hpp"

namespace evmanifold {

// Shape values with |xi| below this band are evaluated with the exact Gumbel
// formulas; the general expressions lose all precision as xi -> 0.
constexpr double kGumbelBand = 1e-8;

struct GevParams {
  double mu = 0.0;
  double sigma = 1.0;
  double xi = 0.0;
};

inline void validate(const GevParams& p) {
  if (!(p.sigma > 0.0)) throw data_error("GEV scale must be positive");
}

// 1 + xi*(x-mu)/sigma, the quantity whose positivity defines the support.
inline double gev_support_term(double x, const GevParams& p) {
  return 1.0 + p.xi * (x - p.mu) / p.sigma;
}

inline double gev_cdf(double x, const GevParams& p) {
  validate(p);
  const double z = (x - p.mu) / p.sigma;
  if (std::fabs(p.xi) < kGumbelBand) {
    return std::exp(-std::exp(-z));
  }
  const double t = 1.0 + p.xi * z;
  if (t <= 0.0) {
    // Below the lower endpoint the CDF is exactly 0; above the upper it is 1.
    if (p.xi > 0.0) return 0.0;
    return 1.0;
  }
  return std::exp(-std::pow(t, -1.0 / p.xi));
}

inline double gev_quantile(double q, const GevParams& p) {
  validate(p);
  if (!(q > 0.0 && q < 1.0)) throw data_error("quantile level must lie in (0,1)");
  const double w = -std::log(q);  // exponential transform of the level
  if (std::fabs(p.xi) < kGumbelBand) {
    return p.mu - p.sigma * std::log(w);
  }
  return p.mu + p.sigma * std::expm1(-p.xi * std::log(w)) / p.xi;
}

inline double gev_logpdf(double x, const GevParams& p) {
  validate(p);
  const double z = (x - p.mu) / p.sigma;
  if (std::fabs(p.xi) < kGumbelBand) {
    return -std::log(p.sigma) - z - std::exp(-z);
  }
  const double t = 1.0 + p.xi * z;
  if (t <= 0.0) throw data_error("point outside GEV support");
  const double logt = std::log(t);
  return -std::log(p.sigma) - (1.0 + 1.0 / p.xi) * logt - std::exp(-logt / p.xi);
}

namespace detail {

// Probability-weighted-moment starting values (Hosking, Wallis & Wood). Only
// used to seed the simplex; final estimates come from the likelihood.
inline GevParams gev_pwm_start(std::vector<double> sorted) {
  const std::size_t n = sorted.size();
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double x = sorted[j];
    b0 += x;
    b1 += x * j / (n - 1.0);
    b2 += x * j * (j - 1.0) / ((n - 1.0) * (n - 2.0));
  }
  b0 /= n;
  b1 /= n;
  b2 /= n;
  const double c = (2.0 * b1 - b0) / (3.0 * b2 - b0) - std::log(2.0) / std::log(3.0);
  double k = 7.8590 * c + 2.9554 * c * c;
  if (std::fabs(k) < 1e-6) k = 1e-6;
  const double g = std::tgamma(1.0 + k);
  double sigma = (2.0 * b1 - b0) * k / (g * (1.0 - std::pow(2.0, -k)));
  double mu = b0 + sigma * (g - 1.0) / k;
  GevParams p{mu, sigma, -k};
  if (!(p.sigma > 0.0) || !std::isfinite(p.sigma) || !std::isfinite(p.mu) ||
      !std::isfinite(p.xi)) {
    // Heavy-tailed or degenerate moments; fall back to order statistics.
    const double med = sorted[n / 2];
    const double q25 = sorted[n / 4];
    const double q75 = sorted[(3 * n) / 4];
    p = GevParams{med, std::max(1e-8, (q75 - q25) / 1.35), 0.1};
  }
  return p;
}

}  // namespace detail

// Maximum-likelihood GEV fit: simplex search over (mu, log sigma, xi) from a
// probability-weighted-moment start. A second start with a heavy-tail shape
// guards against the PWM moments being meaningless when the true shape is
// near or above 1 (infinite mean).
inline GevParams fit_gev(const std::vector<double>& maxima) {
  if (maxima.size() < 10) throw data_error("fit_gev needs at least 10 observations");
  std::vector<double> sorted = maxima;
  std::sort(sorted.begin(), sorted.end());
  for (double v : sorted) {
    if (!std::isfinite(v)) throw data_error("fit_gev: non-finite observation");
  }
  if (sorted.front() == sorted.back()) throw data_error("degenerate input: all values equal");

  auto nll = [&](const std::vector<double>& theta) {
    const GevParams p{theta[0], std::exp(theta[1]), theta[2]};
    if (!(p.sigma > 0.0) || !std::isfinite(p.sigma) || std::fabs(p.xi) > 5.0) {
      return std::numeric_limits<double>::infinity();
    }
    double acc = 0.0;
    for (double x : maxima) {
      if (std::fabs(p.xi) >= kGumbelBand && gev_support_term(x, p) <= 0.0) {
        return std::numeric_limits<double>::infinity();
      }
      acc -= gev_logpdf(x, p);
    }
    return std::isfinite(acc) ? acc : std::numeric_limits<double>::infinity();
  };

  const GevParams pwm = detail::gev_pwm_start(sorted);
  const double med = sorted[sorted.size() / 2];
  const double spread = std::max(1e-8, (sorted[(3 * sorted.size()) / 4] -
                                        sorted[sorted.size() / 4]) / 1.35);
  const std::vector<std::vector<double>> starts = {
      {pwm.mu, std::log(pwm.sigma), pwm.xi},
      {med, std::log(spread), 0.5},
  };

  NelderMeadResult best;
  best.fmin = std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    if (!std::isfinite(nll(s))) continue;
    auto r = nelder_mead(nll, s, 0.2, 3000, 1e-12);
    if (r.fmin < best.fmin) best = r;
  }
  if (!std::isfinite(best.fmin)) throw numeric_error("fit_gev: no feasible starting point");
  if (!best.converged) throw numeric_error("fit_gev: simplex did not converge");
  return GevParams{best.x[0], std::exp(best.x[1]), best.x[2]};
}

enum class Block { month, year };

// One maximum per calendar block, stamped at the block centre. A leading or
// trailing block holding under half the typical observation count is treated
// as a stub and dropped; interior blocks are kept regardless.
inline UniSeries block_maxima(const UniSeries& series, Block block) {
  if (series.size() == 0) throw data_error("block_maxima: empty series");
  struct Bin {
    long key;
    double max;
    std::size_t count;
  };
  std::vector<Bin> bins;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const Date d = serial_to_civil(series.times[i]);
    const long key = block == Block::year ? d.year : d.year * 12L + (d.month - 1);
    if (bins.empty() || bins.back().key != key) {
      bins.push_back({key, series.values[i], 1});
    } else {
      bins.back().max = std::max(bins.back().max, series.values[i]);
      bins.back().count++;
    }
  }
  if (bins.size() < 2) throw data_error("block_maxima: series spans fewer than 2 blocks");

  std::size_t nominal = 0;
  for (const auto& b : bins) nominal = std::max(nominal, b.count);
  auto is_stub = [&](const Bin& b) { return 2 * b.count < nominal; };
  std::size_t first = 0, last = bins.size();
  if (is_stub(bins[first])) ++first;
  if (last > first && is_stub(bins[last - 1])) --last;

  UniSeries out;
  for (std::size_t i = first; i < last; ++i) {
    const long key = bins[i].key;
    long center;
    if (block == Block::year) {
      center = civil_to_serial(static_cast<int>(key), 7, 1);
    } else {
      center = civil_to_serial(static_cast<int>(key / 12), static_cast<int>(key % 12) + 1, 15);
    }
    out.times.push_back(center);
    out.values.push_back(bins[i].max);
  }
  if (out.size() < 2) throw data_error("block_maxima: fewer than 2 complete blocks");
  return out;
}

// Empirical CDF with the n+1 normalization: F(x) = #{data_i <= x}/(n+1).
// Ties count with the <= convention, so duplicated values share the max rank.
class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::vector<double> data) : sorted_(std::move(data)) {
    if (sorted_.empty()) throw data_error("empirical CDF of empty sample");
    std::sort(sorted_.begin(), sorted_.end());
  }

  double operator()(double x) const {
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
    return static_cast<double>(it - sorted_.begin()) / (sorted_.size() + 1.0);
  }

  std::size_t size() const { return sorted_.size(); }

  // Step quantile function (inverse of the rank transform): the smallest
  // order statistic whose index covers probability p.
  double quantile(double p) const {
    const double np = p * sorted_.size();
    long idx = static_cast<long>(std::ceil(np)) - 1;
    idx = std::max(0L, std::min<long>(idx, sorted_.size() - 1));
    return sorted_[idx];
  }

 private:
  std::vector<double> sorted_;
};

struct FrechetSample {
  std::vector<double> values;      // unit-Frechet scale, all > 0
  std::vector<long> source_ranks;  // max-rank of each source point, 1..n
};

// Rank transform onto the unit-Frechet scale: z_i = -1/log(rank_i/(n+1)).
inline FrechetSample to_unit_frechet(const std::vector<double>& data) {
  const std::size_t n = data.size();
  if (n < 2) throw data_error("to_unit_frechet needs at least 2 points");
  std::vector<double> sorted = data;
  std::sort(sorted.begin(), sorted.end());
  FrechetSample out;
  out.values.resize(n);
  out.source_ranks.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const long rank = std::upper_bound(sorted.begin(), sorted.end(), data[i]) - sorted.begin();
    out.source_ranks[i] = rank;
    out.values[i] = -1.0 / std::log(rank / (n + 1.0));
  }
  return out;
}

}  // namespace evmanifold
