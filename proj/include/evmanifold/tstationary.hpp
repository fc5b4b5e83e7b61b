#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "evmanifold/errors.hpp"
#include "evmanifold/margins.hpp"
#include "evmanifold/series.hpp"

namespace evmanifold {

// Windows for the transformed-stationary decomposition. The long window w
// tracks the trend and running standard deviation; the short window wsn
// resolves sub-annual variability; l divides w to give the smoothing span.
struct TsConfig {
  double w_years = 5.0;
  double wsn_days = 31.0;
  int l = 2;
  bool extra_smoothing = false;  // optional second smoothing pass

  void validate() const {
    if (!(w_years >= 2.0)) throw data_error("TS window w must be at least 2 years");
    if (!(wsn_days > 0.0 && wsn_days <= 92.0)) {
      throw data_error("TS short window wsn must lie in (0, 92] days");
    }
    if (l < 1) throw data_error("TS smoothing divisor l must be >= 1");
    if (w_years * kDaysPerYear / l < wsn_days) {
      throw data_error("TS windows must satisfy w/l >= wsn");
    }
  }
};

struct TsDecomposition {
  std::vector<double> trend;             // T0_t, data units
  std::array<double, 12> trend_season{}; // s_T by month-of-year, data units
  std::vector<double> std;               // S0_t, data units, strictly positive
  std::array<double, 12> std_season{};   // s_S by month-of-year, dimensionless
  bool season_enabled = true;
  std::vector<int> months;               // month-of-year (0..11) per observation
};

struct TimeVaryingGev {
  std::vector<double> mu_t;
  std::vector<double> sigma_t;
  double xi = 0.0;
};

enum class SeasonMode { automatic, on, off };

namespace detail {

// Running mean of v over the centred day window [t - half, t + half],
// truncated at the series boundaries. Two-pointer sweep, O(n).
inline std::vector<double> running_mean_days(const std::vector<long>& t,
                                             const std::vector<double>& v, double half) {
  const std::size_t n = v.size();
  std::vector<double> out(n);
  std::size_t lo = 0, hi = 0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    while (hi < n && t[hi] <= t[i] + half) acc += v[hi++];
    while (lo < hi && t[lo] < t[i] - half) acc -= v[lo++];
    out[i] = acc / static_cast<double>(hi - lo);
  }
  return out;
}

inline std::vector<int> month_index(const std::vector<long>& times) {
  std::vector<int> m(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) m[i] = month_of(times[i]) - 1;
  return m;
}

}  // namespace detail

// Running mean of the signal over the w-year window; the local level T0_t.
inline std::vector<double> running_trend(const UniSeries& series, const TsConfig& cfg) {
  cfg.validate();
  if (series.span_days() < cfg.w_years * kDaysPerYear) {
    throw data_error("trend window exceeds series span");
  }
  return detail::running_mean_days(series.times, series.values, cfg.w_years * kDaysPerYear / 2.0);
}

// Mean monthly deviation of the detrended signal: the seasonal mean cycle.
inline std::array<double, 12> trend_seasonality(const UniSeries& series,
                                                const std::vector<double>& trend) {
  if (trend.size() != series.size()) throw data_error("trend not aligned with series");
  std::array<double, 12> sum{};
  std::array<long, 12> count{};
  const auto months = detail::month_index(series.times);
  for (std::size_t i = 0; i < series.size(); ++i) {
    sum[months[i]] += series.values[i] - trend[i];
    count[months[i]]++;
  }
  std::array<double, 12> out{};
  for (int m = 0; m < 12; ++m) {
    if (count[m] == 0) {
      throw data_error("no observations in month " + std::to_string(m + 1) +
                       "; disable seasonality for this series");
    }
    out[m] = sum[m] / count[m];
  }
  return out;
}

// Running standard deviation about a given centre: root of the running mean
// of squared deviations over the w window, then smoothed with a running mean
// over w/l. The raw root-mean-square estimate is noisy; the second pass
// trades a little resolution for stability.
inline std::vector<double> running_std(const UniSeries& series,
                                       const std::vector<double>& center,
                                       const TsConfig& cfg) {
  cfg.validate();
  if (center.size() != series.size()) throw data_error("centre not aligned with series");
  const std::size_t n = series.size();
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = series.values[i] - center[i];
    sq[i] = d * d;
  }
  auto rough = detail::running_mean_days(series.times, sq, cfg.w_years * kDaysPerYear / 2.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(rough[i] > 0.0)) throw data_error("zero variance within a window");
    rough[i] = std::sqrt(rough[i]);
  }
  auto smoothed = detail::running_mean_days(series.times, rough,
                                            cfg.w_years * kDaysPerYear / (2.0 * cfg.l));
  if (cfg.extra_smoothing) {
    smoothed = detail::running_mean_days(series.times, smoothed,
                                         cfg.w_years * kDaysPerYear / (2.0 * cfg.l));
  }
  return smoothed;
}

// Seasonal standard-deviation cycle. The short-window estimate S_sn is formed
// on the detrended (trend and seasonal mean removed) series; the monthly
// average of the ratio S_sn/S0 gives the cycle. When the data resolution is
// too coarse for the short window to hold a meaningful sample (monthly data
// with a ~31-day window), the month-of-year bin across all years provides the
// short-scale estimate instead.
inline std::array<double, 12> std_seasonality(const UniSeries& detrended,
                                              const std::vector<double>& s0,
                                              const TsConfig& cfg) {
  cfg.validate();
  if (s0.size() != detrended.size()) throw data_error("std profile not aligned with series");
  const std::size_t n = detrended.size();
  const auto months = detail::month_index(detrended.times);

  std::vector<double> ssn(n, 0.0);
  const double half = cfg.wsn_days / 2.0;
  std::size_t lo = 0, hi = 0;
  double acc = 0.0;
  std::size_t min_count = n;
  for (std::size_t i = 0; i < n; ++i) {
    while (hi < n && detrended.times[hi] <= detrended.times[i] + half) {
      acc += detrended.values[hi] * detrended.values[hi];
      ++hi;
    }
    while (lo < hi && detrended.times[lo] < detrended.times[i] - half) {
      acc -= detrended.values[lo] * detrended.values[lo];
      ++lo;
    }
    ssn[i] = std::sqrt(std::max(0.0, acc / static_cast<double>(hi - lo)));
    min_count = std::min(min_count, hi - lo);
  }

  if (min_count < 3) {
    // Coarse resolution: pool each month-of-year across years.
    std::array<double, 12> sum{};
    std::array<long, 12> count{};
    for (std::size_t i = 0; i < n; ++i) {
      sum[months[i]] += detrended.values[i] * detrended.values[i];
      count[months[i]]++;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const int m = months[i];
      ssn[i] = count[m] > 0 ? std::sqrt(sum[m] / count[m]) : 0.0;
    }
  }

  std::array<double, 12> ratio_sum{};
  std::array<long, 12> count{};
  for (std::size_t i = 0; i < n; ++i) {
    ratio_sum[months[i]] += ssn[i] / s0[i];
    count[months[i]]++;
  }
  std::array<double, 12> out{};
  for (int m = 0; m < 12; ++m) {
    if (count[m] == 0) {
      throw data_error("no observations in month " + std::to_string(m + 1) +
                       "; disable seasonality for this series");
    }
    out[m] = ratio_sum[m] / count[m];
    if (!(out[m] > 0.0)) {
      throw data_error("degenerate seasonal std in month " + std::to_string(m + 1));
    }
  }
  return out;
}

struct StationarizeResult {
  UniSeries x;
  TsDecomposition decomp;
};

// The forward transform: x_t = (y_t - T0_t - s_T[m]) / (S0_t * s_S[m]).
// Seasonal components are estimated on month-of-year bins; for yearly data
// (median spacing near a year or coarser) they are disabled, leaving the
// plain (y - T0)/S0 adjustment.
inline StationarizeResult stationarize(const UniSeries& series, const TsConfig& cfg,
                                       SeasonMode mode = SeasonMode::automatic) {
  cfg.validate();
  series.validate();
  if (series.span_days() < cfg.w_years * kDaysPerYear) {
    throw data_error("series shorter than the trend window");
  }

  TsDecomposition d;
  d.months = detail::month_index(series.times);
  d.season_enabled = mode == SeasonMode::on ||
                     (mode == SeasonMode::automatic && series.median_spacing_days() < 300.0);

  d.trend = running_trend(series, cfg);
  if (d.season_enabled) {
    d.trend_season = trend_seasonality(series, d.trend);
  } else {
    d.trend_season.fill(0.0);
  }

  d.std = running_std(series, d.trend, cfg);

  UniSeries detrended;
  detrended.times = series.times;
  detrended.values.resize(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    detrended.values[i] = series.values[i] - d.trend[i] - d.trend_season[d.months[i]];
  }

  if (d.season_enabled) {
    d.std_season = std_seasonality(detrended, d.std, cfg);
  } else {
    d.std_season.fill(1.0);
  }

  StationarizeResult res;
  res.decomp = std::move(d);
  res.x.times = series.times;
  res.x.values.resize(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& dd = res.decomp;
    res.x.values[i] = detrended.values[i] / (dd.std[i] * dd.std_season[dd.months[i]]);
  }
  return res;
}

// Pointwise inverse of stationarize.
inline UniSeries restore_series(const UniSeries& x, const TsDecomposition& d) {
  if (x.size() != d.trend.size() || x.size() != d.std.size() || x.size() != d.months.size()) {
    throw data_error("decomposition not aligned with series");
  }
  UniSeries y;
  y.times = x.times;
  y.values.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int m = d.months[i];
    y.values[i] = x.values[i] * d.std[i] * d.std_season[m] + d.trend[i] + d.trend_season[m];
  }
  return y;
}

// Maps a GEV fit on the stationarized series into time-varying form. The
// shape is invariant; location and scale pick up the local level and spread.
inline TimeVaryingGev destationarize_gev(const GevParams& p, const TsDecomposition& d) {
  validate(p);
  TimeVaryingGev out;
  out.xi = p.xi;
  const std::size_t n = d.trend.size();
  out.mu_t.resize(n);
  out.sigma_t.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int m = d.months[i];
    const double scale = d.std[i] * d.std_season[m];
    out.sigma_t[i] = scale * p.sigma;
    out.mu_t[i] = scale * p.mu + d.trend[i] + d.trend_season[m];
    if (!(out.sigma_t[i] > 0.0)) throw numeric_error("non-positive time-varying scale");
  }
  return out;
}

}  // namespace evmanifold
