#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "evmanifold/evmodels.hpp"
#include "evmanifold/rng.hpp"
#include "evmanifold/tstationary.hpp"

using namespace evmanifold;
using Catch::Matchers::WithinAbs;

namespace {

UniSeries monthly_series(int n, int start_year, std::uint64_t seed,
                         double trend_per_length = 0.0, double noise_sd = 1.0) {
  UniSeries s;
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    s.times.push_back(civil_to_serial(start_year + i / 12, i % 12 + 1, 15));
    s.values.push_back(trend_per_length * i / (n - 1.0) + noise_sd * rng.normal());
  }
  return s;
}

double ols_rise(const std::vector<double>& v) {
  const std::size_t n = v.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / (n - 1.0);
    sx += x;
    sy += v[i];
    sxx += x * x;
    sxy += x * v[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("config validation", "[ts]") {
  REQUIRE_NOTHROW(TsConfig{}.validate());
  TsConfig c;
  c.w_years = 1.0;
  REQUIRE_THROWS_AS(c.validate(), data_error);
  c = TsConfig{};
  c.wsn_days = 0.0;
  REQUIRE_THROWS_AS(c.validate(), data_error);
  c = TsConfig{};
  c.wsn_days = 200.0;
  REQUIRE_THROWS_AS(c.validate(), data_error);
  c = TsConfig{};
  c.l = 0;
  REQUIRE_THROWS_AS(c.validate(), data_error);
  c = TsConfig{};
  c.w_years = 2.0;
  c.l = 30;  // w/l collapses below the seasonal window
  REQUIRE_THROWS_AS(c.validate(), data_error);
}

TEST_CASE("stationarize rejects a series shorter than the window", "[ts]") {
  const UniSeries s = monthly_series(36, 2000, 1);  // 3 years < default 5
  REQUIRE_THROWS_AS(stationarize(s, TsConfig{}), data_error);
}

TEST_CASE("restore is the pointwise inverse", "[ts]") {
  SimScenario sc;
  sc.model = Logistic{0.9};
  sc.n = 600;
  sc.seed = 4;
  const auto r = simulate_scenario(sc);
  const auto st = stationarize(r.x, TsConfig{});
  const UniSeries back = restore_series(st.x, st.decomp);
  double worst = 0.0;
  for (std::size_t i = 0; i < back.size(); ++i) {
    worst = std::max(worst, std::fabs(back.values[i] - r.x.values[i]));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("trend estimate stays flat on stationary input", "[ts]") {
  const UniSeries s = monthly_series(600, 1950, 12);
  const auto st = stationarize(s, TsConfig{});

  double mean = 0.0;
  for (double v : s.values) mean += v;
  mean /= s.size();
  double sd = 0.0;
  for (double v : s.values) sd += (v - mean) * (v - mean);
  sd = std::sqrt(sd / (s.size() - 1.0));

  // smallest effective window: edge windows hold roughly half the interior count
  std::size_t min_count = s.size();
  const long half = static_cast<long>(0.5 * TsConfig{}.w_years * kDaysPerYear);
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::size_t cnt = 0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (std::labs(s.times[j] - s.times[i]) <= half) ++cnt;
    }
    min_count = std::min(min_count, cnt);
  }

  double worst = 0.0;
  for (double t : st.decomp.trend) worst = std::max(worst, std::fabs(t - mean));
  CHECK(worst < 3.0 * sd / std::sqrt(static_cast<double>(min_count)));
}

TEST_CASE("injected linear trend is removed", "[ts]") {
  // slope 1 per series length on top of modest noise
  for (std::uint64_t seed : {11, 22, 44}) {
    const UniSeries s = monthly_series(1200, 1900, seed, 1.0, 0.1);
    const auto st = stationarize(s, TsConfig{});

    double scale = 0.0;
    for (std::size_t i = 0; i < st.decomp.std.size(); ++i) {
      scale += st.decomp.std[i] * st.decomp.std_season[st.decomp.months[i]];
    }
    scale /= s.size();

    const double raw_rise = ols_rise(s.values);
    const double st_rise = ols_rise(st.x.values) * scale;  // back in data units
    CHECK(std::fabs(st_rise / raw_rise) < 0.01);  // >= 99% of the trend gone
  }
}

TEST_CASE("homoskedastic input keeps seasonal std factors near one", "[ts]") {
  const UniSeries s = monthly_series(4800, 1800, 12);
  const auto st = stationarize(s, TsConfig{});
  REQUIRE(st.decomp.season_enabled);
  for (double v : st.decomp.std_season) {
    CHECK(v > 0.85);
    CHECK(v < 1.15);
  }
}

TEST_CASE("stationarized output has near unit variance", "[ts]") {
  const UniSeries s = monthly_series(1200, 1900, 9, 0.0, 3.7);
  const auto st = stationarize(s, TsConfig{});
  double m = 0.0;
  for (double v : st.x.values) m += v;
  m /= st.x.size();
  double var = 0.0;
  for (double v : st.x.values) var += (v - m) * (v - m);
  var /= st.x.size() - 1.0;
  CHECK_THAT(var, WithinAbs(1.0, 0.15));
  CHECK_THAT(m, WithinAbs(0.0, 0.1));
}

TEST_CASE("seasonality switches off for yearly data", "[ts]") {
  UniSeries yearly;
  Rng rng(13);
  for (int i = 0; i < 80; ++i) {
    yearly.times.push_back(civil_to_serial(1900 + i, 7, 1));
    yearly.values.push_back(rng.normal());
  }
  const auto st = stationarize(yearly, TsConfig{});
  REQUIRE_FALSE(st.decomp.season_enabled);
  for (double v : st.decomp.trend_season) REQUIRE(v == 0.0);
  for (double v : st.decomp.std_season) REQUIRE(v == 1.0);

  // forcing it on anyway is impossible: eleven months have no data to
  // estimate factors from, and that should be an error rather than a guess
  REQUIRE_THROWS_AS(stationarize(yearly, TsConfig{}, SeasonMode::on), data_error);
}

TEST_CASE("monthly data enables seasonality automatically", "[ts]") {
  const UniSeries s = monthly_series(600, 1950, 2);
  REQUIRE(stationarize(s, TsConfig{}).decomp.season_enabled);
  REQUIRE(stationarize(s, TsConfig{}, SeasonMode::on).decomp.season_enabled);
  REQUIRE_FALSE(stationarize(s, TsConfig{}, SeasonMode::off).decomp.season_enabled);
}

TEST_CASE("sinusoidal seasonality is absorbed by the monthly factors", "[ts]") {
  UniSeries s;
  Rng rng(21);
  const int n = 1200;
  for (int i = 0; i < n; ++i) {
    const int month = i % 12;
    s.times.push_back(civil_to_serial(1900 + i / 12, month + 1, 15));
    s.values.push_back(2.0 * std::sin(2.0 * kPi * month / 12.0) + 0.5 * rng.normal());
  }
  const auto st = stationarize(s, TsConfig{});

  // residual seasonal amplitude in the stationarized series
  std::array<double, 12> bym{};
  std::array<int, 12> cnt{};
  for (std::size_t i = 0; i < st.x.size(); ++i) {
    bym[st.decomp.months[i]] += st.x.values[i];
    cnt[st.decomp.months[i]]++;
  }
  double worst = 0.0;
  for (int m = 0; m < 12; ++m) worst = std::max(worst, std::fabs(bym[m] / cnt[m]));
  CHECK(worst < 0.2);  // raw amplitude was 4 sd of the noise
}

TEST_CASE("time-varying gev reconstruction", "[ts]") {
  const UniSeries s = monthly_series(600, 1950, 31, 1.0, 0.3);
  const auto st = stationarize(s, TsConfig{});
  const GevParams p{0.4, 1.1, 0.1};
  const TimeVaryingGev tv = destationarize_gev(p, st.decomp);
  REQUIRE(tv.mu_t.size() == s.size());
  REQUIRE(tv.sigma_t.size() == s.size());
  REQUIRE(tv.xi == p.xi);

  // back-transformed location must track the injected trend
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& d = st.decomp;
    const double expect_mu =
        p.mu * d.std[i] * d.std_season[d.months[i]] + d.trend[i] + d.trend_season[d.months[i]];
    REQUIRE_THAT(tv.mu_t[i], WithinAbs(expect_mu, 1e-12));
    REQUIRE(tv.sigma_t[i] > 0.0);
  }
  CHECK(tv.mu_t.back() - tv.mu_t.front() > 0.5);  // trend carried through
}
