#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "evmanifold/margins.hpp"
#include "evmanifold/rng.hpp"

using namespace evmanifold;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("gev cdf/quantile round trip", "[gev]") {
  for (double xi : {-0.4, -0.1, 0.0, 0.2, 0.7}) {
    const GevParams p{1.0, 2.5, xi};
    for (double q : {0.01, 0.2, 0.5, 0.9, 0.999}) {
      CHECK_THAT(gev_cdf(gev_quantile(q, p), p), WithinRel(q, 1e-10));
    }
  }
}

TEST_CASE("gev reference values", "[gev]") {
  CHECK_THAT(gev_logpdf(1.7, GevParams{0.5, 2.0, 0.3}),
             WithinRel(-1.98633772151832888e+00, 1e-12));
  CHECK_THAT(gev_logpdf(1.7, GevParams{0.5, 2.0, 0.0}),
             WithinRel(-1.84195881665397154e+00, 1e-12));
  CHECK_THAT(gev_logpdf(0.9, GevParams{1.2, 0.8, -0.25}),
             WithinRel(-9.39127493673857616e-01, 1e-12));
  CHECK_THAT(gev_quantile(0.9, GevParams{0.5, 2.0, 0.3}),
             WithinRel(6.92832947187951387e+00, 1e-12));
  CHECK_THAT(gev_quantile(0.25, GevParams{1.2, 0.8, -0.25}),
             WithinRel(9.27727166457327446e-01, 1e-12));
  CHECK_THAT(gev_quantile(0.5, GevParams{0.0, 1.0, 0.0}),
             WithinRel(3.66512920581664348e-01, 1e-12));
}

TEST_CASE("gev behaves continuously through the gumbel band", "[gev]") {
  const GevParams gumbel{0.3, 1.7, 0.0};
  const GevParams nearly{0.3, 1.7, 1e-9};
  for (double x : {-2.0, 0.3, 1.1, 6.0}) {
    CHECK_THAT(gev_cdf(x, nearly), WithinRel(gev_cdf(x, gumbel), 1e-7));
  }
  CHECK_THAT(gev_quantile(0.8, nearly), WithinRel(gev_quantile(0.8, gumbel), 1e-7));
}

TEST_CASE("gev support boundaries", "[gev]") {
  const GevParams frechet{0.0, 1.0, 0.5};  // support x > -2
  CHECK(gev_cdf(-2.5, frechet) == 0.0);
  REQUIRE_THROWS_AS(gev_logpdf(-2.5, frechet), data_error);

  const GevParams weibull{0.0, 1.0, -0.5};  // support x < 2
  CHECK(gev_cdf(2.5, weibull) == 1.0);
  REQUIRE_THROWS_AS(gev_logpdf(2.5, weibull), data_error);

  REQUIRE_THROWS_AS(validate(GevParams{0.0, -1.0, 0.0}), data_error);
  REQUIRE_THROWS_AS(gev_quantile(0.0, frechet), data_error);
  REQUIRE_THROWS_AS(gev_quantile(1.0, frechet), data_error);
}

TEST_CASE("gev maximum likelihood recovery", "[gev][fit]") {
  for (double xi : {-0.2, 0.0, 0.35}) {
    const GevParams tru{2.0, 1.5, xi};
    Rng rng(77);
    std::vector<double> data;
    for (int i = 0; i < 4000; ++i) data.push_back(gev_quantile(rng.uniform(), tru));
    const GevParams fit = fit_gev(data);
    CHECK_THAT(fit.mu, WithinAbs(tru.mu, 0.12));
    CHECK_THAT(fit.sigma, WithinAbs(tru.sigma, 0.12));
    CHECK_THAT(fit.xi, WithinAbs(tru.xi, 0.08));
  }
  REQUIRE_THROWS_AS(fit_gev(std::vector<double>(5, 1.0)), data_error);
}

TEST_CASE("gev fit survives a very heavy tail", "[gev][fit]") {
  // shape near 1: PWM moments are useless, the heavy-tail fallback must kick in
  const GevParams tru{0.0, 1.0, 0.95};
  Rng rng(3);
  std::vector<double> data;
  for (int i = 0; i < 3000; ++i) data.push_back(gev_quantile(rng.uniform(), tru));
  const GevParams fit = fit_gev(data);
  CHECK_THAT(fit.xi, WithinAbs(tru.xi, 0.15));
}

static UniSeries daily_series(int years, int start_year) {
  UniSeries s;
  Rng rng(55);
  const long t0 = civil_to_serial(start_year, 1, 1);
  const long t1 = civil_to_serial(start_year + years, 1, 1);
  for (long t = t0; t < t1; ++t) {
    s.times.push_back(t);
    s.values.push_back(rng.normal());
  }
  return s;
}

TEST_CASE("block maxima by month and year", "[blocks]") {
  const UniSeries s = daily_series(3, 2001);
  const UniSeries monthly = block_maxima(s, Block::month);
  REQUIRE(monthly.size() == 36);
  const UniSeries yearly = block_maxima(s, Block::year);
  REQUIRE(yearly.size() == 3);

  // each yearly maximum dominates that year's values
  for (std::size_t i = 0; i < yearly.size(); ++i) {
    const int yr = year_of(yearly.times[i]);
    double mx = -1e300;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (year_of(s.times[j]) == yr) mx = std::max(mx, s.values[j]);
    }
    REQUIRE(yearly.values[i] == mx);
  }
}

TEST_CASE("leading and trailing stub blocks are dropped", "[blocks]") {
  UniSeries s = daily_series(2, 2010);
  // chop to start mid-December 2009 equivalent: prepend 3 days of the prior month
  UniSeries padded;
  for (int d = 29; d <= 31; ++d) {
    padded.times.push_back(civil_to_serial(2009, 12, d));
    padded.values.push_back(100.0);  // huge values that must be discarded
  }
  padded.times.insert(padded.times.end(), s.times.begin(), s.times.end());
  padded.values.insert(padded.values.end(), s.values.begin(), s.values.end());
  // and 4 trailing days of January 2012
  for (int d = 1; d <= 4; ++d) {
    padded.times.push_back(civil_to_serial(2012, 1, d));
    padded.values.push_back(100.0);
  }

  const UniSeries monthly = block_maxima(padded, Block::month);
  REQUIRE(monthly.size() == 24);  // stubs at both ends gone
  for (double v : monthly.values) REQUIRE(v < 100.0);

  REQUIRE_THROWS_AS(block_maxima(UniSeries{}, Block::month), data_error);
}

TEST_CASE("empirical cdf rank normalization", "[ecdf]") {
  const EmpiricalCdf F({3.0, 1.0, 2.0, 5.0, 4.0});
  CHECK_THAT(F(1.0), WithinRel(1.0 / 6.0, 1e-15));
  CHECK_THAT(F(3.5), WithinRel(3.0 / 6.0, 1e-15));
  CHECK_THAT(F(5.0), WithinRel(5.0 / 6.0, 1e-15));
  CHECK(F(0.0) == 0.0);

  // ties share the max rank through the <= convention
  const EmpiricalCdf T({1.0, 2.0, 2.0, 3.0});
  CHECK_THAT(T(2.0), WithinRel(3.0 / 5.0, 1e-15));

  CHECK(F.quantile(0.5) == 3.0);
  CHECK(F.quantile(1e-9) == 1.0);
  CHECK(F.quantile(1.0) == 5.0);
  REQUIRE_THROWS_AS(EmpiricalCdf(std::vector<double>{}), data_error);
}

TEST_CASE("unit frechet rank transform", "[frechet]") {
  Rng rng(8);
  std::vector<double> data;
  for (int i = 0; i < 2000; ++i) data.push_back(rng.normal());
  const FrechetSample fs = to_unit_frechet(data);
  REQUIRE(fs.values.size() == data.size());

  // Kolmogorov-Smirnov distance to exp(-1/x)
  std::vector<double> v = fs.values;
  std::sort(v.begin(), v.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double F = std::exp(-1.0 / v[i]);
    ks = std::max(ks, std::fabs(F - static_cast<double>(i) / v.size()));
    ks = std::max(ks, std::fabs(F - static_cast<double>(i + 1) / v.size()));
  }
  CHECK(ks < 0.05);

  // monotone: ranks preserve order
  for (std::size_t i = 1; i < data.size(); ++i) {
    if (data[i] > data[i - 1]) REQUIRE(fs.values[i] > fs.values[i - 1]);
  }
  REQUIRE_THROWS_AS(to_unit_frechet({1.0}), data_error);
}
