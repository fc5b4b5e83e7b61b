#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "evmanifold/evmodels.hpp"
#include "evmanifold/quadrature.hpp"
#include "evmanifold/selection.hpp"

using namespace evmanifold;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ModelScore make_score(std::string name, int k, std::size_t n, double loglik) {
  ModelScore s;
  s.model_name = std::move(name);
  s.k = k;
  s.n = n;
  s.loglik = loglik;
  s.aic = 2.0 * k - 2.0 * loglik;
  s.bic = k * std::log(static_cast<double>(n)) - 2.0 * loglik;
  return s;
}

}  // namespace

TEST_CASE("score identities", "[selection]") {
  const EvModel m = Logistic{0.7};
  const PairedSample s = sample_pairs(m, 300, 5);
  const ModelScore sc = score(m, s.x, s.y, 1);
  REQUIRE(sc.model_name == "logistic");
  REQUIRE(sc.k == 1);
  REQUIRE(sc.n == 300);

  double ll = 0.0;
  for (std::size_t i = 0; i < s.x.size(); ++i) ll += log_density(m, s.x[i], s.y[i]);
  CHECK_THAT(sc.loglik, WithinRel(ll, 1e-13));
  CHECK(sc.aic == 2.0 * sc.k - 2.0 * sc.loglik);
  CHECK(sc.bic == sc.k * std::log(300.0) - 2.0 * sc.loglik);
}

TEST_CASE("information criteria at a published anchor", "[selection]") {
  // k = 3, n = 50, loglik = -137.36195
  const ModelScore s = make_score("anchor", 3, 50, -137.36195);
  CHECK_THAT(s.aic, WithinAbs(280.7239, 1e-4));
  CHECK_THAT(s.bic, WithinAbs(286.4599, 1e-3));
}

TEST_CASE("score input validation", "[selection]") {
  const EvModel m = Logistic{0.7};
  const PairedSample s = sample_pairs(m, 50, 5);
  REQUIRE_THROWS_AS(score(m, s.x, s.y, 0), data_error);
  std::vector<double> shorter(s.y.begin(), s.y.end() - 1);
  REQUIRE_THROWS_AS(score(m, s.x, shorter, 1), data_error);
  REQUIRE_THROWS_AS(score(m, {}, {}, 1), data_error);
}

TEST_CASE("true model wins on its own data", "[selection]") {
  const EvModel truth = Logistic{0.5};
  const PairedSample s = sample_pairs(truth, 1500, 17);
  const std::vector<ModelScore> scores = {
      score(truth, s.x, s.y, 1),
      score(EvModel{Logistic{0.95}}, s.x, s.y, 1),
      score(EvModel{HuslerReiss{3.0}}, s.x, s.y, 1),
  };
  const Comparison c = compare(scores);
  CHECK(c.rows.front().score.model_name == "logistic");
  CHECK(c.rows.front().score.loglik == scores[0].loglik);
}

TEST_CASE("comparison ordering and deltas", "[selection]") {
  const std::vector<ModelScore> scores = {
      make_score("b", 2, 100, -210.0),
      make_score("a", 1, 100, -200.0),
      make_score("c", 4, 100, -205.0),
  };
  const Comparison c = compare(scores);
  REQUIRE(c.rows.size() == 3);
  // ascending AIC: a (402), c (418), b (424)
  CHECK(c.rows[0].score.model_name == "a");
  CHECK(c.rows[1].score.model_name == "c");
  CHECK(c.rows[2].score.model_name == "b");
  CHECK(c.rows[0].delta_aic == 0.0);
  CHECK(c.rows[0].delta_bic == 0.0);
  CHECK_THAT(c.rows[1].delta_aic, WithinAbs(16.0, 1e-12));
  CHECK_THAT(c.rows[2].delta_aic, WithinAbs(22.0, 1e-12));
  // deltas are against the AIC-best row, also for BIC
  CHECK_THAT(c.rows[1].delta_bic, WithinAbs(scores[2].bic - scores[1].bic, 1e-12));
  CHECK(c.aic_bic_agree);
}

TEST_CASE("criteria can disagree on ranking", "[selection]") {
  // AIC prefers the big model, BIC's heavier penalty flips the order:
  // A: aic = 202, bic = 1*ln(50) + 200 = 203.91
  // B: aic = 200, bic = 6*ln(50) + 188 = 211.47
  const std::vector<ModelScore> scores = {
      make_score("small", 1, 50, -100.0),
      make_score("big", 6, 50, -94.0),
  };
  const Comparison c = compare(scores);
  CHECK_FALSE(c.aic_bic_agree);
  CHECK(c.rows.front().score.model_name == "big");
  // deltas are anchored to the AIC winner, so the BIC winner shows up as a
  // later row with a negative delta
  CHECK(c.rows.back().delta_bic < 0.0);

  const std::string txt = format_comparison(c);
  CHECK(txt.find("note: AIC and BIC rank the models differently") != std::string::npos);
}

TEST_CASE("comparison input validation", "[selection]") {
  REQUIRE_THROWS_AS(compare({make_score("only", 1, 50, -10.0)}), data_error);
  REQUIRE_THROWS_AS(compare({}), data_error);
  REQUIRE_THROWS_AS(
      compare({make_score("a", 1, 50, -10.0), make_score("b", 1, 60, -10.0)}), data_error);
}

TEST_CASE("comparison csv rendering", "[selection]") {
  const std::vector<ModelScore> scores = {
      make_score("hr", 1, 100, -200.0),
      make_score("logistic", 1, 100, -195.0),
  };
  const std::string csv = comparison_to_csv(compare(scores));
  REQUIRE(csv.rfind("model,k,n,loglik,aic,bic,delta_aic,delta_bic\n", 0) == 0);
  // best row first
  const auto first_row = csv.substr(csv.find('\n') + 1);
  CHECK(first_row.rfind("logistic,1,100,-195.000000,392.000000,", 0) == 0);
  CHECK(csv.find("hr,1,100,-200.000000,") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("comparison text rendering", "[selection]") {
  const std::vector<ModelScore> scores = {
      make_score("hr", 1, 100, -200.0),
      make_score("logistic", 1, 100, -195.0),
  };
  const std::string txt = format_comparison(compare(scores));
  CHECK(txt.find("model") != std::string::npos);
  CHECK(txt.find("dAIC") != std::string::npos);
  CHECK(txt.find("dBIC") != std::string::npos);
  CHECK(txt.find("logistic") < txt.find("hr"));
  CHECK(txt.find("note:") == std::string::npos);
}
