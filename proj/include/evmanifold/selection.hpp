#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "evmanifold/errors.hpp"
#include "evmanifold/evmodels.hpp"

namespace evmanifold {

struct ModelScore {
  std::string model_name;
  int k = 1;  // free parameters; caller decides the counting convention
  std::size_t n = 0;
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
};

inline ModelScore score(const EvModel& model, const std::vector<double>& x,
                        const std::vector<double>& y, int k) {
  if (k < 1) throw data_error("parameter count k must be at least 1");
  if (x.size() != y.size()) throw data_error("score needs paired samples of equal length");
  if (x.empty()) throw data_error("score needs at least one observation");
  double ll = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double ld;
    try {
      ld = log_density(model, x[i], y[i]);
    } catch (const std::exception& e) {
      throw numeric_error("log-density failed at observation " + std::to_string(i) + ": " +
                          e.what());
    }
    if (!std::isfinite(ld)) {
      throw numeric_error("non-finite log-density at observation " + std::to_string(i));
    }
    ll += ld;
  }
  ModelScore s;
  s.model_name = model_name(model);
  s.k = k;
  s.n = x.size();
  s.loglik = ll;
  s.aic = 2.0 * k - 2.0 * ll;
  s.bic = k * std::log(static_cast<double>(s.n)) - 2.0 * ll;
  return s;
}

struct ComparisonRow {
  ModelScore score;
  double delta_aic = 0.0;  // against the AIC-best model
  double delta_bic = 0.0;
};

struct Comparison {
  std::vector<ComparisonRow> rows;  // ascending AIC
  bool aic_bic_agree = true;
};

inline Comparison compare(const std::vector<ModelScore>& scores) {
  if (scores.size() < 2) throw data_error("comparison needs at least two model scores");
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i].n != scores[0].n) {
      throw data_error("model scores cover different sample sizes (" +
                       std::to_string(scores[i].n) + " vs " + std::to_string(scores[0].n) +
                       "); refusing to compare");
    }
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a].aic < scores[b].aic; });
  std::vector<std::size_t> bic_order(order);
  std::stable_sort(bic_order.begin(), bic_order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a].bic < scores[b].bic; });
  Comparison c;
  c.aic_bic_agree = (order == bic_order);
  const ModelScore& best = scores[order.front()];
  c.rows.reserve(scores.size());
  for (std::size_t idx : order) {
    ComparisonRow row;
    row.score = scores[idx];
    row.delta_aic = scores[idx].aic - best.aic;
    row.delta_bic = scores[idx].bic - best.bic;
    c.rows.push_back(std::move(row));
  }
  return c;
}

inline std::string comparison_to_csv(const Comparison& c) {
  std::string out = "model,k,n,loglik,aic,bic,delta_aic,delta_bic\n";
  char buf[256];
  for (const auto& r : c.rows) {
    std::snprintf(buf, sizeof buf, "%s,%d,%zu,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                  r.score.model_name.c_str(), r.score.k, r.score.n, r.score.loglik, r.score.aic,
                  r.score.bic, r.delta_aic, r.delta_bic);
    out += buf;
  }
  return out;
}

inline std::string format_comparison(const Comparison& c) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-12s %3s %6s %12s %12s %12s %10s %10s\n", "model", "k", "n",
                "loglik", "AIC", "BIC", "dAIC", "dBIC");
  out += buf;
  for (const auto& r : c.rows) {
    std::snprintf(buf, sizeof buf, "%-12s %3d %6zu %12.4f %12.4f %12.4f %10.4f %10.4f\n",
                  r.score.model_name.c_str(), r.score.k, r.score.n, r.score.loglik, r.score.aic,
                  r.score.bic, r.delta_aic, r.delta_bic);
    out += buf;
  }
  if (!c.aic_bic_agree) {
    out += "note: AIC and BIC rank the models differently\n";
  }
  return out;
}

}  // namespace evmanifold
