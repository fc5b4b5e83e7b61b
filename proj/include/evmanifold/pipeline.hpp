#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evmanifold/csv.hpp"
#include "evmanifold/errors.hpp"
#include "evmanifold/evmodels.hpp"
#include "evmanifold/manifold.hpp"
#include "evmanifold/margins.hpp"
#include "evmanifold/selection.hpp"
#include "evmanifold/spectral.hpp"
#include "evmanifold/tstationary.hpp"

namespace evmanifold {

using ordered_json = nlohmann::ordered_json;

// One flat configuration bag for every subcommand. Flags override a JSON
// config file, which overrides the defaults below; the effective values are
// echoed into each run summary.
struct RunConfig {
  // paths
  std::string x_path;
  std::string y_path;
  std::string input_path;
  std::vector<std::string> summary_paths;
  std::string out_dir = ".";

  // model selection and parameters
  std::string model = "semiparam";  // logistic | hr | ct | semiparam
  double alpha = 0.9;
  double beta = 1.0;
  double lambda = 1.0;
  double sigma = 1.0;

  // simulation scenario
  std::size_t n = 2000;
  double trend_amp = 1.0;
  double season_amp = 0.5;
  std::string resolution = "month";  // month | year
  std::uint64_t seed = 1;

  // stationarization
  TsConfig ts;
  std::string seasonality = "auto";  // auto | on | off

  // dependence fitting
  std::string blocks = "none";  // none | year | month
  double threshold = 0.98;
  bool posterior = true;
  int mcmc_iters = 10000;
  int mcmc_burnin = 4000;
  int k_params = 1;

  // manifold and tables
  int quad_nodes = 96;
  SolverConfig solver;
  std::vector<double> q_grid;   // empty: default 19-point grid
  std::vector<double> x_grid;   // empty: default 40-point log grid
  std::vector<double> table_q = {0.75, 0.90, 0.95};
  std::vector<double> table_x;  // empty: empirical 75/90/95% of the X margin
  bool approx = false;

  void validate() const {
    if (!(threshold > 0.5 && threshold < 1.0)) {
      throw usage_error("threshold must lie in (0.5, 1)");
    }
    if (model != "logistic" && model != "hr" && model != "ct" && model != "semiparam") {
      throw usage_error("unknown model '" + model + "'");
    }
    if (resolution != "month" && resolution != "year") {
      throw usage_error("resolution must be 'month' or 'year'");
    }
    if (seasonality != "auto" && seasonality != "on" && seasonality != "off") {
      throw usage_error("seasonality must be 'auto', 'on' or 'off'");
    }
    if (blocks != "none" && blocks != "year" && blocks != "month") {
      throw usage_error("blocks must be 'none', 'year' or 'month'");
    }
    if (quad_nodes < 2) throw usage_error("quadrature size must be at least 2");
    if (mcmc_iters <= mcmc_burnin || mcmc_burnin < 0) {
      throw usage_error("posterior iterations must exceed burn-in");
    }
    if (k_params < 1) throw usage_error("parameter count k must be at least 1");
    for (double q : q_grid) {
      if (!(q > 0.0 && q < 1.0)) throw usage_error("q grid values must lie in (0,1)");
    }
    for (double x : x_grid) {
      if (!(x > 0.0)) throw usage_error("x grid values must be positive");
    }
    for (double q : table_q) {
      if (!(q > 0.0 && q < 1.0)) throw usage_error("table quantile levels must lie in (0,1)");
    }
  }
};

namespace detail {

template <typename T>
inline void apply_scalar(const ordered_json& j, const char* key, T& slot) {
  if (j.contains(key)) slot = j.at(key).get<T>();
}
inline void apply_vector(const ordered_json& j, const char* key, std::vector<double>& slot) {
  if (j.contains(key)) slot = j.at(key).get<std::vector<double>>();
}

}  // namespace detail

// Loads a JSON config file onto cfg. Keys mirror the long flag names with
// underscores; unknown keys are rejected so typos cannot silently fall back
// to defaults.
inline void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open config file " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw data_error("config file " + path + " is not valid JSON: " + e.what());
  }
  static const char* known[] = {
      "x", "y", "input", "out_dir", "model", "alpha", "beta", "lambda", "sigma", "n",
      "trend_amp", "season_amp", "resolution", "seed", "window_years", "season_window_days",
      "smoothing_ratio", "extra_smoothing", "seasonality", "blocks", "threshold", "posterior",
      "mcmc_iters", "mcmc_burnin", "k", "quad_nodes", "rel_tol", "max_iter", "bracket_growth",
      "q_grid", "x_grid", "table_q", "table_x", "approx"};
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || item.key() == k;
    if (!ok) throw usage_error("unknown config key '" + item.key() + "' in " + path);
  }
  detail::apply_scalar(j, "x", cfg.x_path);
  detail::apply_scalar(j, "y", cfg.y_path);
  detail::apply_scalar(j, "input", cfg.input_path);
  detail::apply_scalar(j, "out_dir", cfg.out_dir);
  detail::apply_scalar(j, "model", cfg.model);
  detail::apply_scalar(j, "alpha", cfg.alpha);
  detail::apply_scalar(j, "beta", cfg.beta);
  detail::apply_scalar(j, "lambda", cfg.lambda);
  detail::apply_scalar(j, "sigma", cfg.sigma);
  detail::apply_scalar(j, "n", cfg.n);
  detail::apply_scalar(j, "trend_amp", cfg.trend_amp);
  detail::apply_scalar(j, "season_amp", cfg.season_amp);
  detail::apply_scalar(j, "resolution", cfg.resolution);
  detail::apply_scalar(j, "seed", cfg.seed);
  detail::apply_scalar(j, "window_years", cfg.ts.w_years);
  detail::apply_scalar(j, "season_window_days", cfg.ts.wsn_days);
  detail::apply_scalar(j, "smoothing_ratio", cfg.ts.l);
  detail::apply_scalar(j, "extra_smoothing", cfg.ts.extra_smoothing);
  detail::apply_scalar(j, "seasonality", cfg.seasonality);
  detail::apply_scalar(j, "blocks", cfg.blocks);
  detail::apply_scalar(j, "threshold", cfg.threshold);
  detail::apply_scalar(j, "posterior", cfg.posterior);
  detail::apply_scalar(j, "mcmc_iters", cfg.mcmc_iters);
  detail::apply_scalar(j, "mcmc_burnin", cfg.mcmc_burnin);
  detail::apply_scalar(j, "k", cfg.k_params);
  detail::apply_scalar(j, "quad_nodes", cfg.quad_nodes);
  detail::apply_scalar(j, "rel_tol", cfg.solver.rel_tol);
  detail::apply_scalar(j, "max_iter", cfg.solver.max_iter);
  detail::apply_scalar(j, "bracket_growth", cfg.solver.bracket_growth);
  detail::apply_vector(j, "q_grid", cfg.q_grid);
  detail::apply_vector(j, "x_grid", cfg.x_grid);
  detail::apply_vector(j, "table_q", cfg.table_q);
  detail::apply_vector(j, "table_x", cfg.table_x);
  detail::apply_scalar(j, "approx", cfg.approx);
}

inline void apply_env_overrides(RunConfig& cfg) {
  if (const char* env = std::getenv("EVMANIFOLD_QUAD_NODES")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 2 || v > 4096) {
      throw usage_error("EVMANIFOLD_QUAD_NODES must be an integer in [2, 4096]");
    }
    cfg.quad_nodes = static_cast<int>(v);
  }
}

inline ordered_json config_to_json(const RunConfig& cfg) {
  ordered_json j;
  j["x"] = cfg.x_path;
  j["y"] = cfg.y_path;
  j["input"] = cfg.input_path;
  j["out_dir"] = cfg.out_dir;
  j["model"] = cfg.model;
  j["alpha"] = cfg.alpha;
  j["beta"] = cfg.beta;
  j["lambda"] = cfg.lambda;
  j["sigma"] = cfg.sigma;
  j["n"] = cfg.n;
  j["trend_amp"] = cfg.trend_amp;
  j["season_amp"] = cfg.season_amp;
  j["resolution"] = cfg.resolution;
  j["seed"] = cfg.seed;
  j["window_years"] = cfg.ts.w_years;
  j["season_window_days"] = cfg.ts.wsn_days;
  j["smoothing_ratio"] = cfg.ts.l;
  j["extra_smoothing"] = cfg.ts.extra_smoothing;
  j["seasonality"] = cfg.seasonality;
  j["blocks"] = cfg.blocks;
  j["threshold"] = cfg.threshold;
  j["posterior"] = cfg.posterior;
  j["mcmc_iters"] = cfg.mcmc_iters;
  j["mcmc_burnin"] = cfg.mcmc_burnin;
  j["k"] = cfg.k_params;
  j["quad_nodes"] = cfg.quad_nodes;
  j["rel_tol"] = cfg.solver.rel_tol;
  j["max_iter"] = cfg.solver.max_iter;
  j["bracket_growth"] = cfg.solver.bracket_growth;
  j["q_grid"] = cfg.q_grid.empty() ? default_q_grid() : cfg.q_grid;
  j["x_grid"] = cfg.x_grid.empty() ? default_x_grid() : cfg.x_grid;
  j["table_q"] = cfg.table_q;
  j["table_x"] = cfg.table_x;
  j["approx"] = cfg.approx;
  return j;
}

inline EvModel model_from_config(const RunConfig& cfg) {
  if (cfg.model == "logistic") return Logistic{cfg.alpha};
  if (cfg.model == "hr") return HuslerReiss{cfg.lambda};
  if (cfg.model == "ct") return ColesTawn{cfg.alpha, cfg.beta};
  return SemiparamLn{LnSpectral{cfg.sigma}, gauss_legendre(cfg.quad_nodes)};
}

inline ordered_json model_params_json(const RunConfig& cfg) {
  ordered_json p;
  if (cfg.model == "logistic") {
    p["alpha"] = cfg.alpha;
  } else if (cfg.model == "hr") {
    p["lambda"] = cfg.lambda;
  } else if (cfg.model == "ct") {
    p["alpha"] = cfg.alpha;
    p["beta"] = cfg.beta;
  } else {
    p["sigma"] = cfg.sigma;
  }
  return p;
}

namespace detail {

inline std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

inline void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw data_error("cannot create output directory " + dir + ": " + ec.message());
}

inline void write_json(const std::string& path, const ordered_json& j) {
  atomic_write(path, j.dump(2) + "\n");
}

struct PairedData {
  std::vector<long> times;
  std::vector<double> x, y;
};

inline PairedData pair_by_time(const UniSeries& a, const UniSeries& b) {
  PairedData p;
  std::size_t i = 0, j = 0;
  while (i < a.times.size() && j < b.times.size()) {
    if (a.times[i] == b.times[j]) {
      p.times.push_back(a.times[i]);
      p.x.push_back(a.values[i]);
      p.y.push_back(b.values[j]);
      ++i;
      ++j;
    } else if (a.times[i] < b.times[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  if (p.x.size() < 20) {
    throw data_error("margins share only " + std::to_string(p.x.size()) +
                     " timestamps; need at least 20 paired observations");
  }
  return p;
}

inline SeasonMode season_mode(const std::string& s) {
  if (s == "on") return SeasonMode::on;
  if (s == "off") return SeasonMode::off;
  return SeasonMode::automatic;
}

// decomposition.csv: one row per observation per margin, original value
// alongside every component of the transform.
inline std::string decomposition_csv(const UniSeries& raw, const StationarizeResult& st,
                                     const std::string& margin) {
  std::string out;
  for (std::size_t i = 0; i < raw.values.size(); ++i) {
    const int m = st.decomp.months[i];
    out += margin;
    out += ',';
    out += format_date(raw.times[i]);
    out += ',';
    out += format_double(raw.values[i]);
    out += ',';
    out += format_double(st.decomp.trend[i]);
    out += ',';
    out += format_double(st.decomp.season_enabled ? st.decomp.trend_season[m] : 0.0);
    out += ',';
    out += format_double(st.decomp.std[i]);
    out += ',';
    out += format_double(st.decomp.season_enabled ? st.decomp.std_season[m] : 1.0);
    out += ',';
    out += format_double(st.x.values[i]);
    out += '\n';
  }
  return out;
}

inline std::string manifold_csv_rows(const RegressionManifold& m,
                                     const std::vector<std::vector<double>>* approx) {
  const char* tag = m.scale == ManifoldScale::frechet ? "frechet" : "original";
  std::string out;
  for (std::size_t i = 0; i < m.q_grid.size(); ++i) {
    for (std::size_t j = 0; j < m.x_grid.size(); ++j) {
      out += format_double(m.q_grid[i]);
      out += ',';
      out += format_double(m.x_grid[j]);
      out += ',';
      out += format_double(m.y[i][j]);
      out += ',';
      out += tag;
      if (approx) {
        out += ',';
        out += format_double((*approx)[i][j]);
      }
      out += '\n';
    }
  }
  return out;
}

inline ordered_json score_json(const ModelScore& s) {
  ordered_json j;
  j["model"] = s.model_name;
  j["k"] = s.k;
  j["n"] = s.n;
  j["loglik"] = s.loglik;
  j["aic"] = s.aic;
  j["bic"] = s.bic;
  return j;
}

inline std::string score_csv(const ModelScore& s) {
  std::string out = "model,k,n,loglik,aic,bic\n";
  out += s.model_name + ',' + std::to_string(s.k) + ',' + std::to_string(s.n) + ',' +
         format_double(s.loglik) + ',' + format_double(s.aic) + ',' + format_double(s.bic) +
         '\n';
  return out;
}

}  // namespace detail

inline void run_simulate(const RunConfig& cfg) {
  cfg.validate();
  detail::ensure_out_dir(cfg.out_dir);
  SimScenario sc;
  sc.model = model_from_config(cfg);
  sc.n = cfg.n;
  sc.trend_amp = cfg.trend_amp;
  sc.season_amp = cfg.season_amp;
  sc.seed = cfg.seed;
  sc.yearly = cfg.resolution == "year";
  const ScenarioResult r = simulate_scenario(sc);
  write_series_csv(detail::join_path(cfg.out_dir, "x.csv"), r.x);
  write_series_csv(detail::join_path(cfg.out_dir, "y.csv"), r.y);
  ordered_json manifest;
  manifest["schema"] = 1;
  manifest["command"] = "simulate";
  manifest["model"] = cfg.model;
  manifest["params"] = model_params_json(cfg);
  manifest["n"] = cfg.n;
  manifest["seed"] = cfg.seed;
  manifest["trend_amp"] = cfg.trend_amp;
  manifest["season_amp"] = cfg.season_amp;
  manifest["resolution"] = cfg.resolution;
  manifest["artifacts"] = {"x.csv", "y.csv"};
  detail::write_json(detail::join_path(cfg.out_dir, "manifest.json"), manifest);
}

inline void run_stationarize(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.input_path.empty()) throw usage_error("stationarize needs --input");
  detail::ensure_out_dir(cfg.out_dir);
  const UniSeries raw = read_series_csv(cfg.input_path);
  const StationarizeResult st = stationarize(raw, cfg.ts, detail::season_mode(cfg.seasonality));

  std::string csv = "date,value,trend,trend_season,std,std_season,stationarized\n";
  for (std::size_t i = 0; i < raw.values.size(); ++i) {
    const int m = st.decomp.months[i];
    csv += format_date(raw.times[i]);
    csv += ',';
    csv += format_double(raw.values[i]);
    csv += ',';
    csv += format_double(st.decomp.trend[i]);
    csv += ',';
    csv += format_double(st.decomp.season_enabled ? st.decomp.trend_season[m] : 0.0);
    csv += ',';
    csv += format_double(st.decomp.std[i]);
    csv += ',';
    csv += format_double(st.decomp.season_enabled ? st.decomp.std_season[m] : 1.0);
    csv += ',';
    csv += format_double(st.x.values[i]);
    csv += '\n';
  }
  atomic_write(detail::join_path(cfg.out_dir, "decomposition.csv"), csv);
  write_series_csv(detail::join_path(cfg.out_dir, "stationarized.csv"), st.x);

  ordered_json summary;
  summary["schema"] = 1;
  summary["command"] = "stationarize";
  summary["config"] = config_to_json(cfg);
  summary["data"] = {{"n", raw.values.size()},
                     {"span_days", raw.span_days()},
                     {"median_spacing_days", raw.median_spacing_days()}};
  summary["season_enabled"] = st.decomp.season_enabled;
  summary["artifacts"] = {"decomposition.csv", "stationarized.csv", "summary.json"};
  detail::write_json(detail::join_path(cfg.out_dir, "summary.json"), summary);
}

namespace detail {

struct FitCore {
  UniSeries raw_x, raw_y;
  StationarizeResult st_x, st_y;
  PairedData paired;
  FrechetSample fx, fy;
  PseudoAngles angles;
  SigmaFit fit;
  std::optional<PosteriorBand> band;
  ModelScore sc;
  std::shared_ptr<const GaussQuadRule> rule;
};

// The shared stationarize -> block maxima -> Frechet -> angles -> sigma fit
// -> posterior -> score chain behind both `fit` and `analyze`. Artifacts are
// written as soon as their stage completes so a late failure leaves the early
// outputs on disk; `stage` always names the step that was running.
inline FitCore fit_core(const RunConfig& cfg, std::string& stage, bool write_decomposition) {
  FitCore c;
  stage = "load";
  if (cfg.x_path.empty() || cfg.y_path.empty()) throw usage_error("need --x and --y inputs");
  c.raw_x = read_series_csv(cfg.x_path);
  c.raw_y = read_series_csv(cfg.y_path);

  stage = "stationarize";
  const SeasonMode mode = season_mode(cfg.seasonality);
  c.st_x = stationarize(c.raw_x, cfg.ts, mode);
  c.st_y = stationarize(c.raw_y, cfg.ts, mode);
  if (write_decomposition) {
    std::string csv = "margin,date,value,trend,trend_season,std,std_season,stationarized\n";
    csv += decomposition_csv(c.raw_x, c.st_x, "x");
    csv += decomposition_csv(c.raw_y, c.st_y, "y");
    atomic_write(join_path(cfg.out_dir, "decomposition.csv"), csv);
  }

  stage = "block-maxima";
  UniSeries mx = c.st_x.x;
  UniSeries my = c.st_y.x;
  if (cfg.blocks != "none") {
    const Block b = cfg.blocks == "year" ? Block::year : Block::month;
    mx = block_maxima(mx, b);
    my = block_maxima(my, b);
  }

  stage = "pairing";
  c.paired = pair_by_time(mx, my);

  stage = "frechet";
  c.fx = to_unit_frechet(c.paired.x);
  c.fy = to_unit_frechet(c.paired.y);

  stage = "pseudo-angles";
  c.angles = extract_pseudo_angles(c.fx.values, c.fy.values, cfg.threshold);
  {
    std::string csv = "w,r,x,y\n";
    for (std::size_t i = 0; i < c.angles.w.size(); ++i) {
      csv += format_double(c.angles.w[i]);
      csv += ',';
      csv += format_double(c.angles.r[i]);
      csv += ',';
      csv += format_double(c.angles.x[i]);
      csv += ',';
      csv += format_double(c.angles.y[i]);
      csv += '\n';
    }
    atomic_write(join_path(cfg.out_dir, "angles.csv"), csv);
  }

  stage = "fit-sigma";
  c.rule = gauss_legendre(cfg.quad_nodes);
  c.fit = fit_sigma_mle(c.angles.x, c.angles.y, *c.rule);

  stage = "posterior";
  if (cfg.posterior) {
    c.band = sigma_posterior_band(c.angles.x, c.angles.y, *c.rule, cfg.seed, cfg.mcmc_iters,
                                  cfg.mcmc_burnin);
  }
  {
    const LnSpectral mle{c.fit.sigma};
    std::string csv = cfg.posterior ? "w,h_mle,h_mean,h_lo,h_hi\n" : "w,h_mle\n";
    const std::size_t pts = cfg.posterior ? c.band->w_grid.size() : 201;
    for (std::size_t i = 0; i < pts; ++i) {
      const double w = cfg.posterior ? c.band->w_grid[i] : i / 200.0;
      csv += format_double(w);
      csv += ',';
      csv += format_double(ln_density(w, mle));
      if (cfg.posterior) {
        csv += ',';
        csv += format_double(c.band->h_mean[i]);
        csv += ',';
        csv += format_double(c.band->h_lo[i]);
        csv += ',';
        csv += format_double(c.band->h_hi[i]);
      }
      csv += '\n';
    }
    atomic_write(join_path(cfg.out_dir, "density_band.csv"), csv);
  }

  stage = "score";
  const EvModel fitted = SemiparamLn{LnSpectral{c.fit.sigma}, c.rule};
  c.sc = score(fitted, c.fx.values, c.fy.values, cfg.k_params);
  atomic_write(join_path(cfg.out_dir, "scores.csv"), score_csv(c.sc));
  return c;
}

inline ordered_json fit_summary_json(const RunConfig& cfg, const FitCore& c,
                                     const char* command) {
  ordered_json s;
  s["schema"] = 1;
  s["command"] = command;
  s["config"] = config_to_json(cfg);
  s["data"] = {{"n_x_raw", c.raw_x.values.size()},
               {"n_y_raw", c.raw_y.values.size()},
               {"n_pairs", c.paired.x.size()}};
  s["stationarize"] = {{"x_season_enabled", c.st_x.decomp.season_enabled},
                       {"y_season_enabled", c.st_y.decomp.season_enabled}};
  s["angles"] = {{"k", c.angles.k}, {"threshold", cfg.threshold}, {"radius_u", c.angles.u}};
  s["fit"] = {{"sigma_hat", c.fit.sigma}, {"loglik_exceedances", c.fit.loglik}};
  if (c.band) {
    s["posterior"] = {{"draws", c.band->draws.size()},
                      {"accept_rate", c.band->accept_rate},
                      {"accept_rate_ok", c.band->accept_rate_ok}};
  }
  s["score"] = score_json(c.sc);
  return s;
}

}  // namespace detail

// Rethrows e with the failing stage recorded both in the message and in a
// marker file next to whatever partial outputs the run managed to write.
namespace detail {

[[noreturn]] inline void stage_failure(const std::string& out_dir, const std::string& stage,
                                       const std::exception& e, bool usage, bool data) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (!ec) {
    try {
      atomic_write(join_path(out_dir, "FAILED"),
                   "stage: " + stage + "\nerror: " + std::string(e.what()) + "\n");
    } catch (...) {
    }
  }
  const std::string msg = "stage " + stage + ": " + e.what();
  if (usage) throw usage_error(msg);
  if (data) throw data_error(msg);
  throw numeric_error(msg);
}

}  // namespace detail

inline void run_fit(const RunConfig& cfg) {
  cfg.validate();
  detail::ensure_out_dir(cfg.out_dir);
  std::string stage = "setup";
  try {
    const detail::FitCore c = detail::fit_core(cfg, stage, /*write_decomposition=*/false);
    stage = "summary";
    ordered_json s = detail::fit_summary_json(cfg, c, "fit");
    s["artifacts"] = {"angles.csv", "density_band.csv", "scores.csv", "summary.json"};
    detail::write_json(detail::join_path(cfg.out_dir, "summary.json"), s);
  } catch (const usage_error& e) {
    detail::stage_failure(cfg.out_dir, stage, e, true, false);
  } catch (const data_error& e) {
    detail::stage_failure(cfg.out_dir, stage, e, false, true);
  } catch (const std::exception& e) {
    detail::stage_failure(cfg.out_dir, stage, e, false, false);
  }
}

inline void run_analyze(const RunConfig& cfg) {
  cfg.validate();
  detail::ensure_out_dir(cfg.out_dir);
  std::string stage = "setup";
  try {
    const detail::FitCore c = detail::fit_core(cfg, stage, /*write_decomposition=*/true);

    stage = "manifold";
    const EvModel fitted = SemiparamLn{LnSpectral{c.fit.sigma}, c.rule};
    const std::vector<double> qg = cfg.q_grid.empty() ? default_q_grid() : cfg.q_grid;
    const std::vector<double> xg = cfg.x_grid.empty() ? default_x_grid() : cfg.x_grid;
    const RegressionManifold man = build_manifold(fitted, qg, xg, cfg.solver);
    const RegressionManifold man_orig =
        manifold_to_original_scale(man, c.paired.x, c.paired.y);
    std::string mcsv = "q,x,y,scale\n";
    mcsv += detail::manifold_csv_rows(man, nullptr);
    mcsv += detail::manifold_csv_rows(man_orig, nullptr);
    atomic_write(detail::join_path(cfg.out_dir, "manifold.csv"), mcsv);

    stage = "quantile-table";
    std::vector<double> levels = cfg.table_x;
    if (levels.empty()) {
      const EmpiricalCdf ex(c.paired.x);
      for (double q : cfg.table_q) levels.push_back(ex.quantile(q));
    }
    const QuantileTable tab = predict_quantile_table(fitted, levels, cfg.table_q, c.paired.x,
                                                     c.paired.y, cfg.solver);
    atomic_write(detail::join_path(cfg.out_dir, "quantile_table.txt"),
                 format_quantile_table(tab));

    stage = "summary";
    ordered_json s = detail::fit_summary_json(cfg, c, "analyze");
    s["manifold"] = {{"q_grid", qg}, {"x_grid", xg}};
    s["quantile_table"] = {{"q_levels", cfg.table_q}, {"x_levels", levels}};
    s["artifacts"] = {"decomposition.csv", "angles.csv",        "density_band.csv",
                      "manifold.csv",      "quantile_table.txt", "scores.csv",
                      "summary.json"};
    detail::write_json(detail::join_path(cfg.out_dir, "summary.json"), s);
  } catch (const usage_error& e) {
    detail::stage_failure(cfg.out_dir, stage, e, true, false);
  } catch (const data_error& e) {
    detail::stage_failure(cfg.out_dir, stage, e, false, true);
  } catch (const std::exception& e) {
    detail::stage_failure(cfg.out_dir, stage, e, false, false);
  }
}

// Builds a manifold for an explicitly parameterized model, or for the fitted
// model recorded in a prior run summary.
inline void run_manifold(const RunConfig& cfg) {
  cfg.validate();
  detail::ensure_out_dir(cfg.out_dir);

  RunConfig eff = cfg;
  if (!cfg.summary_paths.empty()) {
    if (cfg.summary_paths.size() != 1) {
      throw usage_error("manifold accepts exactly one --summary input");
    }
    std::ifstream in(cfg.summary_paths.front());
    if (!in) throw data_error("cannot open summary " + cfg.summary_paths.front());
    ordered_json s;
    try {
      in >> s;
    } catch (const std::exception& e) {
      throw data_error("summary is not valid JSON: " + std::string(e.what()));
    }
    if (!s.contains("fit") || !s["fit"].contains("sigma_hat")) {
      throw data_error("summary lacks a fitted sigma; run fit or analyze first");
    }
    eff.model = "semiparam";
    eff.sigma = s["fit"]["sigma_hat"].get<double>();
  }

  const EvModel model = model_from_config(eff);
  const std::vector<double> qg = eff.q_grid.empty() ? default_q_grid() : eff.q_grid;
  const std::vector<double> xg = eff.x_grid.empty() ? default_x_grid() : eff.x_grid;
  if (eff.approx && eff.model != "logistic") {
    throw usage_error("--approx applies only to the logistic model");
  }
  if (eff.approx && !(eff.alpha > 0.0 && eff.alpha < 1.0)) {
    throw usage_error("--approx needs alpha strictly inside (0,1)");
  }

  const RegressionManifold man = build_manifold(model, qg, xg, eff.solver);
  std::string csv;
  if (eff.approx) {
    std::vector<std::vector<double>> approx(qg.size(), std::vector<double>(xg.size()));
    for (std::size_t i = 0; i < qg.size(); ++i) {
      for (std::size_t j = 0; j < xg.size(); ++j) {
        approx[i][j] = logistic_approx_line(eff.alpha, qg[i], xg[j]);
      }
    }
    csv = "q,x,y,scale,y_approx\n";
    csv += detail::manifold_csv_rows(man, &approx);
  } else {
    csv = "q,x,y,scale\n";
    csv += detail::manifold_csv_rows(man, nullptr);
  }
  atomic_write(detail::join_path(cfg.out_dir, "manifold.csv"), csv);

  ordered_json meta;
  meta["schema"] = 1;
  meta["command"] = "manifold";
  meta["model"] = eff.model;
  meta["params"] = model_params_json(eff);
  meta["q_grid"] = qg;
  meta["x_grid"] = xg;
  meta["solver"] = {{"rel_tol", eff.solver.rel_tol},
                    {"max_iter", eff.solver.max_iter},
                    {"bracket_growth", eff.solver.bracket_growth}};
  meta["approx"] = eff.approx;
  detail::write_json(detail::join_path(cfg.out_dir, "manifold_meta.json"), meta);
}

inline void run_compare(const RunConfig& cfg) {
  cfg.validate();
  if (cfg.summary_paths.size() < 2) {
    throw usage_error("compare needs at least two --summaries inputs");
  }
  detail::ensure_out_dir(cfg.out_dir);
  std::vector<ModelScore> scores;
  for (const std::string& path : cfg.summary_paths) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open summary " + path);
    ordered_json s;
    try {
      in >> s;
    } catch (const std::exception& e) {
      throw data_error("summary " + path + " is not valid JSON: " + std::string(e.what()));
    }
    if (!s.contains("score")) throw data_error("summary " + path + " lacks a score block");
    const auto& sc = s["score"];
    ModelScore m;
    m.model_name = sc.at("model").get<std::string>();
    m.k = sc.at("k").get<int>();
    m.n = sc.at("n").get<std::size_t>();
    m.loglik = sc.at("loglik").get<double>();
    m.aic = sc.at("aic").get<double>();
    m.bic = sc.at("bic").get<double>();
    scores.push_back(std::move(m));
  }
  const Comparison c = compare(scores);
  atomic_write(detail::join_path(cfg.out_dir, "comparison.csv"), comparison_to_csv(c));
  atomic_write(detail::join_path(cfg.out_dir, "comparison.txt"), format_comparison(c));
}

}  // namespace evmanifold
