#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evmanifold/pipeline.hpp"

namespace {

using evmanifold::RunConfig;

// --config is honored before CLI11 binds defaults, so the precedence ends up
// flags > config file > built-in defaults without any post-parse merging.
std::string find_config_flag(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return argv[i + 1];
    if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
  }
  return {};
}

void add_model_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--model", cfg.model, "Dependence model: logistic | hr | ct | semiparam");
  cmd->add_option("--alpha", cfg.alpha, "Logistic or Coles-Tawn alpha");
  cmd->add_option("--beta", cfg.beta, "Coles-Tawn beta");
  cmd->add_option("--lambda", cfg.lambda, "Husler-Reiss lambda");
  cmd->add_option("--sigma", cfg.sigma, "Logistic-Normal spectral sigma");
}

void add_ts_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--window-years", cfg.ts.w_years, "Trend/variance window in years");
  cmd->add_option("--season-window-days", cfg.ts.wsn_days, "Sub-annual variance window in days");
  cmd->add_option("--smoothing-ratio", cfg.ts.l, "Variance smoothing divisor");
  cmd->add_flag("--extra-smoothing", cfg.ts.extra_smoothing, "Second variance smoothing pass");
  cmd->add_option("--seasonality", cfg.seasonality, "Seasonal components: auto | on | off");
  cmd->add_flag_callback(
      "--no-seasonality", [&cfg] { cfg.seasonality = "off"; },
      "Disable seasonal components (same as --seasonality off)");
}

void add_fit_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--blocks", cfg.blocks, "Block maxima before fitting: none | year | month");
  cmd->add_option("--threshold", cfg.threshold, "Radius quantile for pseudo-angle exceedances");
  cmd->add_flag("--posterior,!--no-posterior", cfg.posterior, "Sample the sigma posterior band");
  cmd->add_option("--mcmc-iters", cfg.mcmc_iters, "Metropolis iterations");
  cmd->add_option("--mcmc-burnin", cfg.mcmc_burnin, "Metropolis burn-in");
  cmd->add_option("--k", cfg.k_params, "Parameter count used in AIC/BIC");
  cmd->add_option("--seed", cfg.seed, "Seed for the posterior sampler");
}

void add_grid_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--q-grid", cfg.q_grid, "Quantile levels of the manifold")->expected(1, -1);
  cmd->add_option("--x-grid", cfg.x_grid, "Conditioning grid (Frechet scale)")->expected(1, -1);
  cmd->add_option("--quad-nodes", cfg.quad_nodes, "Gauss quadrature size");
  cmd->add_option("--rel-tol", cfg.solver.rel_tol, "Quantile solver relative tolerance");
  cmd->add_option("--max-iter", cfg.solver.max_iter, "Quantile solver iteration cap");
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  try {
    const std::string config_path = find_config_flag(argc, argv);
    if (!config_path.empty()) evmanifold::load_config_file(cfg, config_path);
    evmanifold::apply_env_overrides(cfg);
  } catch (const evmanifold::usage_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const evmanifold::data_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }

  CLI::App app{"Regression manifolds for non-stationary bivariate extremes"};
  app.require_subcommand(1);
  std::string config_path_sink;
  app.add_option("--config", config_path_sink, "JSON config file (flags take precedence)");

  CLI::App* sim = app.add_subcommand("simulate", "Draw a synthetic non-stationary scenario");
  add_model_flags(sim, cfg);
  sim->add_option("--n", cfg.n, "Number of paired observations");
  sim->add_option("--seed", cfg.seed, "Random seed");
  sim->add_option("--trend-amp", cfg.trend_amp, "Linear trend amplitude on the data scale");
  sim->add_option("--season-amp", cfg.season_amp, "Annual cycle amplitude on the data scale");
  sim->add_option("--resolution", cfg.resolution, "Timestamp spacing: month | year");
  sim->add_option("--out-dir", cfg.out_dir, "Output directory");
  sim->add_option("--quad-nodes", cfg.quad_nodes, "Gauss quadrature size (semiparam model)");

  CLI::App* stat = app.add_subcommand("stationarize", "Decompose one series into trend/season/variance");
  stat->add_option("--input", cfg.input_path, "Input series CSV (date,value)");
  stat->add_option("--out-dir", cfg.out_dir, "Output directory");
  add_ts_flags(stat, cfg);

  CLI::App* fit = app.add_subcommand("fit", "Fit the spectral dependence model to two margins");
  fit->add_option("--x", cfg.x_path, "First margin CSV");
  fit->add_option("--y", cfg.y_path, "Second margin CSV");
  fit->add_option("--out-dir", cfg.out_dir, "Output directory");
  add_ts_flags(fit, cfg);
  add_fit_flags(fit, cfg);
  fit->add_option("--quad-nodes", cfg.quad_nodes, "Gauss quadrature size");

  CLI::App* man = app.add_subcommand("manifold", "Evaluate conditional-quantile regression lines");
  add_model_flags(man, cfg);
  man->add_option("--summary", cfg.summary_paths, "Fitted run summary JSON to take the model from")
      ->expected(1);
  man->add_flag("--approx", cfg.approx, "Also emit the closed-form logistic approximation");
  man->add_option("--out-dir", cfg.out_dir, "Output directory");
  add_grid_flags(man, cfg);

  CLI::App* cmp = app.add_subcommand("compare", "Rank fitted models by AIC/BIC");
  cmp->add_option("--summaries", cfg.summary_paths, "Two or more run summary JSON files")
      ->expected(2, -1);
  cmp->add_option("--out-dir", cfg.out_dir, "Output directory");

  CLI::App* ana = app.add_subcommand("analyze", "Full pipeline: stationarize, fit, manifold, tables");
  ana->add_option("--x", cfg.x_path, "First margin CSV");
  ana->add_option("--y", cfg.y_path, "Second margin CSV");
  ana->add_option("--out-dir", cfg.out_dir, "Output directory");
  add_ts_flags(ana, cfg);
  add_fit_flags(ana, cfg);
  add_grid_flags(ana, cfg);
  ana->add_option("--table-q", cfg.table_q, "Quantile levels of the prediction table")
      ->expected(1, -1);
  ana->add_option("--table-x", cfg.table_x, "Conditioning levels (data scale) of the table")
      ->expected(1, -1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) {
      evmanifold::run_simulate(cfg);
    } else if (stat->parsed()) {
      evmanifold::run_stationarize(cfg);
    } else if (fit->parsed()) {
      evmanifold::run_fit(cfg);
    } else if (man->parsed()) {
      if (cfg.approx) {
        const auto xg = cfg.x_grid.empty() ? evmanifold::default_x_grid() : cfg.x_grid;
        if (!xg.empty() && xg.front() < 10.0) {
          std::fprintf(stderr,
                       "warning: the logistic approximation is asymptotic; values below x=10 "
                       "can be far from the exact line\n");
        }
      }
      evmanifold::run_manifold(cfg);
    } else if (cmp->parsed()) {
      evmanifold::run_compare(cfg);
    } else if (ana->parsed()) {
      evmanifold::run_analyze(cfg);
    }
  } catch (const evmanifold::usage_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const evmanifold::data_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const evmanifold::numeric_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 4;
  }
  return 0;
}
