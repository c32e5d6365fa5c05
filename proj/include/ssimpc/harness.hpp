#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ssimpc/config.hpp"
#include "ssimpc/controller.hpp"
#include "ssimpc/metrics.hpp"

namespace ssimpc {

/// Summary row of one executed episode.
struct EpisodeResult {
  std::string csv_path;
  ControllerKind controller = ControllerKind::ssi_mpc;
  int feature_count = 0;
  double learning_rate = 0.0;  // grid value, before any horizon scaling
  int repeat = 0;
  std::uint64_t seed = 0;
  int steps = 0;
  bool failed = false;
  double cumulative_cost = 0.0;
  double cumulative_state_sq = 0.0;
  double rmse_reference = 0.0;
};

struct RunArtifacts {
  std::string output_dir;
  std::vector<EpisodeResult> episodes;
  std::string summary_path;
  std::string digest_path;
  int failures = 0;
};

struct RegretArtifacts {
  std::string output_dir;
  std::vector<int> horizons;
  std::vector<double> median_regret;
  std::vector<double> median_regret_per_step;
  SlopeFit fit;
  int failures = 0;
  std::string csv_path;
  std::string summary_path;
};

/// Renders the canonical per-episode CSV: columns
/// t, x0..x{d_x-1}, u0..u{d_u-1}, residual0..residual{d_x-1}, l_t,
/// stage_cost, V_t, solver_iters, converged — one row per logged step,
/// doubles printed with full round-trip precision.
std::string episode_csv(const TrajectoryLog& log);

/// Writes content to path via a temporary file and rename, so the final
/// path never holds a partial file.
void write_file_atomic(const std::string& path, const std::string& content);

/// Executes the scenario's repeats (single grid point) across up to
/// `workers` threads. Episode e of scenario `name` uses the derived seed
/// stream (master, name, e) regardless of controller settings. Writes one
/// CSV per episode plus summary.csv and digest.json under the output
/// directory.
RunArtifacts run_scenario(const ScenarioConfig& cfg, int workers);

/// Like run_scenario but over the sweep grid (feature_counts x
/// learning_rates); requires the scenario's sweep block. Repeat seeds are
/// shared across grid points so every (M, eta) cell sees the same noise and
/// initial-state realizations.
RunArtifacts run_sweep(const ScenarioConfig& cfg, int workers);

/// Paired learning-vs-clairvoyant runs at each horizon with shared seeds;
/// reports the cumulative stage-cost gap per horizon, its medians over
/// repeats, and a log-log slope fit of median gap against horizon.
RegretArtifacts run_regret(const ScenarioConfig& cfg,
                           const std::vector<int>& horizons, int workers);

/// Renders SVG plots from a previously written artifacts directory.
/// Supported kinds: "error" (state norm vs step), "prediction_error"
/// (estimation loss vs step), "cumulative" (cumulative state error vs
/// feature count, one series per learning rate), "regret" (median gap vs
/// horizon, log-log, with the fitted power law overlaid). Returns the
/// files written; kinds with no data are skipped with a note in
/// plots_digest.txt. Throws on an unknown kind.
std::vector<std::string> emit_plots(const std::string& artifacts_dir,
                                    const std::vector<std::string>& kinds);

}  // namespace ssimpc
