#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "ssimpc/estimator.hpp"
#include "ssimpc/mpc.hpp"
#include "ssimpc/plants.hpp"

namespace ssimpc {

/// ssi_mpc learns the residual online and plans with it; nominal_mpc plans
/// with the known model only; clairvoyant_mpc plans with the plant's true
/// residual function and serves as the benchmark the regret accounting
/// compares against.
enum class ControllerKind { ssi_mpc, nominal_mpc, clairvoyant_mpc };

/// Componentwise-uniform box sampler for the initial state.
struct InitialStateSpec {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

/// Everything needed to run one closed-loop episode. The master seed is the
/// single source of randomness: feature sampling, initial state, and
/// process noise each draw from their own derived stream, so e.g. changing
/// feature_count never perturbs the noise realization.
struct EpisodeConfig {
  PlantModel truth;
  PlantModel nominal;
  NoiseSpec noise;
  ControllerKind controller = ControllerKind::ssi_mpc;

  int feature_count = 75;
  LearningRateSpec learning_rate;
  double radius_bh = 10.0;
  double bandwidth_sigma = 1.0;
  Eigen::VectorXd feature_scales;  // per-component z normalization; empty = ones

  int horizon = 20;
  Eigen::MatrixXd Q, R, Q_terminal;
  /// Reference at global step t (not horizon index); consulted for
  /// t = 0 .. t_steps + horizon.
  std::function<void(int, Eigen::VectorXd&, Eigen::VectorXd&)> reference;

  int t_steps = 90;
  InitialStateSpec init;
  /// State components entering the summary tracking RMSE; empty = all.
  std::vector<int> rmse_components;
  SolverOptions solver;
  std::uint64_t master_seed = 0;
};

struct StepRecord {
  int t = 0;
  Eigen::VectorXd x;         // state when the input was chosen
  Eigen::VectorXd u;         // applied input
  Eigen::VectorXd residual;  // observed one-step disturbance
  double estimation_loss = 0.0;
  double stage_cost = 0.0;
  double objective = 0.0;  // planner optimal cost from x
  int solver_iters = 0;
  bool converged = false;
};

struct TrajectoryLog {
  std::vector<StepRecord> steps;
  double cumulative_cost = 0.0;
  double cumulative_state_sq = 0.0;
  double rmse_reference = 0.0;
  ParamEstimate final_params;
  bool params_always_feasible = true;
  bool failed = false;
  int state_dim = 0;
  int input_dim = 0;
};

/// Componentwise uniform draw from [lower, upper]; a degenerate component
/// range [a, a] yields exactly a.
Eigen::VectorXd initial_state_sample(const InitialStateSpec& spec,
                                     std::mt19937_64& engine);

/// Runs one closed-loop episode: at each step, solve the receding-horizon
/// problem with the current disturbance model, apply the first input to the
/// true system, observe the one-step residual, and (for ssi_mpc) take one
/// projected-gradient estimator step. A diverged planner aborts the episode
/// with a partial log flagged failed.
TrajectoryLog run_episode(const EpisodeConfig& cfg);

/// Runs the algorithm and benchmark configurations with identical noise and
/// initial-state realizations (same master seed, same derived streams) but
/// independent closed-loop trajectories. The configs must agree on
/// everything except the controller kind.
std::pair<TrajectoryLog, TrajectoryLog> run_paired(
    const EpisodeConfig& cfg_alg, const EpisodeConfig& cfg_oracle);

}  // namespace ssimpc
