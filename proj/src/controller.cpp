#include "ssimpc/controller.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "ssimpc/rff.hpp"
#include "ssimpc/rng.hpp"

namespace ssimpc {

Eigen::VectorXd initial_state_sample(const InitialStateSpec& spec,
                                     std::mt19937_64& engine) {
  if (spec.lower.size() != spec.upper.size()) {
    throw std::invalid_argument(
        "initial_state_sample: lower/upper size mismatch");
  }
  const Eigen::Index n = spec.lower.size();
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lo = spec.lower(i);
    const double hi = spec.upper(i);
    if (lo > hi) {
      throw std::invalid_argument(
          "initial_state_sample: lower bound exceeds upper bound");
    }
    if (lo == hi) {
      x(i) = lo;
    } else {
      x(i) = std::uniform_real_distribution<double>(lo, hi)(engine);
    }
  }
  return x;
}

namespace {

void check_config(const EpisodeConfig& cfg) {
  cfg.truth.validate();
  cfg.nominal.validate();
  if (cfg.truth.state_dim != cfg.nominal.state_dim ||
      cfg.truth.input_dim != cfg.nominal.input_dim) {
    throw std::invalid_argument("run_episode: truth/nominal dimension mismatch");
  }
  if (cfg.truth.dt != cfg.nominal.dt) {
    throw std::invalid_argument("run_episode: truth/nominal dt mismatch");
  }
  if (cfg.feature_count <= 0) {
    throw std::invalid_argument("run_episode: feature_count must be positive");
  }
  if (!(cfg.radius_bh > 0.0)) {
    throw std::invalid_argument("run_episode: radius_bh must be positive");
  }
  if (!(cfg.bandwidth_sigma > 0.0)) {
    throw std::invalid_argument(
        "run_episode: bandwidth_sigma must be positive");
  }
  if (cfg.t_steps <= 0) {
    throw std::invalid_argument("run_episode: t_steps must be positive");
  }
  if (!cfg.reference) {
    throw std::invalid_argument("run_episode: reference is required");
  }
  for (int c : cfg.rmse_components) {
    if (c < 0 || c >= cfg.truth.state_dim) {
      throw std::invalid_argument(
          "run_episode: rmse component index out of range");
    }
  }
}

Eigen::VectorXd resolve_scales(const EpisodeConfig& cfg, int d_z) {
  if (cfg.feature_scales.size() == 0) {
    return Eigen::VectorXd::Ones(d_z);
  }
  if (cfg.feature_scales.size() != d_z) {
    throw std::invalid_argument(
        "run_episode: feature_scales size does not match the lifted input");
  }
  if ((cfg.feature_scales.array() <= 0.0).any()) {
    throw std::invalid_argument(
        "run_episode: feature_scales must be positive");
  }
  return cfg.feature_scales;
}

}  // namespace

TrajectoryLog run_episode(const EpisodeConfig& cfg) {
  check_config(cfg);
  const int d_x = cfg.truth.state_dim;
  const int d_u = cfg.truth.input_dim;
  const int d_z = cfg.nominal.features.feature_dim();
  const int big_m = cfg.feature_count;

  const Eigen::VectorXd scales = resolve_scales(cfg, d_z);
  // Fold the normalization into the extraction maps so both planner and
  // estimator see the same scaled lifted input.
  const Eigen::MatrixXd sx =
      scales.cwiseInverse().asDiagonal() * cfg.nominal.features.from_state;
  const Eigen::MatrixXd su =
      scales.cwiseInverse().asDiagonal() * cfg.nominal.features.from_input;

  const double eta = cfg.learning_rate.resolve(cfg.t_steps);
  const KernelSpec kernel{KernelSpec::Kind::gaussian, cfg.bandwidth_sigma,
                          d_z};
  const FeatureSet features = FeatureSet::sample(
      kernel, big_m, rng::derive(cfg.master_seed, "features"));

  auto init_engine = rng::engine(cfg.master_seed, "init");
  auto noise_engine = rng::engine(cfg.master_seed, "noise");
  Eigen::VectorXd x = initial_state_sample(cfg.init, init_engine);
  if (x.size() != d_x) {
    throw std::invalid_argument(
        "run_episode: initial-state box does not match the state dimension");
  }

  EstimatorState est = EstimatorState::zero(d_x, big_m, cfg.radius_bh, eta);

  CostSpec cost;
  cost.Q = cfg.Q;
  cost.R = cfg.R;
  cost.Q_terminal = cfg.Q_terminal.size() == 0 ? cfg.Q : cfg.Q_terminal;
  // The loop below re-points the reference at each global step; install the
  // unshifted form first so the full cost (including the reference) is
  // validated before any solve.
  cost.reference = [&cfg, d_x, d_u](int k, Eigen::VectorXd& xr,
                                    Eigen::VectorXd& ur) {
    xr.resize(d_x);
    ur.resize(d_u);
    cfg.reference(k, xr, ur);
  };
  cost.validate(d_x, d_u);

  MpcProblem problem;
  problem.horizon = cfg.horizon;
  problem.state_dim = d_x;
  problem.input_dim = d_u;
  problem.input_lower = cfg.nominal.input_lower;
  problem.input_upper = cfg.nominal.input_upper;
  problem.options = cfg.solver;
  problem.model.base = discrete_map(cfg.nominal);
  if (cfg.controller == ControllerKind::clairvoyant_mpc &&
      cfg.truth.true_disturbance) {
    const auto residual_fn = cfg.truth.true_disturbance;
    const FeatureMap raw = cfg.truth.features;
    problem.model.known_residual =
        [residual_fn, raw](const Eigen::VectorXd& xs,
                           const Eigen::VectorXd& us) {
          return residual_fn(raw.extract(xs, us));
        };
  }

  TrajectoryLog log;
  log.state_dim = d_x;
  log.input_dim = d_u;
  log.steps.reserve(static_cast<std::size_t>(cfg.t_steps));

  double rmse_accum = 0.0;
  std::optional<MpcSolution> prev;
  Eigen::VectorXd x_ref(d_x), u_ref(d_u);

  for (int t = 0; t < cfg.t_steps; ++t) {
    if (cfg.controller == ControllerKind::ssi_mpc) {
      problem.model.learned = LearnedTerm{features, est.params, sx, su};
    }
    cost.reference = [&cfg, t, d_x, d_u](int k, Eigen::VectorXd& xr,
                                         Eigen::VectorXd& ur) {
      xr.resize(d_x);
      ur.resize(d_u);
      cfg.reference(t + k, xr, ur);
    };
    problem.cost = cost;

    auto [u, sol] = receding_step(problem, x, prev ? &*prev : nullptr);
    if (!std::isfinite(sol.objective)) {
      log.failed = true;
      break;
    }

    Eigen::VectorXd x_next;
    try {
      x_next = step_truth(cfg.truth, cfg.noise, x, u, noise_engine);
    } catch (const std::runtime_error&) {
      log.failed = true;
      break;
    }
    const Eigen::VectorXd residual = observe_residual(cfg.nominal, x, u, x_next);

    const Eigen::VectorXd z = sx * x + su * u;
    const Observation obs{features.evaluate(z), residual};

    StepRecord rec;
    rec.t = t;
    rec.x = x;
    rec.u = u;
    rec.residual = residual;
    switch (cfg.controller) {
      case ControllerKind::ssi_mpc:
      case ControllerKind::nominal_mpc:
        rec.estimation_loss = loss(est, obs);
        break;
      case ControllerKind::clairvoyant_mpc:
        rec.estimation_loss = 0.0;
        break;
    }
    cfg.reference(t, x_ref, u_ref);
    const Eigen::VectorXd ex = x - x_ref;
    const Eigen::VectorXd eu = u - u_ref;
    rec.stage_cost = ex.dot(cost.Q * ex) + eu.dot(cost.R * eu);
    rec.objective = sol.objective;
    rec.solver_iters = sol.iterations;
    rec.converged = sol.converged;
    log.steps.push_back(rec);

    log.cumulative_cost += rec.stage_cost;
    log.cumulative_state_sq += x.squaredNorm();
    if (cfg.rmse_components.empty()) {
      rmse_accum += ex.squaredNorm();
    } else {
      for (int c : cfg.rmse_components) {
        rmse_accum += ex(c) * ex(c);
      }
    }

    if (cfg.controller == ControllerKind::ssi_mpc) {
      est = update(est, obs);
      if (!est.params.feasible()) {
        log.params_always_feasible = false;
      }
    }

    x = x_next;
    prev = std::move(sol);
  }

  log.final_params = est.params;
  if (!log.steps.empty()) {
    rmse_accum /= static_cast<double>(log.steps.size());
  }
  log.rmse_reference = std::sqrt(rmse_accum);
  return log;
}

std::pair<TrajectoryLog, TrajectoryLog> run_paired(
    const EpisodeConfig& cfg_alg, const EpisodeConfig& cfg_oracle) {
  if (cfg_alg.master_seed != cfg_oracle.master_seed) {
    throw std::invalid_argument("run_paired: configurations must share a seed");
  }
  if (cfg_alg.t_steps != cfg_oracle.t_steps) {
    throw std::invalid_argument("run_paired: horizon lengths differ");
  }
  if (cfg_alg.truth.state_dim != cfg_oracle.truth.state_dim ||
      cfg_alg.truth.input_dim != cfg_oracle.truth.input_dim ||
      cfg_alg.truth.dt != cfg_oracle.truth.dt) {
    throw std::invalid_argument("run_paired: plants differ between configs");
  }
  return {run_episode(cfg_alg), run_episode(cfg_oracle)};
}

}  // namespace ssimpc
