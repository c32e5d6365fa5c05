#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ssimpc/controller.hpp"
#include "ssimpc/reference.hpp"

namespace ssimpc {

/// Plant block of a scenario. Exactly one plant family is active; the
/// inactive family's fields are ignored and not serialized.
struct PlantConfig {
  enum class Type { cartpole, quadrotor };

  Type type = Type::cartpole;
  double rate_hz = 15.0;  // control rate; dt = 1 / rate_hz

  // cart-pole family
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double half_length = 0.5;
  double gravity = 9.81;
  double nominal_scale = 0.75;  // known-model parameter scaling in (0, 1]
  double force_limit = 30.0;

  // quadrotor family
  double mass = 0.68;
  double drag_coefficient = 0.3;  // isotropic body-frame drag D = c * I
  bool drag = true;               // model mismatch on/off
  double thrust_max = 2.0 * 0.68 * 9.81;
  double omega_max = 3.0;

  double dt() const { return 1.0 / rate_hz; }
};

struct NoiseConfig {
  NoiseSpec::Kind kind = NoiseSpec::Kind::none;
  Eigen::VectorXd scale;  // per state component, sized d_x after parsing
};

struct ControllerConfig {
  ControllerKind kind = ControllerKind::ssi_mpc;
  int feature_count = 75;
  LearningRateSpec learning_rate{LearningRateSpec::Mode::fixed, 0.25};
  double radius_bh = 10.0;
  int horizon = 20;
  Eigen::VectorXd q_diag;
  Eigen::VectorXd r_diag;
  Eigen::VectorXd q_terminal_diag;  // defaults to q_diag
  double bandwidth_sigma = 1.0;
  Eigen::VectorXd feature_scales;  // per z component, defaults to ones
  SolverOptions solver;
};

struct RunConfig {
  int steps = 90;  // accepted as "steps" or "duration_seconds" in the file
  int repeats = 10;
  std::uint64_t master_seed = 1;
  std::string output_dir = "artifacts";
};

struct SweepConfig {
  std::vector<int> feature_counts;
  std::vector<double> learning_rates;
};

struct ScenarioConfig {
  std::string name = "scenario";
  PlantConfig plant;
  NoiseConfig noise;
  ControllerConfig controller;
  ReferenceSpec reference;
  InitialStateSpec init;
  RunConfig run;
  bool has_sweep = false;
  SweepConfig sweep;
};

/// Parses a JSON scenario. Strict: any unknown key fails with the key's
/// full path named; range violations fail with the offending value. All
/// defaults (which depend on the plant type) are filled in, so
/// serialize_config() echoes a fully explicit document.
ScenarioConfig parse_config(const std::string& text);

/// Canonical JSON form: fixed key order, every field explicit. Parsing the
/// result reproduces the config exactly, and serialization is
/// byte-deterministic.
std::string serialize_config(const ScenarioConfig& cfg);

ScenarioConfig load_config_file(const std::string& path);

/// Instantiates the plants, cost, reference, and loop settings of the
/// scenario into a runnable episode. The explicit overrides exist for
/// sweep grids and paired baseline runs; the two-argument form uses the
/// scenario's own controller block.
EpisodeConfig assemble_episode(const ScenarioConfig& cfg,
                               std::uint64_t master_seed, ControllerKind kind,
                               int feature_count, const LearningRateSpec& lr);
EpisodeConfig assemble_episode(const ScenarioConfig& cfg,
                               std::uint64_t master_seed);

}  // namespace ssimpc
