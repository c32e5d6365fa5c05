#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <random>

namespace ssimpc {

/// Linear feature extraction z = from_state * x + from_input * u. Keeping
/// the map linear gives the trajectory solver an exact chain rule through z.
struct FeatureMap {
  Eigen::MatrixXd from_state;  // d_z x d_x
  Eigen::MatrixXd from_input;  // d_z x d_u

  int feature_dim() const { return static_cast<int>(from_state.rows()); }

  Eigen::VectorXd extract(const Eigen::VectorXd& x,
                          const Eigen::VectorXd& u) const;
};

/// A simulated control-affine system. nominal_deriv is the known continuous
/// model; true_disturbance (when present) is the one-step residual of the
/// real system against the discretized nominal model, expressed as a
/// function of the feature vector z. post_step (when present) is applied
/// after every discrete step, e.g. to renormalize a quaternion.
struct PlantModel {
  int state_dim = 0;
  int input_dim = 0;

  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>
      nominal_deriv;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> input_matrix;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> true_disturbance;
  FeatureMap features;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> post_step;
  /// Optional strict validation of states fed to the real system (e.g. a
  /// unit-quaternion check); applied on entry to step_truth only, so that
  /// model-side rollouts may pass slightly perturbed states.
  std::function<void(const Eigen::VectorXd&)> state_check;

  Eigen::VectorXd input_lower, input_upper;
  double dt = 0.0;

  int feature_dim() const { return features.feature_dim(); }

  /// Throws when dimensions, bounds, or dt are inconsistent.
  void validate() const;
};

/// Additive per-step process noise.
struct NoiseSpec {
  enum class Kind { none, gaussian, bounded_uniform };

  Kind kind = Kind::none;
  Eigen::VectorXd scale;  // per-component std (gaussian) or half-width
  std::uint64_t seed = 0;

  static NoiseSpec none_noise();
  static NoiseSpec gaussian(const Eigen::VectorXd& scale, std::uint64_t seed);
  static NoiseSpec bounded_uniform(const Eigen::VectorXd& scale,
                                   std::uint64_t seed);
};

/// Draws one noise vector of dimension dim, advancing the engine. The
/// engine is consumed identically (dim draws) for both random kinds so that
/// paired episodes see the same realization.
Eigen::VectorXd draw_noise(const NoiseSpec& noise, int dim,
                           std::mt19937_64& engine);

/// Classical fourth-order Runge-Kutta update of xdot = deriv(x, u) with u
/// held constant over the step. Throws on non-finite intermediates.
Eigen::VectorXd rk4_step(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&,
                                        const Eigen::VectorXd&)>& deriv,
    const Eigen::VectorXd& x, const Eigen::VectorXd& u, double dt);

/// One discrete step of the known model: RK4 over plant.dt followed by
/// post_step when the plant defines one.
Eigen::VectorXd nominal_discrete(const PlantModel& plant,
                                 const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& u);

/// Self-contained copy of the nominal discrete map without the input-box
/// guard of nominal_discrete: predictive rollouts must be differentiable in
/// a neighborhood of the box, including marginally outside it.
std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>
discrete_map(const PlantModel& plant);

/// One discrete step of the real system: the nominal step plus the true
/// residual plus process noise, then post_step. Advances the noise engine.
Eigen::VectorXd step_truth(const PlantModel& plant, const NoiseSpec& noise,
                           const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                           std::mt19937_64& engine);

/// Recovers the residual the estimator learns from: the realized next state
/// minus the nominal one-step prediction.
Eigen::VectorXd observe_residual(const PlantModel& plant,
                                 const Eigen::VectorXd& x_t,
                                 const Eigen::VectorXd& u_t,
                                 const Eigen::VectorXd& x_next);

}  // namespace ssimpc
