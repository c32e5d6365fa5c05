#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ssimpc/rff.hpp"

namespace ssimpc {

/// Learning-rate schedule: either a fixed step or a step that shrinks with
/// the episode horizon as value / sqrt(T).
struct LearningRateSpec {
  enum class Mode { fixed, horizon_scaled };

  Mode mode = Mode::fixed;
  double value = 0.25;  // the step itself, or the constant c in c / sqrt(T)

  double resolve(int horizon_steps) const;
};

/// One supervised sample for the online estimator: the feature vector
/// evaluated at z_t and the observed one-step residual at that point.
struct Observation {
  Eigen::VectorXd features_at_z;  // R^M
  Eigen::VectorXd target;         // R^{d_h}
};

/// Running state of the projected online-gradient estimator. A value type:
/// update() returns the successor state and leaves its argument untouched.
struct EstimatorState {
  ParamEstimate params;
  double learning_rate = 0.25;
  long step_count = 0;
  double cumulative_loss = 0.0;

  static EstimatorState zero(int output_dim, int count, double radius_bh,
                             double learning_rate);
};

/// Squared Euclidean distance between the observed target and the current
/// model output at the observed features.
double loss(const EstimatorState& state, const Observation& obs);

/// Exact gradient of loss() with respect to the coefficient blocks:
/// row r = -(2/M) * (target_r - prediction_r) * features'.
Eigen::MatrixXd gradient(const EstimatorState& state, const Observation& obs);

/// Clamps every coefficient into [-radius_bh, radius_bh]. Idempotent and
/// non-expansive in the Euclidean norm.
ParamEstimate project(ParamEstimate params);

/// One online step: gradient descent followed by the box projection.
/// Increments step_count and accrues loss(state, obs) into cumulative_loss.
EstimatorState update(const EstimatorState& state, const Observation& obs);

/// Best fixed coefficients in hindsight for the batch least-squares problem
/// min over the box of sum_t ||targets_t - blocks * feature_rows_t' / M||^2.
/// Solved in closed form when the unconstrained minimizer is feasible,
/// otherwise by accelerated projected gradient descent (tolerance 1e-8,
/// at most 1e5 iterations). Rank-deficient systems resolve to a jittered
/// minimum-norm solution.
Eigen::MatrixXd batch_optimum(const Eigen::MatrixXd& feature_rows,
                              const Eigen::MatrixXd& targets,
                              double radius_bh);

/// Batch loss of a fixed coefficient matrix over the whole stream.
double batch_loss(const Eigen::MatrixXd& blocks,
                  const Eigen::MatrixXd& feature_rows,
                  const Eigen::MatrixXd& targets);

/// Cumulative online loss minus the batch loss of the best fixed
/// coefficients in hindsight.
double static_regret(const std::vector<double>& losses_online,
                     const Eigen::MatrixXd& feature_rows,
                     const Eigen::MatrixXd& targets, double radius_bh);

}  // namespace ssimpc
