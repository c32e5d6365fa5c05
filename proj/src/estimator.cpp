#include "ssimpc/estimator.hpp"

#include <cmath>
#include <stdexcept>

namespace ssimpc {

double LearningRateSpec::resolve(int horizon_steps) const {
  if (!(value > 0.0)) {
    throw std::invalid_argument("LearningRateSpec: value must be positive");
  }
  switch (mode) {
    case Mode::fixed:
      return value;
    case Mode::horizon_scaled:
      if (horizon_steps < 1) {
        throw std::invalid_argument(
            "LearningRateSpec: horizon_steps must be >= 1");
      }
      return value / std::sqrt(static_cast<double>(horizon_steps));
  }
  throw std::logic_error("LearningRateSpec: unreachable mode");
}

EstimatorState EstimatorState::zero(int output_dim, int count,
                                    double radius_bh, double learning_rate) {
  if (!(learning_rate >= 0.0)) {
    throw std::invalid_argument("EstimatorState: learning_rate must be >= 0");
  }
  EstimatorState s;
  s.params = ParamEstimate::zero(output_dim, count, radius_bh);
  s.learning_rate = learning_rate;
  return s;
}

namespace {

void check_observation(const EstimatorState& state, const Observation& obs) {
  if (obs.features_at_z.size() != state.params.count()) {
    throw std::invalid_argument("estimator: feature-count mismatch");
  }
  if (obs.target.size() != state.params.output_dim()) {
    throw std::invalid_argument("estimator: target-dimension mismatch");
  }
  if (!obs.features_at_z.allFinite() || !obs.target.allFinite()) {
    throw std::invalid_argument("estimator: non-finite observation");
  }
}

}  // namespace

double loss(const EstimatorState& state, const Observation& obs) {
  check_observation(state, obs);
  const Eigen::VectorXd pred =
      predict_from_features(state.params, obs.features_at_z);
  return (obs.target - pred).squaredNorm();
}

Eigen::MatrixXd gradient(const EstimatorState& state, const Observation& obs) {
  check_observation(state, obs);
  const Eigen::VectorXd pred =
      predict_from_features(state.params, obs.features_at_z);
  const Eigen::VectorXd residual = obs.target - pred;
  const double scale = -2.0 / static_cast<double>(state.params.count());
  return scale * residual * obs.features_at_z.transpose();
}

ParamEstimate project(ParamEstimate params) {
  const double r = params.radius_bh;
  params.blocks = params.blocks.cwiseMax(-r).cwiseMin(r);
  return params;
}

EstimatorState update(const EstimatorState& state, const Observation& obs) {
  const double step_loss = loss(state, obs);
  EstimatorState next = state;
  next.params.blocks -= state.learning_rate * gradient(state, obs);
  next.params = project(std::move(next.params));
  next.step_count = state.step_count + 1;
  next.cumulative_loss = state.cumulative_loss + step_loss;
  return next;
}

double batch_loss(const Eigen::MatrixXd& blocks,
                  const Eigen::MatrixXd& feature_rows,
                  const Eigen::MatrixXd& targets) {
  if (feature_rows.rows() != targets.rows()) {
    throw std::invalid_argument("batch_loss: row-count mismatch");
  }
  if (blocks.cols() != feature_rows.cols() || blocks.rows() != targets.cols()) {
    throw std::invalid_argument("batch_loss: shape mismatch");
  }
  const double m = static_cast<double>(feature_rows.cols());
  // Predictions for the whole stream at once: row t = model output at z_t.
  const Eigen::MatrixXd pred = feature_rows * blocks.transpose() / m;
  return (targets - pred).squaredNorm();
}

namespace {

// Accelerated projected gradient descent for one output dimension of the
// box-constrained batch problem min ||y - A b||^2, |b_i| <= r.
Eigen::VectorXd box_least_squares(const Eigen::MatrixXd& A,
                                  const Eigen::VectorXd& y, double r) {
  const Eigen::MatrixXd gram = A.transpose() * A;
  // Lipschitz constant of the gradient 2 A'(A b - y).
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram,
                                                     Eigen::EigenvaluesOnly);
  const double lipschitz = 2.0 * std::max(eig.eigenvalues().maxCoeff(), 1e-30);
  const Eigen::VectorXd rhs = A.transpose() * y;

  auto clamp = [r](Eigen::VectorXd v) {
    return v.cwiseMax(-r).cwiseMin(r).eval();
  };

  Eigen::VectorXd b = Eigen::VectorXd::Zero(A.cols());
  Eigen::VectorXd momentum = b;
  double t_acc = 1.0;
  const int max_iterations = 100000;
  for (int k = 0; k < max_iterations; ++k) {
    const Eigen::VectorXd grad = 2.0 * (gram * momentum - rhs);
    const Eigen::VectorXd next = clamp(momentum - grad / lipschitz);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_acc * t_acc));
    momentum = next + ((t_acc - 1.0) / t_next) * (next - b);
    const double change = (next - b).lpNorm<Eigen::Infinity>();
    b = next;
    t_acc = t_next;
    if (change <= 1e-8) {
      break;
    }
  }
  return b;
}

}  // namespace

Eigen::MatrixXd batch_optimum(const Eigen::MatrixXd& feature_rows,
                              const Eigen::MatrixXd& targets,
                              double radius_bh) {
  if (feature_rows.rows() != targets.rows() || feature_rows.rows() < 1) {
    throw std::invalid_argument("batch_optimum: need T >= 1 aligned rows");
  }
  if (!(radius_bh > 0.0)) {
    throw std::invalid_argument("batch_optimum: radius_bh must be positive");
  }
  const double m = static_cast<double>(feature_rows.cols());
  const Eigen::MatrixXd A = feature_rows / m;  // T x M
  const Eigen::MatrixXd gram = A.transpose() * A;
  const int cols = static_cast<int>(A.cols());

  // Unconstrained solve with a small jitter; also covers rank-deficient
  // streams with an (approximate) minimum-norm solution.
  const Eigen::MatrixXd regularized =
      gram + 1e-12 * Eigen::MatrixXd::Identity(cols, cols);
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(regularized);

  Eigen::MatrixXd blocks(targets.cols(), cols);
  for (int r = 0; r < targets.cols(); ++r) {
    const Eigen::VectorXd y = targets.col(r);
    const Eigen::VectorXd unconstrained = ldlt.solve(A.transpose() * y);
    if (unconstrained.lpNorm<Eigen::Infinity>() <= radius_bh) {
      blocks.row(r) = unconstrained.transpose();
    } else {
      blocks.row(r) = box_least_squares(A, y, radius_bh).transpose();
    }
  }
  return blocks;
}

double static_regret(const std::vector<double>& losses_online,
                     const Eigen::MatrixXd& feature_rows,
                     const Eigen::MatrixXd& targets, double radius_bh) {
  if (losses_online.size() != static_cast<std::size_t>(feature_rows.rows())) {
    throw std::invalid_argument("static_regret: loss/stream length mismatch");
  }
  const Eigen::MatrixXd best = batch_optimum(feature_rows, targets, radius_bh);
  double online_total = 0.0;
  for (double l : losses_online) {
    online_total += l;
  }
  return online_total - batch_loss(best, feature_rows, targets);
}

}  // namespace ssimpc
