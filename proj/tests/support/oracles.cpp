#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace oracles {

Eigen::MatrixXd finite_difference_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double eps) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd jac(f0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Eigen::VectorXd hi = x, lo = x;
    hi(j) += eps;
    lo(j) -= eps;
    jac.col(j) = (f(hi) - f(lo)) / (2.0 * eps);
  }
  return jac;
}

Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double eps) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Eigen::VectorXd hi = x, lo = x;
    hi(j) += eps;
    lo(j) -= eps;
    g(j) = (f(hi) - f(lo)) / (2.0 * eps);
  }
  return g;
}

void zoh_discretize(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                    double dt, Eigen::MatrixXd& Ad, Eigen::MatrixXd& Bd) {
  const Eigen::Index n = A.rows(), m = B.cols();
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = A;
  aug.topRightCorner(n, m) = B;
  const Eigen::MatrixXd e = (aug * dt).exp();
  Ad = e.topLeftCorner(n, n);
  Bd = e.topRightCorner(n, m);
}

LqrSolution finite_horizon_lqr(const Eigen::MatrixXd& A,
                               const Eigen::MatrixXd& B,
                               const Eigen::MatrixXd& Q,
                               const Eigen::MatrixXd& R,
                               const Eigen::MatrixXd& Qf, int N) {
  if (N < 1) {
    throw std::invalid_argument("finite_horizon_lqr: N must be positive");
  }
  LqrSolution sol;
  sol.gains.resize(static_cast<std::size_t>(N));
  Eigen::MatrixXd P = Qf;
  for (int k = N - 1; k >= 0; --k) {
    const Eigen::MatrixXd BtP = B.transpose() * P;
    const Eigen::MatrixXd K =
        (R + BtP * B).ldlt().solve(BtP * A);
    P = Q + A.transpose() * P * (A - B * K);
    P = 0.5 * (P + P.transpose());
    sol.gains[static_cast<std::size_t>(k)] = K;
  }
  sol.P0 = P;
  return sol;
}

double gaussian_kernel(const Eigen::VectorXd& z1, const Eigen::VectorXd& z2,
                       double sigma) {
  return std::exp(-(z1 - z2).squaredNorm() / (2.0 * sigma * sigma));
}

Eigen::MatrixXd batch_box_least_squares(const Eigen::MatrixXd& feature_rows,
                                        const Eigen::MatrixXd& targets,
                                        double radius, int iterations) {
  const double m = static_cast<double>(feature_rows.cols());
  const Eigen::MatrixXd scaled = feature_rows / m;  // rows are phi_t' / M
  const Eigen::MatrixXd gram = scaled.transpose() * scaled;
  // Lipschitz constant of the gradient of ||targets - blocks scaled'||^2.
  const double lip =
      2.0 * gram.selfadjointView<Eigen::Lower>().eigenvalues().maxCoeff();
  const double step = lip > 0.0 ? 1.0 / lip : 1.0;
  Eigen::MatrixXd blocks =
      Eigen::MatrixXd::Zero(targets.cols(), feature_rows.cols());
  for (int it = 0; it < iterations; ++it) {
    // residual_t = target_t - blocks phi_t / M, stacked row-wise
    const Eigen::MatrixXd resid = targets - scaled * blocks.transpose();
    const Eigen::MatrixXd grad = -2.0 * resid.transpose() * scaled;
    blocks = (blocks - step * grad).cwiseMax(-radius).cwiseMin(radius);
  }
  return blocks;
}

Eigen::Vector2d cartpole_accelerations(double cart_mass, double pole_mass,
                                       double half_length, double gravity,
                                       const Eigen::Vector4d& x, double force) {
  const double theta = x(2);
  const double thetadot = x(3);
  const double s = std::sin(theta), c = std::cos(theta);
  Eigen::Matrix2d mass_matrix;
  mass_matrix << cart_mass + pole_mass, pole_mass * half_length * c,
      pole_mass * half_length * c,
      (4.0 / 3.0) * pole_mass * half_length * half_length;
  Eigen::Vector2d rhs;
  rhs << force + pole_mass * half_length * thetadot * thetadot * s,
      pole_mass * gravity * half_length * s;
  return mass_matrix.fullPivLu().solve(rhs);
}

}  // namespace oracles
