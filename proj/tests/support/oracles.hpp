#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

// Independent reference implementations used to cross-check the library.
// Each is written from first principles along a different algebraic path
// than the code under test.
namespace oracles {

/// Central-difference Jacobian of f at x with absolute step eps.
Eigen::MatrixXd finite_difference_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double eps);

/// Central-difference gradient of a scalar function.
Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double eps);

/// Exact zero-order-hold discretization of xdot = A x + B u via the matrix
/// exponential of the augmented system.
void zoh_discretize(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                    double dt, Eigen::MatrixXd& Ad, Eigen::MatrixXd& Bd);

/// Finite-horizon discrete LQR for J = sum_k (x'Qx + u'Ru) + x_N' Qf x_N
/// (no 1/2 convention; the recursion is identical either way).
/// u_k = -gains[k] x_k is optimal and the optimal cost is x0' P0 x0.
struct LqrSolution {
  std::vector<Eigen::MatrixXd> gains;
  Eigen::MatrixXd P0;
};
LqrSolution finite_horizon_lqr(const Eigen::MatrixXd& A,
                               const Eigen::MatrixXd& B,
                               const Eigen::MatrixXd& Q,
                               const Eigen::MatrixXd& R,
                               const Eigen::MatrixXd& Qf, int N);

/// exp(-||z1 - z2||^2 / (2 sigma^2)) computed directly.
double gaussian_kernel(const Eigen::VectorXd& z1, const Eigen::VectorXd& z2,
                       double sigma);

/// Plain (non-accelerated) projected gradient descent for
/// min_{|coef| <= radius} sum_t || targets_t - blocks phi_t / M ||^2,
/// with phi_t the t-th row of feature_rows. Slow but simple.
Eigen::MatrixXd batch_box_least_squares(const Eigen::MatrixXd& feature_rows,
                                        const Eigen::MatrixXd& targets,
                                        double radius, int iterations);

/// Cart-pole accelerations (xddot, thetaddot) obtained by numerically
/// solving the 2x2 mass-matrix system of the Lagrangian form instead of
/// the substituted closed form.
Eigen::Vector2d cartpole_accelerations(double cart_mass, double pole_mass,
                                       double half_length, double gravity,
                                       const Eigen::Vector4d& x, double force);

}  // namespace oracles
