#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "ssimpc/rff.hpp"

namespace ssimpc {

/// Quadratic tracking cost: sum over the horizon of
/// (x - x_ref)' Q (x - x_ref) + (u - u_ref)' R (u - u_ref), plus the
/// terminal term with Q_terminal. reference maps the horizon index k to
/// the pair (x_ref_k, u_ref_k).
struct CostSpec {
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  Eigen::MatrixXd Q_terminal;
  std::function<void(int, Eigen::VectorXd&, Eigen::VectorXd&)> reference;

  /// Q and Q_terminal must be symmetric positive semidefinite and R
  /// symmetric positive definite, checked to tolerance 1e-10.
  void validate(int state_dim, int input_dim) const;
};

/// Learned additive dynamics term with an exact Jacobian:
/// (1/M) * blocks * cos(W z + b) with z = z_from_state x + z_from_input u.
/// The extraction matrices absorb any per-component feature normalization.
struct LearnedTerm {
  FeatureSet features;
  ParamEstimate params;
  Eigen::MatrixXd z_from_state;
  Eigen::MatrixXd z_from_input;

  Eigen::VectorXd evaluate(const Eigen::VectorXd& x,
                           const Eigen::VectorXd& u) const;
  /// Adds the term's Jacobians onto A (d/dx) and B (d/du).
  void add_jacobian(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                    Eigen::MatrixXd& A, Eigen::MatrixXd& B) const;
};

/// Discrete prediction model used inside the solver:
/// F(x, u) = base(x, u) [+ learned term] [+ known_residual(x, u)].
/// base and known_residual are differentiated by central finite
/// differences; the learned term contributes its exact Jacobian.
struct MpcModel {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>
      base;
  std::optional<LearnedTerm> learned;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>
      known_residual;

  Eigen::VectorXd evaluate(const Eigen::VectorXd& x,
                           const Eigen::VectorXd& u) const;
  void linearize(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                 double fd_step, Eigen::MatrixXd& A, Eigen::MatrixXd& B) const;
};

struct SolverOptions {
  int max_iterations = 50;
  double rel_tolerance = 1e-6;
  double reg_init = 1e-6;
  double reg_increase = 10.0;
  double reg_decrease = 0.5;
  double reg_cap = 1e6;
  double reg_floor = 1e-12;
  double armijo = 1e-4;
  int line_search_steps = 11;  // scales 1, 1/2, ..., 2^-(steps-1)
  double fd_step = 1e-6;
};

struct MpcProblem {
  int horizon = 0;  // N >= 2
  int state_dim = 0;
  int input_dim = 0;
  MpcModel model;
  CostSpec cost;
  Eigen::VectorXd input_lower;
  Eigen::VectorXd input_upper;
  SolverOptions options;

  void validate() const;
};

struct MpcSolution {
  std::vector<Eigen::VectorXd> inputs;  // length N
  std::vector<Eigen::VectorXd> states;  // length N + 1, exact rollout
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Forward-simulates the model under the given inputs and accumulates the
/// tracking cost. Throws std::invalid_argument on infeasible inputs and
/// std::runtime_error (naming the step) on a non-finite rollout.
std::pair<std::vector<Eigen::VectorXd>, double> rollout(
    const MpcProblem& problem, const Eigen::VectorXd& x0,
    const std::vector<Eigen::VectorXd>& inputs);

/// Iterative LQR with box-constrained inputs: backward Riccati-style pass
/// on the linearized model with Levenberg-Marquardt regularization, then a
/// line-searched forward pass whose control updates are clamped to the box.
/// Accepted iterations never increase the objective. Returns the best
/// solution found, flagged converged when the relative improvement fell
/// under the tolerance.
MpcSolution solve(const MpcProblem& problem, const Eigen::VectorXd& x0,
                  const std::vector<Eigen::VectorXd>* warm_start = nullptr);

/// One receding-horizon step: warm-starts from the previous solution's
/// inputs shifted by one (last input repeated), or from the reference
/// inputs on the first call; returns the first input of the new solution.
std::pair<Eigen::VectorXd, MpcSolution> receding_step(
    const MpcProblem& problem, const Eigen::VectorXd& x0,
    const MpcSolution* previous = nullptr);

}  // namespace ssimpc
