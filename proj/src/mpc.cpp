#include "ssimpc/mpc.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace ssimpc {

namespace {

void check_symmetric_psd(const Eigen::MatrixXd& m, const char* name,
                         bool strictly_positive) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument(std::string(name) + " must be square");
  }
  if ((m - m.transpose()).lpNorm<Eigen::Infinity>() > 1e-10) {
    throw std::invalid_argument(std::string(name) + " must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m,
                                                     Eigen::EigenvaluesOnly);
  const double min_eig = eig.eigenvalues().minCoeff();
  if (strictly_positive ? (min_eig <= 1e-10) : (min_eig < -1e-10)) {
    throw std::invalid_argument(std::string(name) +
                                (strictly_positive
                                     ? " must be positive definite"
                                     : " must be positive semidefinite"));
  }
}

}  // namespace

void CostSpec::validate(int state_dim, int input_dim) const {
  if (Q.rows() != state_dim || R.rows() != input_dim ||
      Q_terminal.rows() != state_dim) {
    throw std::invalid_argument("CostSpec: weight dimension mismatch");
  }
  check_symmetric_psd(Q, "CostSpec::Q", false);
  check_symmetric_psd(Q_terminal, "CostSpec::Q_terminal", false);
  check_symmetric_psd(R, "CostSpec::R", true);
  if (!reference) {
    throw std::invalid_argument("CostSpec: reference function missing");
  }
}

Eigen::VectorXd LearnedTerm::evaluate(const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& u) const {
  const Eigen::VectorXd z = z_from_state * x + z_from_input * u;
  return predict(features, params, z);
}

void LearnedTerm::add_jacobian(const Eigen::VectorXd& x,
                               const Eigen::VectorXd& u, Eigen::MatrixXd& A,
                               Eigen::MatrixXd& B) const {
  const Eigen::VectorXd z = z_from_state * x + z_from_input * u;
  const Eigen::MatrixXd feat_jac = features.jacobian(z);  // M x d_z
  const Eigen::MatrixXd d_pred_dz =
      params.blocks * feat_jac / static_cast<double>(params.count());
  A += d_pred_dz * z_from_state;
  B += d_pred_dz * z_from_input;
}

Eigen::VectorXd MpcModel::evaluate(const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& u) const {
  Eigen::VectorXd next = base(x, u);
  if (learned) {
    next += learned->evaluate(x, u);
  }
  if (known_residual) {
    next += known_residual(x, u);
  }
  return next;
}

void MpcModel::linearize(const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                         double fd_step, Eigen::MatrixXd& A,
                         Eigen::MatrixXd& B) const {
  // Central finite differences over base plus any known residual; the
  // learned term adds its exact Jacobian afterwards.
  auto fd_part = [this](const Eigen::VectorXd& xs, const Eigen::VectorXd& us) {
    Eigen::VectorXd value = base(xs, us);
    if (known_residual) {
      value += known_residual(xs, us);
    }
    return value;
  };

  const int n = static_cast<int>(x.size());
  const int m = static_cast<int>(u.size());
  A.resize(n, n);
  B.resize(n, m);
  Eigen::VectorXd xp = x, xm = x;
  for (int j = 0; j < n; ++j) {
    const double step = fd_step * std::max(1.0, std::abs(x(j)));
    xp(j) = x(j) + step;
    xm(j) = x(j) - step;
    A.col(j) = (fd_part(xp, u) - fd_part(xm, u)) / (2.0 * step);
    xp(j) = x(j);
    xm(j) = x(j);
  }
  Eigen::VectorXd up = u, um = u;
  for (int j = 0; j < m; ++j) {
    const double step = fd_step * std::max(1.0, std::abs(u(j)));
    up(j) = u(j) + step;
    um(j) = u(j) - step;
    B.col(j) = (fd_part(x, up) - fd_part(x, um)) / (2.0 * step);
    up(j) = u(j);
    um(j) = u(j);
  }
  if (learned) {
    learned->add_jacobian(x, u, A, B);
  }
}

void MpcProblem::validate() const {
  if (horizon < 2) {
    throw std::invalid_argument("MpcProblem: horizon must be >= 2");
  }
  if (state_dim <= 0 || input_dim <= 0) {
    throw std::invalid_argument("MpcProblem: dimensions must be positive");
  }
  if (!model.base) {
    throw std::invalid_argument("MpcProblem: model.base missing");
  }
  cost.validate(state_dim, input_dim);
  if (input_lower.size() != input_dim || input_upper.size() != input_dim ||
      ((input_upper - input_lower).array() <= 0.0).any()) {
    throw std::invalid_argument("MpcProblem: invalid input box");
  }
}

namespace {

struct References {
  std::vector<Eigen::VectorXd> x;  // N + 1
  std::vector<Eigen::VectorXd> u;  // N
};

References fetch_references(const MpcProblem& problem) {
  References refs;
  refs.x.resize(problem.horizon + 1);
  refs.u.resize(problem.horizon);
  Eigen::VectorXd xr, ur;
  for (int k = 0; k <= problem.horizon; ++k) {
    problem.cost.reference(k, xr, ur);
    if (xr.size() != problem.state_dim) {
      throw std::invalid_argument("CostSpec: reference state dimension");
    }
    refs.x[k] = xr;
    if (k < problem.horizon) {
      if (ur.size() != problem.input_dim) {
        throw std::invalid_argument("CostSpec: reference input dimension");
      }
      refs.u[k] = ur;
    }
  }
  return refs;
}

double stage_cost(const MpcProblem& problem, const References& refs, int k,
                  const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
  const Eigen::VectorXd e = x - refs.x[k];
  const Eigen::VectorXd v = u - refs.u[k];
  return e.dot(problem.cost.Q * e) + v.dot(problem.cost.R * v);
}

double terminal_cost(const MpcProblem& problem, const References& refs,
                     const Eigen::VectorXd& x) {
  const Eigen::VectorXd e = x - refs.x[problem.horizon];
  return e.dot(problem.cost.Q_terminal * e);
}

Eigen::VectorXd clamp_input(const MpcProblem& problem,
                            const Eigen::VectorXd& u) {
  return u.cwiseMax(problem.input_lower).cwiseMin(problem.input_upper);
}

/// Non-throwing rollout used inside the solver; inputs are clamped to the
/// box. Returns false on any non-finite step.
bool try_rollout(const MpcProblem& problem, const References& refs,
                 const Eigen::VectorXd& x0,
                 const std::vector<Eigen::VectorXd>& inputs,
                 std::vector<Eigen::VectorXd>& states,
                 std::vector<Eigen::VectorXd>& clamped, double& objective) {
  const int n = problem.horizon;
  states.assign(static_cast<std::size_t>(n) + 1, Eigen::VectorXd());
  clamped.assign(static_cast<std::size_t>(n), Eigen::VectorXd());
  states[0] = x0;
  objective = 0.0;
  for (int k = 0; k < n; ++k) {
    clamped[k] = clamp_input(problem, inputs[k]);
    objective += stage_cost(problem, refs, k, states[k], clamped[k]);
    Eigen::VectorXd next;
    try {
      next = problem.model.evaluate(states[k], clamped[k]);
    } catch (const std::runtime_error&) {
      return false;
    }
    if (!next.allFinite()) {
      return false;
    }
    states[k + 1] = std::move(next);
  }
  objective += terminal_cost(problem, refs, states[n]);
  return std::isfinite(objective);
}

struct BackwardResult {
  std::vector<Eigen::VectorXd> k_ff;
  std::vector<Eigen::MatrixXd> k_fb;
  double dv1 = 0.0;  // sum of k' Q_u
  double dv2 = 0.0;  // sum of 0.5 k' Q_uu k
};

/// Riccati-style backward sweep with control-space regularization mu.
/// Returns false when a regularized Hessian fails its Cholesky
/// factorization.
bool backward_pass(const MpcProblem& problem, const References& refs,
                   const std::vector<Eigen::VectorXd>& states,
                   const std::vector<Eigen::VectorXd>& inputs,
                   const std::vector<Eigen::MatrixXd>& a_mats,
                   const std::vector<Eigen::MatrixXd>& b_mats, double mu,
                   BackwardResult& result) {
  const int n = problem.horizon;
  const int du = problem.input_dim;
  result.k_ff.assign(n, Eigen::VectorXd());
  result.k_fb.assign(n, Eigen::MatrixXd());
  result.dv1 = 0.0;
  result.dv2 = 0.0;

  Eigen::VectorXd v_x =
      2.0 * problem.cost.Q_terminal * (states[n] - refs.x[n]);
  Eigen::MatrixXd v_xx = 2.0 * problem.cost.Q_terminal;

  const Eigen::MatrixXd reg = mu * Eigen::MatrixXd::Identity(du, du);
  for (int k = n - 1; k >= 0; --k) {
    const Eigen::MatrixXd& a = a_mats[k];
    const Eigen::MatrixXd& b = b_mats[k];
    const Eigen::VectorXd q_x =
        2.0 * problem.cost.Q * (states[k] - refs.x[k]) + a.transpose() * v_x;
    const Eigen::VectorXd q_u =
        2.0 * problem.cost.R * (inputs[k] - refs.u[k]) + b.transpose() * v_x;
    const Eigen::MatrixXd q_xx =
        2.0 * problem.cost.Q + a.transpose() * v_xx * a;
    const Eigen::MatrixXd q_uu =
        2.0 * problem.cost.R + b.transpose() * v_xx * b;
    const Eigen::MatrixXd q_ux = b.transpose() * v_xx * a;

    const Eigen::LLT<Eigen::MatrixXd> llt(q_uu + reg);
    if (llt.info() != Eigen::Success) {
      return false;
    }
    const Eigen::VectorXd k_ff = -llt.solve(q_u);
    const Eigen::MatrixXd k_fb = -llt.solve(q_ux);

    result.dv1 += k_ff.dot(q_u);
    result.dv2 += 0.5 * k_ff.dot(q_uu * k_ff);

    v_x = q_x + k_fb.transpose() * q_uu * k_ff + k_fb.transpose() * q_u +
          q_ux.transpose() * k_ff;
    v_xx = q_xx + k_fb.transpose() * q_uu * k_fb + k_fb.transpose() * q_ux +
           q_ux.transpose() * k_fb;
    v_xx = 0.5 * (v_xx + v_xx.transpose()).eval();

    result.k_ff[k] = k_ff;
    result.k_fb[k] = k_fb;
  }
  return true;
}

}  // namespace

std::pair<std::vector<Eigen::VectorXd>, double> rollout(
    const MpcProblem& problem, const Eigen::VectorXd& x0,
    const std::vector<Eigen::VectorXd>& inputs) {
  problem.validate();
  if (static_cast<int>(inputs.size()) != problem.horizon) {
    throw std::invalid_argument("rollout: inputs length must equal horizon");
  }
  for (const Eigen::VectorXd& u : inputs) {
    if (u.size() != problem.input_dim ||
        ((u - problem.input_upper).array() > 1e-12).any() ||
        ((problem.input_lower - u).array() > 1e-12).any()) {
      throw std::invalid_argument("rollout: input outside the box");
    }
  }
  const References refs = fetch_references(problem);
  std::vector<Eigen::VectorXd> states(problem.horizon + 1);
  states[0] = x0;
  double objective = 0.0;
  for (int k = 0; k < problem.horizon; ++k) {
    const Eigen::VectorXd u = clamp_input(problem, inputs[k]);
    objective += stage_cost(problem, refs, k, states[k], u);
    Eigen::VectorXd next;
    try {
      next = problem.model.evaluate(states[k], u);
    } catch (const std::runtime_error&) {
      next.resize(0);
    }
    if (next.size() == 0 || !next.allFinite()) {
      throw std::runtime_error("rollout: non-finite state at step " +
                               std::to_string(k + 1));
    }
    states[k + 1] = std::move(next);
  }
  objective += terminal_cost(problem, refs, states[problem.horizon]);
  return {std::move(states), objective};
}

MpcSolution solve(const MpcProblem& problem, const Eigen::VectorXd& x0,
                  const std::vector<Eigen::VectorXd>* warm_start) {
  problem.validate();
  if (x0.size() != problem.state_dim || !x0.allFinite()) {
    throw std::invalid_argument("solve: invalid initial state");
  }
  const References refs = fetch_references(problem);
  const int n = problem.horizon;
  const SolverOptions& opt = problem.options;

  std::vector<Eigen::VectorXd> inputs(
      n, Eigen::VectorXd::Zero(problem.input_dim));
  if (warm_start != nullptr) {
    if (static_cast<int>(warm_start->size()) != n) {
      throw std::invalid_argument("solve: warm start length must equal horizon");
    }
    inputs = *warm_start;
  }

  MpcSolution best;
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> clamped;
  double objective = 0.0;
  bool started =
      try_rollout(problem, refs, x0, inputs, states, clamped, objective);
  if (!started) {
    // Last resort: a zero (clamped) input sequence.
    const std::vector<Eigen::VectorXd> zeros(
        n, Eigen::VectorXd::Zero(problem.input_dim));
    started = try_rollout(problem, refs, x0, zeros, states, clamped, objective);
  }
  if (!started) {
    best.inputs.assign(
        n, clamp_input(problem, Eigen::VectorXd::Zero(problem.input_dim)));
    best.states.assign(static_cast<std::size_t>(n) + 1, x0);
    best.objective = std::numeric_limits<double>::infinity();
    best.converged = false;
    return best;
  }
  inputs = clamped;

  double mu = opt.reg_init;
  bool converged = false;
  int iterations = 0;

  std::vector<Eigen::MatrixXd> a_mats(n), b_mats(n);
  BackwardResult gains;
  std::vector<Eigen::VectorXd> trial_inputs(n), trial_states, trial_clamped;

  while (iterations < opt.max_iterations) {
    ++iterations;

    for (int k = 0; k < n; ++k) {
      problem.model.linearize(states[k], inputs[k], opt.fd_step, a_mats[k],
                              b_mats[k]);
    }

    bool backward_ok = false;
    while (mu <= opt.reg_cap) {
      if (backward_pass(problem, refs, states, inputs, a_mats, b_mats, mu,
                        gains)) {
        backward_ok = true;
        break;
      }
      mu *= opt.reg_increase;
    }
    if (!backward_ok) {
      break;
    }

    // Already stationary: the model predicts less improvement than the
    // termination threshold, so no line search can make progress.
    const double expected_full = -(gains.dv1 + gains.dv2);
    const double threshold =
        opt.rel_tolerance * (1.0 + std::abs(objective));
    if (expected_full >= 0.0 && expected_full <= 0.1 * threshold) {
      converged = true;
      break;
    }

    bool accepted = false;
    double alpha = 1.0;
    for (int ls = 0; ls < opt.line_search_steps; ++ls, alpha *= 0.5) {
      for (int k = 0; k < n; ++k) {
        trial_inputs[k] = inputs[k];
      }
      // Closed-loop forward pass.
      bool ok = true;
      trial_states.assign(static_cast<std::size_t>(n) + 1, Eigen::VectorXd());
      trial_states[0] = x0;
      double trial_objective = 0.0;
      for (int k = 0; k < n; ++k) {
        const Eigen::VectorXd u_new =
            inputs[k] + alpha * gains.k_ff[k] +
            gains.k_fb[k] * (trial_states[k] - states[k]);
        trial_inputs[k] = clamp_input(problem, u_new);
        trial_objective +=
            stage_cost(problem, refs, k, trial_states[k], trial_inputs[k]);
        Eigen::VectorXd next;
        try {
          next = problem.model.evaluate(trial_states[k], trial_inputs[k]);
        } catch (const std::runtime_error&) {
          ok = false;
          break;
        }
        if (!next.allFinite()) {
          ok = false;
          break;
        }
        trial_states[k + 1] = std::move(next);
      }
      if (!ok) {
        continue;
      }
      trial_objective += terminal_cost(problem, refs, trial_states[n]);
      if (!std::isfinite(trial_objective)) {
        continue;
      }

      const double actual = objective - trial_objective;
      const double expected =
          -(alpha * gains.dv1 + alpha * alpha * gains.dv2);
      const bool accept = (expected > 0.0)
                              ? (actual >= opt.armijo * expected)
                              : (actual > 0.0);
      if (accept) {
        const double previous = objective;
        inputs = trial_inputs;
        states = trial_states;
        objective = trial_objective;
        accepted = true;
        mu = std::max(mu * opt.reg_decrease, opt.reg_floor);
        if (previous - objective <=
            opt.rel_tolerance * (1.0 + std::abs(previous))) {
          converged = true;
        }
        break;
      }
    }

    if (converged) {
      break;
    }
    if (!accepted) {
      mu *= opt.reg_increase;
      if (mu > opt.reg_cap) {
        break;
      }
    }
  }

  best.inputs = std::move(inputs);
  best.states = std::move(states);
  best.objective = objective;
  best.iterations = iterations;
  best.converged = converged;
  return best;
}

std::pair<Eigen::VectorXd, MpcSolution> receding_step(
    const MpcProblem& problem, const Eigen::VectorXd& x0,
    const MpcSolution* previous) {
  std::vector<Eigen::VectorXd> warm;
  warm.reserve(problem.horizon);
  if (previous != nullptr &&
      static_cast<int>(previous->inputs.size()) == problem.horizon) {
    for (std::size_t k = 1; k < previous->inputs.size(); ++k) {
      warm.push_back(previous->inputs[k]);
    }
    warm.push_back(previous->inputs.back());
  } else {
    Eigen::VectorXd xr, ur;
    for (int k = 0; k < problem.horizon; ++k) {
      problem.cost.reference(k, xr, ur);
      warm.push_back(ur);
    }
  }
  MpcSolution solution = solve(problem, x0, &warm);
  return {solution.inputs.front(), std::move(solution)};
}

}  // namespace ssimpc
