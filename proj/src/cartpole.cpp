#include "ssimpc/cartpole.hpp"

#include <cmath>
#include <stdexcept>

namespace ssimpc {

void CartPoleParams::validate() const {
  if (!(cart_mass > 0.0) || !(pole_mass > 0.0) || !(half_length > 0.0) ||
      !(gravity > 0.0)) {
    throw std::invalid_argument("CartPoleParams: all parameters must be positive");
  }
}

Eigen::VectorXd cartpole_deriv(const CartPoleParams& params,
                               const Eigen::VectorXd& x,
                               const Eigen::VectorXd& u) {
  const double theta = x(2);
  const double theta_dot = x(3);
  const double force = u(0);
  const double total_mass = params.cart_mass + params.pole_mass;
  const double ml = params.pole_mass * params.half_length;
  const double sin_t = std::sin(theta);
  const double cos_t = std::cos(theta);

  const double theta_ddot =
      (params.gravity * sin_t +
       cos_t * (-ml * theta_dot * theta_dot * sin_t - force) / total_mass) /
      (params.half_length *
       (4.0 / 3.0 - params.pole_mass * cos_t * cos_t / total_mass));
  const double x_ddot =
      (ml * (theta_dot * theta_dot * sin_t - theta_ddot * cos_t) + force) /
      total_mass;

  Eigen::VectorXd dx(4);
  dx << x(1), x_ddot, theta_dot, theta_ddot;
  return dx;
}

std::pair<PlantModel, PlantModel> make_cartpole(
    const CartPoleParams& params_true, double nominal_scale, double dt,
    double force_limit) {
  params_true.validate();
  if (!(nominal_scale > 0.0) || nominal_scale > 1.0) {
    throw std::invalid_argument("make_cartpole: nominal_scale must be in (0, 1]");
  }
  if (!(force_limit > 0.0)) {
    throw std::invalid_argument("make_cartpole: force_limit must be positive");
  }

  CartPoleParams scaled = params_true;
  scaled.cart_mass *= nominal_scale;
  scaled.pole_mass *= nominal_scale;
  scaled.half_length *= nominal_scale;

  PlantModel nominal;
  nominal.state_dim = 4;
  nominal.input_dim = 1;
  nominal.dt = dt;
  nominal.input_lower = Eigen::VectorXd::Constant(1, -force_limit);
  nominal.input_upper = Eigen::VectorXd::Constant(1, force_limit);
  nominal.nominal_deriv = [scaled](const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& u) {
    return cartpole_deriv(scaled, x, u);
  };
  // The force enters both accelerations linearly; differentiate the closed
  // forms by hand.
  nominal.input_matrix = [scaled](const Eigen::VectorXd& x) {
    const double theta = x(2);
    const double cos_t = std::cos(theta);
    const double total_mass = scaled.cart_mass + scaled.pole_mass;
    const double denom =
        scaled.half_length *
        (4.0 / 3.0 - scaled.pole_mass * cos_t * cos_t / total_mass);
    const double dtheta_ddot = -cos_t / (total_mass * denom);
    const double dx_ddot =
        (1.0 - scaled.pole_mass * scaled.half_length * cos_t * dtheta_ddot) /
        total_mass;
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4, 1);
    g(1, 0) = dx_ddot;
    g(3, 0) = dtheta_ddot;
    return g;
  };
  // z = [x; u].
  nominal.features.from_state = Eigen::MatrixXd::Zero(5, 4);
  nominal.features.from_state.topLeftCorner(4, 4).setIdentity();
  nominal.features.from_input = Eigen::MatrixXd::Zero(5, 1);
  nominal.features.from_input(4, 0) = 1.0;

  PlantModel truth = nominal;
  // One-step residual of the true-parameter system against the scaled
  // model, evaluated from z alone (z carries the full state and input).
  truth.true_disturbance = [params_true, scaled,
                            dt](const Eigen::VectorXd& z) {
    const Eigen::VectorXd x = z.head(4);
    const Eigen::VectorXd u = z.tail(1);
    const Eigen::VectorXd step_true = rk4_step(
        [&params_true](const Eigen::VectorXd& xs, const Eigen::VectorXd& us) {
          return cartpole_deriv(params_true, xs, us);
        },
        x, u, dt);
    const Eigen::VectorXd step_scaled = rk4_step(
        [&scaled](const Eigen::VectorXd& xs, const Eigen::VectorXd& us) {
          return cartpole_deriv(scaled, xs, us);
        },
        x, u, dt);
    return (step_true - step_scaled).eval();
  };

  nominal.validate();
  truth.validate();
  return {truth, nominal};
}

}  // namespace ssimpc
