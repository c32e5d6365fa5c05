#pragma once

#include <utility>

#include "ssimpc/plants.hpp"

namespace ssimpc {

/// Cart of mass cart_mass on a 1D track with a pole of mass pole_mass and
/// length 2*half_length hinged to it. State (x, xdot, theta, thetadot) with
/// theta the pole angle from vertical; input is the horizontal force on the
/// cart.
struct CartPoleParams {
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double half_length = 0.5;
  double gravity = 9.81;

  void validate() const;
};

/// Continuous-time cart-pole derivative (xdot, xddot, thetadot, thetaddot).
/// The coupled accelerations are resolved in closed form: thetaddot first,
/// then substituted into xddot.
Eigen::VectorXd cartpole_deriv(const CartPoleParams& params,
                               const Eigen::VectorXd& x,
                               const Eigen::VectorXd& u);

/// Builds the (truth, nominal) plant pair. Both use the model with
/// (cart_mass, pole_mass, half_length) scaled by nominal_scale as their
/// known dynamics; the truth plant additionally carries the one-step
/// residual of the unscaled system as its disturbance, so stepping the
/// truth plant reproduces the real physics. Features are z = [x; u].
std::pair<PlantModel, PlantModel> make_cartpole(
    const CartPoleParams& params_true, double nominal_scale, double dt,
    double force_limit);

}  // namespace ssimpc
