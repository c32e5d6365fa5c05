#pragma once

#include <Eigen/Dense>

namespace ssimpc {

/// Reference generator for tracking tasks. setpoint holds a constant
/// (state, input) pair of any dimension. circle and lemniscate produce
/// quadrotor references (state = position, velocity, quaternion) whose
/// speed ramps linearly from rest to max_speed over ramp_seconds; the
/// velocity reference is the exact time derivative of the position
/// reference, attitude is the identity quaternion and thrust is the hover
/// value.
struct ReferenceSpec {
  enum class Kind { setpoint, circle, lemniscate };

  Kind kind = Kind::setpoint;

  // setpoint
  Eigen::VectorXd setpoint_state;
  Eigen::VectorXd setpoint_input;

  // circle / lemniscate
  Eigen::Vector3d center{0.0, 0.0, 1.0};
  double radius = 0.5;
  double max_speed = 0.8;
  double ramp_seconds = 2.0;
  double hover_thrust_value = 0.68 * 9.81;

  static ReferenceSpec setpoint(Eigen::VectorXd x_ref, Eigen::VectorXd u_ref);
};

/// Phase angle swept at time t by the ramped speed profile, i.e. the arc
/// length travelled divided by the radius.
double reference_phase(const ReferenceSpec& spec, double t);

/// Evaluates the reference at time t (seconds). Throws on negative t.
void reference_trajectory(const ReferenceSpec& spec, double t,
                          Eigen::VectorXd& x_ref, Eigen::VectorXd& u_ref);

}  // namespace ssimpc
