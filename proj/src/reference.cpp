#include "ssimpc/reference.hpp"

#include <cmath>
#include <stdexcept>

namespace ssimpc {

ReferenceSpec ReferenceSpec::setpoint(Eigen::VectorXd x_ref,
                                      Eigen::VectorXd u_ref) {
  ReferenceSpec spec;
  spec.kind = Kind::setpoint;
  spec.setpoint_state = std::move(x_ref);
  spec.setpoint_input = std::move(u_ref);
  return spec;
}

namespace {

// Ramped tangential speed: linear from 0 to max_speed over ramp_seconds.
double ramped_speed(const ReferenceSpec& spec, double t) {
  if (spec.ramp_seconds <= 0.0 || t >= spec.ramp_seconds) {
    return spec.max_speed;
  }
  return spec.max_speed * t / spec.ramp_seconds;
}

}  // namespace

double reference_phase(const ReferenceSpec& spec, double t) {
  if (!(spec.radius > 0.0)) {
    throw std::invalid_argument("reference_phase: radius must be positive");
  }
  double arc = 0.0;
  if (spec.ramp_seconds <= 0.0) {
    arc = spec.max_speed * t;
  } else if (t < spec.ramp_seconds) {
    arc = 0.5 * spec.max_speed * t * t / spec.ramp_seconds;
  } else {
    arc = 0.5 * spec.max_speed * spec.ramp_seconds +
          spec.max_speed * (t - spec.ramp_seconds);
  }
  return arc / spec.radius;
}

void reference_trajectory(const ReferenceSpec& spec, double t,
                          Eigen::VectorXd& x_ref, Eigen::VectorXd& u_ref) {
  if (t < 0.0) {
    throw std::invalid_argument("reference_trajectory: t must be nonnegative");
  }

  if (spec.kind == ReferenceSpec::Kind::setpoint) {
    if (spec.setpoint_state.size() == 0) {
      throw std::invalid_argument("reference_trajectory: empty setpoint");
    }
    x_ref = spec.setpoint_state;
    u_ref = spec.setpoint_input;
    return;
  }

  const double phase = reference_phase(spec, t);
  const double speed = ramped_speed(spec, t);
  const double phase_rate = speed / spec.radius;

  Eigen::Vector3d p, v;
  const double c = std::cos(phase);
  const double s = std::sin(phase);
  switch (spec.kind) {
    case ReferenceSpec::Kind::circle:
      p = spec.center + spec.radius * Eigen::Vector3d(c, s, 0.0);
      v = speed * Eigen::Vector3d(-s, c, 0.0);
      break;
    case ReferenceSpec::Kind::lemniscate:
      // Gerono figure-eight: (r sin, r sin cos, 0) in the horizontal plane.
      p = spec.center + spec.radius * Eigen::Vector3d(s, s * c, 0.0);
      v = phase_rate * spec.radius *
          Eigen::Vector3d(c, c * c - s * s, 0.0);
      break;
    default:
      throw std::invalid_argument("reference_trajectory: unknown kind");
  }

  x_ref = Eigen::VectorXd::Zero(10);
  x_ref.head<3>() = p;
  x_ref.segment<3>(3) = v;
  x_ref(6) = 1.0;  // identity quaternion
  u_ref = Eigen::VectorXd::Zero(4);
  u_ref(0) = spec.hover_thrust_value;
}

}  // namespace ssimpc
