#pragma once

#include <utility>

#include "ssimpc/plants.hpp"

namespace ssimpc {

/// Point-mass quadrotor with quaternion attitude. State is
/// (p in R^3, v in R^3, q in R^4 with scalar part first), input is
/// (collective thrust T in N, body rates omega in rad/s); the low-level
/// rate loop is idealized as instantaneous, so omega is a direct input.
struct QuadrotorParams {
  double mass = 0.68;
  Eigen::Vector3d gravity{0.0, 0.0, -9.81};
  Eigen::Matrix3d drag_matrix = Eigen::Matrix3d::Zero();  // body frame, N s/m
  double thrust_min = 0.0;
  double thrust_max = 2.0 * 0.68 * 9.81;
  double omega_max = 3.0;

  void validate() const;
};

/// Rotation matrix of a unit quaternion (w, x, y, z), body to world.
Eigen::Matrix3d quaternion_rotation(const Eigen::Vector4d& q);

/// Hamilton product q1 * q2, scalar part first.
Eigen::Vector4d quaternion_product(const Eigen::Vector4d& q1,
                                   const Eigen::Vector4d& q2);

/// Continuous-time derivative: pdot = v, m*vdot = m*g + R(q)[0,0,T]
/// (+ drag force when with_drag), qdot = q * (0, omega) / 2. Tolerates the
/// small norm drift of integrator substages; throws only when the state
/// quaternion has collapsed far from unit norm.
Eigen::VectorXd quadrotor_deriv(const QuadrotorParams& params, bool with_drag,
                                const Eigen::VectorXd& x,
                                const Eigen::VectorXd& u);

/// Builds the (truth, nominal) plant pair. Both use the drag-free model as
/// their known dynamics; when drag_on, the truth plant carries the
/// one-step residual of the linear body-frame drag force
/// f_a = -R(q) D R(q)' v as its disturbance. The quaternion is renormalized
/// after every discrete step. Features are z = [v; q; omega; T/thrust_max].
std::pair<PlantModel, PlantModel> make_quadrotor(const QuadrotorParams& params,
                                                 bool drag_on, double dt);

/// The thrust balancing gravity at hover.
double hover_thrust(const QuadrotorParams& params);

}  // namespace ssimpc
