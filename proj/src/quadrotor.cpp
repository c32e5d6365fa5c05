#include "ssimpc/quadrotor.hpp"

#include <cmath>
#include <stdexcept>

namespace ssimpc {

void QuadrotorParams::validate() const {
  if (!(mass > 0.0)) {
    throw std::invalid_argument("QuadrotorParams: mass must be positive");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(drag_matrix,
                                                     Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-12) {
    throw std::invalid_argument(
        "QuadrotorParams: drag_matrix must be positive semidefinite");
  }
  if (!(thrust_max > thrust_min) || !(omega_max > 0.0)) {
    throw std::invalid_argument("QuadrotorParams: invalid input bounds");
  }
}

Eigen::Matrix3d quaternion_rotation(const Eigen::Vector4d& q) {
  const double w = q(0), x = q(1), y = q(2), z = q(3);
  Eigen::Matrix3d r;
  r << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z),
      2.0 * (x * z + w * y),  //
      2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z),
      2.0 * (y * z - w * x),  //
      2.0 * (x * z - w * y), 2.0 * (y * z + w * x),
      1.0 - 2.0 * (x * x + y * y);
  return r;
}

Eigen::Vector4d quaternion_product(const Eigen::Vector4d& q1,
                                   const Eigen::Vector4d& q2) {
  const double w1 = q1(0);
  const Eigen::Vector3d v1 = q1.tail<3>();
  const double w2 = q2(0);
  const Eigen::Vector3d v2 = q2.tail<3>();
  Eigen::Vector4d out;
  out(0) = w1 * w2 - v1.dot(v2);
  out.tail<3>() = w1 * v2 + w2 * v1 + v1.cross(v2);
  return out;
}

Eigen::VectorXd quadrotor_deriv(const QuadrotorParams& params, bool with_drag,
                                const Eigen::VectorXd& x,
                                const Eigen::VectorXd& u) {
  const Eigen::Vector3d v = x.segment<3>(3);
  const Eigen::Vector4d q = x.segment<4>(6);
  // Loose guard only: integrator stages and model-side rollouts evaluate
  // this at mildly off-unit quaternions by design.
  if (std::abs(q.norm() - 1.0) > 0.5) {
    throw std::runtime_error("quadrotor_deriv: quaternion norm far from unit");
  }
  const double thrust = u(0);
  const Eigen::Vector3d omega = u.segment<3>(1);

  const Eigen::Matrix3d rot = quaternion_rotation(q);
  Eigen::Vector3d force = rot * Eigen::Vector3d(0.0, 0.0, thrust);
  if (with_drag) {
    force -= rot * params.drag_matrix * rot.transpose() * v;
  }

  Eigen::VectorXd dx(10);
  dx.head<3>() = v;
  dx.segment<3>(3) = params.gravity + force / params.mass;
  dx.segment<4>(6) =
      0.5 * quaternion_product(q, Eigen::Vector4d(0.0, omega(0), omega(1),
                                                  omega(2)));
  return dx;
}

double hover_thrust(const QuadrotorParams& params) {
  return params.mass * params.gravity.norm();
}

namespace {

Eigen::VectorXd renormalize_quaternion(Eigen::VectorXd x) {
  const double n = x.segment<4>(6).norm();
  if (!(n > 0.0)) {
    throw std::runtime_error("quadrotor: quaternion collapsed to zero");
  }
  x.segment<4>(6) /= n;
  return x;
}

}  // namespace

std::pair<PlantModel, PlantModel> make_quadrotor(const QuadrotorParams& params,
                                                 bool drag_on, double dt) {
  params.validate();

  PlantModel nominal;
  nominal.state_dim = 10;
  nominal.input_dim = 4;
  nominal.dt = dt;
  nominal.input_lower = Eigen::VectorXd(4);
  nominal.input_lower << params.thrust_min, -params.omega_max,
      -params.omega_max, -params.omega_max;
  nominal.input_upper = Eigen::VectorXd(4);
  nominal.input_upper << params.thrust_max, params.omega_max, params.omega_max,
      params.omega_max;
  nominal.nominal_deriv = [params](const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& u) {
    return quadrotor_deriv(params, false, x, u);
  };
  nominal.input_matrix = [params](const Eigen::VectorXd& x) {
    const Eigen::Vector4d q = x.segment<4>(6);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(10, 4);
    g.block<3, 1>(3, 0) =
        quaternion_rotation(q) * Eigen::Vector3d(0.0, 0.0, 1.0) / params.mass;
    const double w = q(0), qx = q(1), qy = q(2), qz = q(3);
    Eigen::Matrix<double, 4, 3> dq;
    dq << -qx, -qy, -qz,  //
        w, -qz, qy,       //
        qz, w, -qx,       //
        -qy, qx, w;
    g.block<4, 3>(6, 1) = 0.5 * dq;
    return g;
  };
  nominal.post_step = [](const Eigen::VectorXd& x) {
    return renormalize_quaternion(x);
  };
  nominal.state_check = [](const Eigen::VectorXd& x) {
    if (std::abs(x.segment<4>(6).norm() - 1.0) > 1e-6) {
      throw std::invalid_argument("quadrotor: state quaternion not unit norm");
    }
  };
  // z = [v; q; omega; T/thrust_max].
  nominal.features.from_state = Eigen::MatrixXd::Zero(11, 10);
  nominal.features.from_state.block<7, 7>(0, 3).setIdentity();
  nominal.features.from_input = Eigen::MatrixXd::Zero(11, 4);
  nominal.features.from_input.block<3, 3>(7, 1).setIdentity();
  nominal.features.from_input(10, 0) = 1.0 / params.thrust_max;

  PlantModel truth = nominal;
  if (drag_on) {
    // One-step residual of the drag-afflicted system against the drag-free
    // model. z determines the residual completely: the (v, q) dynamics are
    // independent of p, and the p component of the residual is translation
    // invariant, so the state is reconstructed with p = 0.
    truth.true_disturbance = [params, dt](const Eigen::VectorXd& z) {
      Eigen::VectorXd x = Eigen::VectorXd::Zero(10);
      x.segment<3>(3) = z.head<3>();
      x.segment<4>(6) = z.segment<4>(3);
      Eigen::VectorXd u(4);
      u(0) = z(10) * params.thrust_max;
      u.segment<3>(1) = z.segment<3>(7);
      const Eigen::VectorXd with_drag = renormalize_quaternion(rk4_step(
          [&params](const Eigen::VectorXd& xs, const Eigen::VectorXd& us) {
            return quadrotor_deriv(params, true, xs, us);
          },
          x, u, dt));
      const Eigen::VectorXd without_drag = renormalize_quaternion(rk4_step(
          [&params](const Eigen::VectorXd& xs, const Eigen::VectorXd& us) {
            return quadrotor_deriv(params, false, xs, us);
          },
          x, u, dt));
      return (with_drag - without_drag).eval();
    };
  }

  nominal.validate();
  truth.validate();
  return {truth, nominal};
}

}  // namespace ssimpc
