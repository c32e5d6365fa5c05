#include "ssimpc/plants.hpp"

#include <stdexcept>
#include <string>

namespace ssimpc {

Eigen::VectorXd FeatureMap::extract(const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& u) const {
  if (x.size() != from_state.cols() || u.size() != from_input.cols()) {
    throw std::invalid_argument("FeatureMap::extract: dimension mismatch");
  }
  return from_state * x + from_input * u;
}

void PlantModel::validate() const {
  if (state_dim <= 0 || input_dim <= 0) {
    throw std::invalid_argument("PlantModel: dimensions must be positive");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("PlantModel: dt must be positive");
  }
  if (!nominal_deriv) {
    throw std::invalid_argument("PlantModel: nominal_deriv missing");
  }
  if (input_lower.size() != input_dim || input_upper.size() != input_dim) {
    throw std::invalid_argument("PlantModel: input bound dimension mismatch");
  }
  if (((input_upper - input_lower).array() <= 0.0).any()) {
    throw std::invalid_argument(
        "PlantModel: input_lower must be strictly below input_upper");
  }
  if (features.from_state.cols() != state_dim ||
      features.from_input.cols() != input_dim ||
      features.from_state.rows() != features.from_input.rows()) {
    throw std::invalid_argument("PlantModel: feature map dimension mismatch");
  }
}

NoiseSpec NoiseSpec::none_noise() { return NoiseSpec{}; }

NoiseSpec NoiseSpec::gaussian(const Eigen::VectorXd& scale,
                              std::uint64_t seed) {
  if ((scale.array() < 0.0).any()) {
    throw std::invalid_argument("NoiseSpec: scale must be nonnegative");
  }
  NoiseSpec n;
  n.kind = Kind::gaussian;
  n.scale = scale;
  n.seed = seed;
  return n;
}

NoiseSpec NoiseSpec::bounded_uniform(const Eigen::VectorXd& scale,
                                     std::uint64_t seed) {
  NoiseSpec n = gaussian(scale, seed);
  n.kind = Kind::bounded_uniform;
  return n;
}

Eigen::VectorXd draw_noise(const NoiseSpec& noise, int dim,
                           std::mt19937_64& engine) {
  if (noise.kind == NoiseSpec::Kind::none) {
    return Eigen::VectorXd::Zero(dim);
  }
  if (noise.scale.size() != dim) {
    throw std::invalid_argument("draw_noise: scale dimension mismatch");
  }
  Eigen::VectorXd w(dim);
  if (noise.kind == NoiseSpec::Kind::gaussian) {
    std::normal_distribution<double> dist(0.0, 1.0);
    for (int i = 0; i < dim; ++i) {
      w(i) = noise.scale(i) * dist(engine);
    }
  } else {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int i = 0; i < dim; ++i) {
      w(i) = noise.scale(i) * dist(engine);
    }
  }
  return w;
}

Eigen::VectorXd rk4_step(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&,
                                        const Eigen::VectorXd&)>& deriv,
    const Eigen::VectorXd& x, const Eigen::VectorXd& u, double dt) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("rk4_step: dt must be positive");
  }
  if (!x.allFinite() || !u.allFinite()) {
    throw std::runtime_error("rk4_step: non-finite input");
  }
  const Eigen::VectorXd k1 = deriv(x, u);
  const Eigen::VectorXd k2 = deriv(x + 0.5 * dt * k1, u);
  const Eigen::VectorXd k3 = deriv(x + 0.5 * dt * k2, u);
  const Eigen::VectorXd k4 = deriv(x + dt * k3, u);
  Eigen::VectorXd next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.allFinite()) {
    throw std::runtime_error("rk4_step: numerical blow-up");
  }
  return next;
}

Eigen::VectorXd nominal_discrete(const PlantModel& plant,
                                 const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& u) {
  // Tolerate inputs marginally outside the box (at most 1e-9) by clamping;
  // anything further out is an upstream bug.
  Eigen::VectorXd uc = u.cwiseMax(plant.input_lower).cwiseMin(plant.input_upper);
  if ((u - uc).lpNorm<Eigen::Infinity>() > 1e-9) {
    throw std::invalid_argument("nominal_discrete: input outside the box");
  }
  Eigen::VectorXd next = rk4_step(plant.nominal_deriv, x, uc, plant.dt);
  if (plant.post_step) {
    next = plant.post_step(next);
  }
  return next;
}

std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>
discrete_map(const PlantModel& plant) {
  return [deriv = plant.nominal_deriv, post = plant.post_step,
          dt = plant.dt](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    Eigen::VectorXd next = rk4_step(deriv, x, u, dt);
    return post ? post(next) : next;
  };
}

Eigen::VectorXd step_truth(const PlantModel& plant, const NoiseSpec& noise,
                           const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                           std::mt19937_64& engine) {
  if (plant.state_check) {
    plant.state_check(x);
  }
  Eigen::VectorXd next = nominal_discrete(plant, x, u);
  if (plant.true_disturbance) {
    const Eigen::VectorXd z = plant.features.extract(x, u);
    next += plant.true_disturbance(z);
  }
  next += draw_noise(noise, plant.state_dim, engine);
  if (plant.post_step) {
    next = plant.post_step(next);
  }
  if (!next.allFinite()) {
    throw std::runtime_error("step_truth: numerical blow-up");
  }
  return next;
}

Eigen::VectorXd observe_residual(const PlantModel& plant,
                                 const Eigen::VectorXd& x_t,
                                 const Eigen::VectorXd& u_t,
                                 const Eigen::VectorXd& x_next) {
  return x_next - nominal_discrete(plant, x_t, u_t);
}

}  // namespace ssimpc
