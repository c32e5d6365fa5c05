#include "ssimpc/rff.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace ssimpc {

namespace {

void check_kernel(const KernelSpec& kernel) {
  if (kernel.kind != KernelSpec::Kind::gaussian) {
    throw std::invalid_argument("kernel_value: unsupported kernel kind");
  }
  if (!(kernel.bandwidth_sigma > 0.0)) {
    throw std::invalid_argument("kernel: bandwidth_sigma must be positive");
  }
  if (kernel.input_dim <= 0) {
    throw std::invalid_argument("kernel: input_dim must be positive");
  }
}

}  // namespace

double kernel_value(const KernelSpec& kernel, const Eigen::VectorXd& z1,
                    const Eigen::VectorXd& z2) {
  check_kernel(kernel);
  if (z1.size() != kernel.input_dim || z2.size() != kernel.input_dim) {
    throw std::invalid_argument("kernel_value: input dimension mismatch");
  }
  const double sq = (z1 - z2).squaredNorm();
  const double s2 = kernel.bandwidth_sigma * kernel.bandwidth_sigma;
  return std::exp(-sq / (2.0 * s2));
}

FeatureSet::FeatureSet(Eigen::MatrixXd frequencies, Eigen::VectorXd phases,
                       KernelSpec kernel, std::uint64_t seed)
    : frequencies_(std::move(frequencies)),
      phases_(std::move(phases)),
      kernel_(kernel),
      seed_(seed) {}

FeatureSet FeatureSet::sample(const KernelSpec& kernel, int count,
                              std::uint64_t seed) {
  check_kernel(kernel);
  if (count <= 0) {
    throw std::invalid_argument("FeatureSet::sample: count must be positive");
  }

  std::mt19937_64 gen(seed);
  std::normal_distribution<double> freq_dist(0.0,
                                             1.0 / kernel.bandwidth_sigma);
  std::uniform_real_distribution<double> phase_dist(0.0,
                                                    2.0 * std::numbers::pi);

  Eigen::MatrixXd frequencies(count, kernel.input_dim);
  Eigen::VectorXd phases(count);
  for (int i = 0; i < count; ++i) {
    for (int j = 0; j < kernel.input_dim; ++j) {
      frequencies(i, j) = freq_dist(gen);
    }
    phases(i) = phase_dist(gen);
  }
  return FeatureSet(std::move(frequencies), std::move(phases), kernel, seed);
}

Eigen::VectorXd FeatureSet::evaluate(const Eigen::VectorXd& z) const {
  if (z.size() != kernel_.input_dim) {
    throw std::invalid_argument("FeatureSet::evaluate: dimension mismatch");
  }
  return ((frequencies_ * z + phases_).array()).cos();
}

Eigen::MatrixXd FeatureSet::jacobian(const Eigen::VectorXd& z) const {
  if (z.size() != kernel_.input_dim) {
    throw std::invalid_argument("FeatureSet::jacobian: dimension mismatch");
  }
  const Eigen::ArrayXd s = (frequencies_ * z + phases_).array().sin();
  return (-s).matrix().asDiagonal() * frequencies_;
}

ParamEstimate ParamEstimate::zero(int output_dim, int count, double radius_bh) {
  if (output_dim <= 0 || count <= 0) {
    throw std::invalid_argument("ParamEstimate::zero: dimensions must be positive");
  }
  if (!(radius_bh > 0.0)) {
    throw std::invalid_argument("ParamEstimate::zero: radius_bh must be positive");
  }
  ParamEstimate p;
  p.blocks = Eigen::MatrixXd::Zero(output_dim, count);
  p.radius_bh = radius_bh;
  return p;
}

bool ParamEstimate::feasible(double slack) const {
  return (blocks.array().abs() <= radius_bh + slack).all();
}

Eigen::VectorXd predict(const FeatureSet& features, const ParamEstimate& params,
                        const Eigen::VectorXd& z) {
  if (params.count() != features.count()) {
    throw std::invalid_argument("predict: coefficient/feature count mismatch");
  }
  return predict_from_features(params, features.evaluate(z));
}

Eigen::VectorXd predict_from_features(const ParamEstimate& params,
                                      const Eigen::VectorXd& features_at_z) {
  if (features_at_z.size() != params.count()) {
    throw std::invalid_argument(
        "predict_from_features: coefficient/feature count mismatch");
  }
  return params.blocks * features_at_z / static_cast<double>(params.count());
}

}  // namespace ssimpc
