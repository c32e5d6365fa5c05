#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace ssimpc {

/// Shift-invariant kernel whose RKHS hosts the functions the feature map
/// approximates. Only the Gaussian kernel is supported.
struct KernelSpec {
  enum class Kind { gaussian };

  Kind kind = Kind::gaussian;
  double bandwidth_sigma = 1.0;  // length scale
  int input_dim = 1;             // d_z
};

/// k(z1, z2) = exp(-||z1 - z2||^2 / (2 sigma^2)).
double kernel_value(const KernelSpec& kernel, const Eigen::VectorXd& z1,
                    const Eigen::VectorXd& z2);

/// A fixed draw of M random Fourier features (w_i, b_i) for a Gaussian
/// kernel. The feature map is phi_i(z) = cos(w_i' z + b_i); frequencies are
/// sampled once and never change, so two FeatureSets built from the same
/// (kernel, count, seed) are bit-identical.
class FeatureSet {
 public:
  /// Draws w_i ~ N(0, (1/sigma^2) I) componentwise and b_i ~ U[0, 2*pi).
  static FeatureSet sample(const KernelSpec& kernel, int count,
                           std::uint64_t seed);

  /// [cos(w_i' z + b_i)]_i; every entry lies in [-1, 1].
  Eigen::VectorXd evaluate(const Eigen::VectorXd& z) const;

  /// d(evaluate)/dz; row i = -sin(w_i' z + b_i) w_i'.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& z) const;

  int count() const { return static_cast<int>(phases_.size()); }
  int input_dim() const { return kernel_.input_dim; }
  const KernelSpec& kernel() const { return kernel_; }
  std::uint64_t seed() const { return seed_; }

  /// Row i = w_i.
  const Eigen::MatrixXd& frequencies() const { return frequencies_; }
  const Eigen::VectorXd& phases() const { return phases_; }

 private:
  FeatureSet(Eigen::MatrixXd frequencies, Eigen::VectorXd phases,
             KernelSpec kernel, std::uint64_t seed);

  Eigen::MatrixXd frequencies_;  // M x d_z
  Eigen::VectorXd phases_;       // M, in [0, 2*pi)
  KernelSpec kernel_;
  std::uint64_t seed_;
};

/// Coefficients of the learned disturbance model. Row r holds the M
/// coefficients for output dimension r; all outputs share one FeatureSet
/// but own separate coefficient blocks. Every coefficient is kept inside
/// [-radius_bh, radius_bh] by the estimator's projection step.
struct ParamEstimate {
  Eigen::MatrixXd blocks;  // d_h x M
  double radius_bh = 10.0;

  int output_dim() const { return static_cast<int>(blocks.rows()); }
  int count() const { return static_cast<int>(blocks.cols()); }

  static ParamEstimate zero(int output_dim, int count, double radius_bh);

  /// True when every coefficient lies inside the projection box.
  bool feasible(double slack = 0.0) const;
};

/// Model output h_hat(z): component r = (1/M) sum_i cos(w_i' z + b_i) *
/// blocks(r, i). Bounded by radius_bh in the max norm whenever the
/// coefficients are feasible.
Eigen::VectorXd predict(const FeatureSet& features, const ParamEstimate& params,
                        const Eigen::VectorXd& z);

/// predict() reusing an already evaluated feature vector.
Eigen::VectorXd predict_from_features(const ParamEstimate& params,
                                      const Eigen::VectorXd& features_at_z);

}  // namespace ssimpc
