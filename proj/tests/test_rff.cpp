#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "matchers.hpp"
#include "oracles.hpp"
#include "ssimpc/rff.hpp"
#include "ssimpc/rng.hpp"

using namespace ssimpc;

namespace {

KernelSpec make_kernel(double sigma, int dim) {
  KernelSpec k;
  k.bandwidth_sigma = sigma;
  k.input_dim = dim;
  return k;
}

Eigen::VectorXd random_vec(std::mt19937_64& gen, int n, double scale) {
  std::normal_distribution<double> dist(0.0, scale);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = dist(gen);
  return v;
}

/// Monte-Carlo kernel estimate from a feature draw:
/// (2/M) sum_i cos(w_i' z1 + b_i) cos(w_i' z2 + b_i).
double mc_kernel(const FeatureSet& f, const Eigen::VectorXd& z1,
                 const Eigen::VectorXd& z2) {
  return 2.0 * f.evaluate(z1).dot(f.evaluate(z2)) / f.count();
}

}  // namespace

TEST_CASE("kernel value matches the direct formula and its symmetry") {
  const KernelSpec k = make_kernel(1.7, 3);
  auto gen = rng::engine(1, "kernel");
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd a = random_vec(gen, 3, 2.0);
    const Eigen::VectorXd b = random_vec(gen, 3, 2.0);
    const double v = kernel_value(k, a, b);
    CHECK(v == doctest::Approx(oracles::gaussian_kernel(a, b, 1.7)).epsilon(1e-14));
    CHECK(kernel_value(k, b, a) == v);
    CHECK(v > 0.0);
    CHECK(v <= 1.0);
  }
  const Eigen::VectorXd z = random_vec(gen, 3, 1.0);
  CHECK(kernel_value(k, z, z) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("kernel and sampler reject invalid arguments") {
  const KernelSpec k = make_kernel(1.0, 2);
  const Eigen::VectorXd ok = Eigen::VectorXd::Zero(2);
  const Eigen::VectorXd bad = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS((void)kernel_value(k, ok, bad), std::invalid_argument);
  CHECK_THROWS_AS((void)kernel_value(make_kernel(0.0, 2), ok, ok),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)kernel_value(make_kernel(-1.0, 2), ok, ok),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)FeatureSet::sample(k, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS((void)FeatureSet::sample(make_kernel(1.0, 0), 4, 1),
                  std::invalid_argument);
}

TEST_CASE("feature draws are deterministic in the seed") {
  const KernelSpec k = make_kernel(2.0, 4);
  const FeatureSet a = FeatureSet::sample(k, 32, 99);
  const FeatureSet b = FeatureSet::sample(k, 32, 99);
  CHECK(testutil::exactly_equal(a.frequencies(), b.frequencies()));
  CHECK(testutil::exactly_equal(a.phases(), b.phases()));
  const FeatureSet c = FeatureSet::sample(k, 32, 100);
  CHECK(!testutil::exactly_equal(a.frequencies(), c.frequencies()));
}

TEST_CASE("phases lie in [0, 2 pi) and frequencies scale with 1/sigma") {
  const int m = 4000;
  const FeatureSet narrow = FeatureSet::sample(make_kernel(1.0, 1), m, 5);
  const FeatureSet wide = FeatureSet::sample(make_kernel(10.0, 1), m, 5);
  for (int i = 0; i < m; ++i) {
    CHECK(narrow.phases()(i) >= 0.0);
    CHECK(narrow.phases()(i) < 2.0 * M_PI);
  }
  // Sample standard deviation of the frequencies tracks 1/sigma.
  const double sd_narrow =
      std::sqrt(narrow.frequencies().col(0).squaredNorm() / m);
  const double sd_wide = std::sqrt(wide.frequencies().col(0).squaredNorm() / m);
  CHECK(sd_narrow == doctest::Approx(1.0).epsilon(0.1));
  CHECK(sd_wide == doctest::Approx(0.1).epsilon(0.1));
}

TEST_CASE("evaluate is the cosine map and stays within [-1, 1]") {
  const FeatureSet f = FeatureSet::sample(make_kernel(1.3, 3), 64, 7);
  auto gen = rng::engine(7, "eval");
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd z = random_vec(gen, 3, 3.0);
    const Eigen::VectorXd phi = f.evaluate(z);
    REQUIRE(phi.size() == 64);
    for (int i = 0; i < 64; ++i) {
      const double expected =
          std::cos(f.frequencies().row(i).dot(z) + f.phases()(i));
      CHECK(phi(i) == doctest::Approx(expected).epsilon(1e-15));
      CHECK(std::abs(phi(i)) <= 1.0);
    }
  }
  CHECK_THROWS_AS((void)f.evaluate(Eigen::VectorXd::Zero(2)),
                  std::invalid_argument);
}

TEST_CASE("jacobian matches finite differences") {
  const FeatureSet f = FeatureSet::sample(make_kernel(0.8, 4), 24, 11);
  auto gen = rng::engine(11, "jac");
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd z = random_vec(gen, 4, 2.0);
    const Eigen::MatrixXd jac = f.jacobian(z);
    const Eigen::MatrixXd fd = oracles::finite_difference_jacobian(
        [&](const Eigen::VectorXd& p) { return f.evaluate(p); }, z, 1e-6);
    CHECK((jac - fd).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("kernel Monte-Carlo estimate tightens as the draw grows") {
  const KernelSpec k = make_kernel(1.0, 3);
  auto gen = rng::engine(3, "pairs");
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;
  for (int i = 0; i < 40; ++i) {
    pairs.emplace_back(random_vec(gen, 3, 1.5), random_vec(gen, 3, 1.5));
  }
  // Median over feature seeds of the worst-pair error at each size.
  std::vector<double> err_small, err_large;
  for (std::uint64_t seed = 0; seed < 9; ++seed) {
    const FeatureSet small = FeatureSet::sample(k, 32, rng::derive(1, "f", seed));
    const FeatureSet large =
        FeatureSet::sample(k, 2048, rng::derive(2, "f", seed));
    double es = 0.0, el = 0.0;
    for (const auto& [a, b] : pairs) {
      const double exact = kernel_value(k, a, b);
      es = std::max(es, std::abs(mc_kernel(small, a, b) - exact));
      el = std::max(el, std::abs(mc_kernel(large, a, b) - exact));
    }
    err_small.push_back(es);
    err_large.push_back(el);
  }
  std::sort(err_small.begin(), err_small.end());
  std::sort(err_large.begin(), err_large.end());
  CHECK(err_large[4] < err_small[4]);  // medians: 64x the draw, ~8x tighter
}

TEST_CASE("coefficient box membership and the zero estimate") {
  ParamEstimate p = ParamEstimate::zero(3, 16, 2.5);
  CHECK(p.output_dim() == 3);
  CHECK(p.count() == 16);
  CHECK(p.blocks.isZero(0.0));
  CHECK(p.feasible());
  p.blocks(1, 4) = 2.5;
  CHECK(p.feasible());  // boundary counts as inside
  p.blocks(1, 4) = 2.5 + 1e-9;
  CHECK(!p.feasible());
  CHECK(p.feasible(1e-8));
}

TEST_CASE("prediction is linear in the coefficients and bounded") {
  const FeatureSet f = FeatureSet::sample(make_kernel(1.0, 2), 40, 17);
  auto gen = rng::engine(17, "pred");
  ParamEstimate a = ParamEstimate::zero(2, 40, 5.0);
  ParamEstimate b = ParamEstimate::zero(2, 40, 5.0);
  for (int i = 0; i < 40; ++i) {
    a.blocks(0, i) = std::sin(0.1 * i);
    a.blocks(1, i) = std::cos(0.2 * i);
    b.blocks(0, i) = 0.3;
    b.blocks(1, i) = -0.1 * std::sin(i);
  }
  ParamEstimate sum = a;
  sum.blocks += b.blocks;
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd z = random_vec(gen, 2, 2.0);
    const Eigen::VectorXd pa = predict(f, a, z);
    const Eigen::VectorXd pb = predict(f, b, z);
    const Eigen::VectorXd ps = predict(f, sum, z);
    CHECK((ps - pa - pb).cwiseAbs().maxCoeff() < 1e-14);
    // Feasible coefficients keep the output inside the coefficient box.
    CHECK(pa.cwiseAbs().maxCoeff() <= 5.0 + 1e-12);
    // Identical result when features are evaluated up front.
    CHECK(testutil::exactly_equal(predict_from_features(a, f.evaluate(z)), pa));
  }
  const ParamEstimate zero = ParamEstimate::zero(2, 40, 5.0);
  CHECK(predict(f, zero, random_vec(gen, 2, 1.0)).isZero(0.0));
}

TEST_CASE("prediction validates dimension agreement") {
  const FeatureSet f = FeatureSet::sample(make_kernel(1.0, 2), 8, 1);
  const ParamEstimate wrong = ParamEstimate::zero(1, 9, 1.0);
  CHECK_THROWS_AS((void)predict(f, wrong, Eigen::VectorXd::Zero(2)),
                  std::invalid_argument);
}
