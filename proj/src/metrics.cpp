#include "ssimpc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ssimpc {

RegretReport dynamic_regret(const TrajectoryLog& alg,
                            const TrajectoryLog& oracle) {
  if (alg.steps.empty() || alg.steps.size() != oracle.steps.size()) {
    throw std::invalid_argument(
        "dynamic_regret: logs must be non-empty and equally long");
  }
  RegretReport report;
  report.prefix.resize(static_cast<Eigen::Index>(alg.steps.size()));
  double acc = 0.0;
  for (std::size_t k = 0; k < alg.steps.size(); ++k) {
    acc += alg.steps[k].stage_cost - oracle.steps[k].stage_cost;
    report.prefix(static_cast<Eigen::Index>(k)) = acc;
  }
  report.total = acc;
  return report;
}

SlopeFit sublinearity_slope(const std::vector<double>& horizons,
                            const std::vector<double>& values) {
  if (horizons.size() != values.size() || horizons.size() < 2) {
    throw std::invalid_argument(
        "sublinearity_slope: need at least two matched points");
  }
  constexpr double kFloor = 1e-12;
  SlopeFit fit;
  const auto n = static_cast<double>(horizons.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (!(horizons[i] > 0.0)) {
      throw std::invalid_argument("sublinearity_slope: horizons must be positive");
    }
    if (i > 0 && horizons[i] <= horizons[i - 1]) {
      throw std::invalid_argument(
          "sublinearity_slope: horizons must be strictly increasing");
    }
    double v = values[i];
    if (v <= kFloor) {
      v = kFloor;
      fit.degenerate = true;
    }
    const double lx = std::log(horizons[i]);
    const double ly = std::log(v);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

double stabilization_error(const TrajectoryLog& log) {
  double acc = 0.0;
  for (const StepRecord& rec : log.steps) {
    acc += rec.x.squaredNorm();
  }
  return acc;
}

double tracking_rmse(
    const TrajectoryLog& log,
    const std::function<void(int, Eigen::VectorXd&, Eigen::VectorXd&)>&
        reference,
    const std::vector<int>& components) {
  if (log.steps.empty()) {
    throw std::invalid_argument("tracking_rmse: empty log");
  }
  Eigen::VectorXd x_ref(log.state_dim), u_ref(log.input_dim);
  double acc = 0.0;
  for (const StepRecord& rec : log.steps) {
    reference(rec.t, x_ref, u_ref);
    if (components.empty()) {
      acc += (rec.x - x_ref).squaredNorm();
    } else {
      for (int c : components) {
        if (c < 0 || c >= log.state_dim) {
          throw std::invalid_argument("tracking_rmse: component out of range");
        }
        const double d = rec.x(c) - x_ref(c);
        acc += d * d;
      }
    }
  }
  return std::sqrt(acc / static_cast<double>(log.steps.size()));
}

NoiseFloorReport noise_floor_check(const TrajectoryLog& log,
                                   const Eigen::VectorXd& noise_scale) {
  if (log.steps.empty()) {
    throw std::invalid_argument("noise_floor_check: empty log");
  }
  NoiseFloorReport report;
  report.floor = noise_scale.squaredNorm();
  const std::size_t start = log.steps.size() / 2;
  double acc = 0.0;
  for (std::size_t k = start; k < log.steps.size(); ++k) {
    acc += log.steps[k].estimation_loss;
  }
  report.mean_recent_loss = acc / static_cast<double>(log.steps.size() - start);
  if (report.floor <= 0.0) {
    report.undefined = true;
    report.ratio = 0.0;
  } else {
    report.ratio = report.mean_recent_loss / report.floor;
  }
  return report;
}

double median(std::vector<double> values) {
  if (values.empty()) {
    throw std::invalid_argument("median: empty sample");
  }
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) {
    return values[n / 2];
  }
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace ssimpc
