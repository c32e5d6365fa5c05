#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "ssimpc/controller.hpp"

namespace ssimpc {

/// Cumulative stage-cost gap between an algorithm run and a benchmark run
/// on the same disturbance and noise realization.
struct RegretReport {
  Eigen::VectorXd prefix;  // prefix(k) = gap accumulated over steps 0..k
  double total = 0.0;
};

/// Requires equally long, non-empty logs.
RegretReport dynamic_regret(const TrajectoryLog& alg,
                            const TrajectoryLog& oracle);

/// Least-squares fit of log(value) against log(horizon). Values at or below
/// the floor 1e-12 are clamped and flagged: a slope fitted through them says
/// nothing about growth.
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  bool degenerate = false;
};

SlopeFit sublinearity_slope(const std::vector<double>& horizons,
                            const std::vector<double>& values);

/// Sum of squared state norms over the logged steps.
double stabilization_error(const TrajectoryLog& log);

/// Root-mean-square deviation from the reference over the given state
/// components (all components when the list is empty), evaluated at the
/// logged step times.
double tracking_rmse(
    const TrajectoryLog& log,
    const std::function<void(int, Eigen::VectorXd&, Eigen::VectorXd&)>&
        reference,
    const std::vector<int>& components);

/// Compares the late-episode estimation loss against the irreducible level
/// set by the process noise, E||w||^2 = sum of the per-component variances.
/// Undefined (flagged) when the noise scale is zero.
struct NoiseFloorReport {
  double mean_recent_loss = 0.0;
  double floor = 0.0;
  double ratio = 0.0;
  bool undefined = false;
};

NoiseFloorReport noise_floor_check(const TrajectoryLog& log,
                                   const Eigen::VectorXd& noise_scale);

/// Median of a non-empty sample (mean of the middle pair for even sizes).
double median(std::vector<double> values);

}  // namespace ssimpc
