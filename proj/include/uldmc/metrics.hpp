#pragma once

// Wasserstein-2 distances and moment summaries.

#include <Eigen/Core>

#include <vector>

#include "uldmc/gaussian.hpp"

namespace uldmc {

inline constexpr Eigen::Index kMaxCloudSize = 4096;

/// Rows are points.
struct SampleCloud {
    Eigen::MatrixXd points;

    explicit SampleCloud(Eigen::MatrixXd pts);
    Eigen::Index count() const noexcept { return points.rows(); }
    Eigen::Index dim() const noexcept { return points.cols(); }
};

/// Closed-form W2 between Gaussians:
/// sqrt(|mu_a - mu_b|^2 + tr(S_a + S_b - 2 (S_b^{1/2} S_a S_b^{1/2})^{1/2})).
double gaussian_w2(const GaussianSummary& a, const GaussianSummary& b);

/// Exact W2 between equal-size uniform point clouds (min-cost perfect matching).
double empirical_w2(const SampleCloud& a, const SampleCloud& b);

/// Sample mean and unbiased covariance.
GaussianSummary moment_summary(const SampleCloud& cloud);

/// Min-cost perfect matching on a square cost matrix. Returns the column
/// assigned to each row.
std::vector<Eigen::Index> min_cost_assignment(const Eigen::MatrixXd& cost);

/// Rows evenly spaced through `points`, at most `max_count` of them.
Eigen::MatrixXd even_subsample(const Eigen::MatrixXd& points, Eigen::Index max_count);

} // namespace uldmc
