#pragma once

// Scaling recipe and step-size / iteration planners.

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "uldmc/rng.hpp"
#include "uldmc/spd_linalg.hpp"
#include "uldmc/targets.hpp"

namespace uldmc {

/// Parameters (A, u, gamma) of a scaled kinetic Langevin dynamic together with
/// the quantities that produced them.
struct ScalingConfig {
    SymMatrixd A;
    double u = 1.0;
    double gamma = 1.0;
    double theta = 0.0;
    double m_hat = 0.0;
    double kappa_hat = 0.0;
    Eigen::VectorXd y_hat;
    std::vector<std::string> warnings;

    Eigen::Index dim() const noexcept { return A.dim(); }
};

struct ThetaEstimate {
    double theta = 0.0;
    Eigen::VectorXd y_hat;
    double m_hat = 0.0;
};

/// min over candidates y of max over probes x of |H(x) - H(y)|_2 / lambda_min(H(y)).
/// Only the supplied finite sets are searched, so the result can underestimate
/// the value over all of R^d. Constant-Hessian targets return exactly 0 with the
/// first candidate. Ties keep the earliest candidate.
ThetaEstimate estimate_theta(const TargetModel& target, const std::vector<Eigen::VectorXd>& candidate_ys,
                             const std::vector<Eigen::VectorXd>& probe_xs, unsigned threads = 1);

struct ThetaSearchSets {
    std::vector<Eigen::VectorXd> candidates;
    std::vector<Eigen::VectorXd> probes;
};

/// Candidates {x*}; probes x* itself plus `per_radius` points on each sphere of
/// radius {1, 2, 4} * sqrt(d/m) around x*, directions uniform.
ThetaSearchSets default_theta_sets(const TargetModel& target, int per_radius, std::uint64_t seed);

/// A = u H(y_hat), u = 2 / m_hat, gamma = 1, kappa_hat = L / m_hat. Warns when
/// theta > 1/2.
ScalingConfig scaled_params(const TargetModel& target, const ThetaEstimate& est);

/// Baseline: A = I, gamma = 2, u = 1/L, kappa_hat = kappa.
ScalingConfig unscaled_config(const TargetModel& target);

struct PlanOutput {
    double delta = 0.0;
    std::uint64_t n_steps = 0;
    double n_real = 0.0;  // un-rounded iteration bound
    double epsilon = 0.0;
    bool applicable = false;
    std::vector<std::string> warnings;
};

/// Step size and iteration count for the scaled dynamic. Throws
/// TheoremInapplicable when theta >= 1/2.
PlanOutput plan_scaled(double epsilon, const ScalingConfig& config, Eigen::Index d, double m, double D);

/// Step size and iteration count for the unscaled baseline.
PlanOutput plan_unscaled(double epsilon, double kappa, Eigen::Index d, double m, double D);

} // namespace uldmc
