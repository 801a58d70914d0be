#pragma once

// Fine-step Euler-Maruyama integrators used as independent references for the
// exact transition kernel and for stationarity checks.

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "uldmc/rng.hpp"
#include "uldmc/sampler.hpp"
#include "uldmc/targets.hpp"
#include "uldmc/tuner.hpp"

namespace uldmc {

struct EulerConfig {
    int substeps = 1024;  // power of two
    int replicas = 100000;
    bool noiseless = false;  // forces xi = 0
};

/// Integrates the frozen-gradient SDE over [0, delta] for each replica:
///   v <- v + h(-gamma A v - u g) + sqrt(2 gamma u h) A^{1/2} xi,  x <- x + h v.
/// Replica r draws from Rng(seed ^ r). Returns replicas x 2d end states (x then v).
Eigen::MatrixXd euler_frozen(const ChainState& state, const Eigen::VectorXd& grad, const ScalingConfig& config,
                             double delta, const EulerConfig& ecfg, std::uint64_t seed, unsigned threads = 0);

/// Same scheme with the gradient re-evaluated every substep; one replica.
ChainState euler_full(const ChainState& state, const TargetModel& target, const ScalingConfig& config,
                      double total_time, const EulerConfig& ecfg, Rng& rng);

/// Largest |empirical - analytic| / standard error over every mean coordinate
/// and joint covariance entry of a cloud of end states.
struct MomentAgreement {
    double worst_mean_z = 0.0;
    double worst_cov_z = 0.0;
    double worst() const noexcept { return std::max(worst_mean_z, worst_cov_z); }
};

MomentAgreement compare_moments(const Eigen::MatrixXd& cloud, const KernelMoments& analytic);

struct KernelCaseReport {
    Eigen::Index dim = 0;
    double delta = 0.0;
    double alpha_min = 0.0;
    double alpha_max = 0.0;
    MomentAgreement agreement;
    bool passed = false;
};

struct KernelValidationReport {
    std::vector<KernelCaseReport> cases;
    bool passed() const;
};

/// Randomized cases: d cycles through {1, 2, 4}, A has eigenvalues uniform in
/// [2, 50] under a random rotation, delta alternates 0.1 / 0.5, state and
/// gradient standard normal. A case passes when every z-score is <= z_tolerance.
KernelValidationReport validate_kernel(std::uint64_t seed, int cases, int replicas, int substeps,
                                       double z_tolerance = 5.0, unsigned threads = 0);

} // namespace uldmc
