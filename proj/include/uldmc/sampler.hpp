#pragma once

// Scaled underdamped Langevin sampler with an exact Gaussian transition for
// the frozen-gradient step.

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "uldmc/kernel.hpp"
#include "uldmc/rng.hpp"
#include "uldmc/spd_linalg.hpp"
#include "uldmc/targets.hpp"
#include "uldmc/tuner.hpp"

namespace uldmc {

inline constexpr double kBlowupThreshold = 1e12;

struct ChainState {
    Eigen::VectorXd x;
    Eigen::VectorXd v;

    Eigen::Index dim() const noexcept { return x.size(); }
};

/// Mean and covariance of (x', v') after one step from a fixed state and gradient.
struct KernelMoments {
    Eigen::VectorXd mean_x;
    Eigen::VectorXd mean_v;
    SymMatrixd cov_xx;
    SymMatrixd cov_vv;
    Eigen::MatrixXd cov_xv;

    /// [[cov_xx, cov_xv], [cov_xv^T, cov_vv]]
    SymMatrixd joint_cov() const;
};

/// Everything about one step that depends only on (A, gamma, u, delta).
struct StepCache {
    double gamma = 0.0;
    double u = 0.0;
    double delta = 0.0;

    SymMatrixd exp_neg;        // e^{-gamma A delta}
    SymMatrixd exp_neg2;       // e^{-2 gamma A delta}
    SymMatrixd A_inv;
    SymMatrixd gammaA_inv;

    // Mean map: E[v'] = v_from_v v + v_from_g g, E[x'] = x + x_from_v v + x_from_g g.
    Eigen::MatrixXd v_from_v;
    Eigen::MatrixXd v_from_g;
    Eigen::MatrixXd x_from_v;
    Eigen::MatrixXd x_from_g;

    SymMatrixd cov_xx;
    SymMatrixd cov_vv;
    Eigen::MatrixXd cov_xv;
    Eigen::MatrixXd joint_factor;  // lower Cholesky factor of the joint covariance

    Eigen::Index dim() const noexcept { return v_from_v.rows(); }
};

StepCache make_step_cache(const ScalingConfig& config, double delta);

KernelMoments kernel_moments(const ChainState& state, const Eigen::VectorXd& grad,
                             const ScalingConfig& config, double delta);

/// Moments read off an existing cache.
KernelMoments kernel_moments(const ChainState& state, const Eigen::VectorXd& grad, const StepCache& cache);

/// One transition with caller-supplied standard normal noise z of length 2d
/// (first d entries drive x). Throws NumericalBlowup on non-finite gradient or
/// a coordinate beyond 1e12 in magnitude.
ChainState step_with_noise(const ChainState& state, const Eigen::VectorXd& grad, const StepCache& cache,
                           const Eigen::VectorXd& z);

/// One transition; exactly one gradient oracle call.
ChainState step(const ChainState& state, const TargetModel& target, const StepCache& cache, Rng& rng);

struct ChainOptions {
    std::uint64_t thin = 1;
    std::uint64_t burn_in = 0;
    bool random_initial_velocity = false;  // v0 ~ N(0, u I) instead of v0 = 0
};

struct ChainRun {
    Eigen::MatrixXd samples;            // one row per retained state: x then v
    std::vector<std::uint64_t> steps;   // step index of each retained row
    std::uint64_t grad_calls = 0;
    ChainState final_state;
};

/// Runs n_steps transitions from (x0, 0) and keeps states i > burn_in with
/// (i - burn_in) % thin == 0, i counted from 1.
ChainRun run_chain(const InitSpec& init, const TargetModel& target, const ScalingConfig& config,
                   double delta, std::uint64_t n_steps, Rng& rng, const ChainOptions& options = {});

/// Two chains driven by identical noise. Returns
/// rho_i = |x_i - y_i|^2 + |(x_i + v_i) - (y_i + w_i)|^2 for i = 0..n.
std::vector<double> coupled_pair_run(const InitSpec& init_a, const InitSpec& init_b, const TargetModel& target,
                                     const ScalingConfig& config, double delta, std::uint64_t n_steps, Rng& rng);

} // namespace uldmc
