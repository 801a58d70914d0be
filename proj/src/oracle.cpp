#include "uldmc/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "uldmc/parallel.hpp"

namespace uldmc {

namespace {

void check_euler(const EulerConfig& ecfg) {
    require(ecfg.substeps >= 1 && std::has_single_bit(static_cast<unsigned>(ecfg.substeps)),
            "substeps must be a power of two");
    require(ecfg.replicas >= 1, "replicas must be >= 1");
}

struct EulerOperators {
    Eigen::MatrixXd drift;      // gamma A
    Eigen::MatrixXd diffusion;  // sqrt(2 gamma u h) A^{1/2}
};

EulerOperators euler_operators(const ScalingConfig& config, double h) {
    if (!is_spd(config.A)) fail(Errc::InvalidInput, "scaling matrix A must be SPD");
    return {config.gamma * config.A.matrix(), std::sqrt(2.0 * config.gamma * config.u * h) * spd_sqrt(config.A).matrix()};
}

template <int D>
void frozen_replicas(const ChainState& state, const Eigen::VectorXd& grad, double u, const EulerOperators& ops,
                     double h, const EulerConfig& ecfg, std::uint64_t seed, unsigned threads, Eigen::MatrixXd& out) {
    using Vec = Eigen::Matrix<double, D, 1>;
    using Mat = Eigen::Matrix<double, D, D>;
    const auto d = state.dim();
    const Mat drift = ops.drift;
    const Mat diffusion = ops.diffusion;
    const Vec force = u * grad;
    const Vec x0 = state.x, v0 = state.v;

    parallel_for(static_cast<std::size_t>(ecfg.replicas), threads, [&](std::size_t r) {
        Rng rng(seed ^ static_cast<std::uint64_t>(r));
        NormalDist normal;
        Vec x = x0, v = v0, xi(d);
        xi.setZero();
        for (int k = 0; k < ecfg.substeps; ++k) {
            if (!ecfg.noiseless) {
                for (Eigen::Index j = 0; j < d; ++j) xi(j) = normal(rng);
            }
            v += h * (-(drift * v) - force) + diffusion * xi;
            x += h * v;
        }
        out.row(Eigen::Index(r)).head(d) = x.transpose();
        out.row(Eigen::Index(r)).tail(d) = v.transpose();
    });
}

} // namespace

Eigen::MatrixXd euler_frozen(const ChainState& state, const Eigen::VectorXd& grad, const ScalingConfig& config,
                             double delta, const EulerConfig& ecfg, std::uint64_t seed, unsigned threads) {
    check_euler(ecfg);
    require(std::isfinite(delta) && delta > 0.0, "delta must be > 0");
    const auto d = state.dim();
    require(state.v.size() == d && grad.size() == d && config.dim() == d, "euler_frozen: dimension mismatch");
    const double h = delta / ecfg.substeps;
    const auto ops = euler_operators(config, h);
    Eigen::MatrixXd out(ecfg.replicas, 2 * d);
    switch (d) {
    case 1: frozen_replicas<1>(state, grad, config.u, ops, h, ecfg, seed, threads, out); break;
    case 2: frozen_replicas<2>(state, grad, config.u, ops, h, ecfg, seed, threads, out); break;
    case 4: frozen_replicas<4>(state, grad, config.u, ops, h, ecfg, seed, threads, out); break;
    default: frozen_replicas<Eigen::Dynamic>(state, grad, config.u, ops, h, ecfg, seed, threads, out); break;
    }
    return out;
}

ChainState euler_full(const ChainState& state, const TargetModel& target, const ScalingConfig& config,
                      double total_time, const EulerConfig& ecfg, Rng& rng) {
    check_euler(ecfg);
    require(std::isfinite(total_time) && total_time > 0.0, "total_time must be > 0");
    require(state.dim() == target.dim && config.dim() == target.dim, "euler_full: dimension mismatch");
    const double h = total_time / ecfg.substeps;
    const auto ops = euler_operators(config, h);
    NormalDist normal;
    Eigen::VectorXd x = state.x, v = state.v, xi = Eigen::VectorXd::Zero(target.dim);
    for (int k = 0; k < ecfg.substeps; ++k) {
        const Eigen::VectorXd g = target.grad(x);
        if (!ecfg.noiseless) {
            for (Eigen::Index j = 0; j < target.dim; ++j) xi(j) = normal(rng);
        }
        v += h * (-(ops.drift * v) - config.u * g) + ops.diffusion * xi;
        x += h * v;
        if (!x.allFinite() || !v.allFinite() || x.cwiseAbs().maxCoeff() > kBlowupThreshold ||
            v.cwiseAbs().maxCoeff() > kBlowupThreshold) {
            fail(Errc::NumericalBlowup, "Euler integration diverged at substep " + std::to_string(k + 1));
        }
    }
    return {x, v};
}

MomentAgreement compare_moments(const Eigen::MatrixXd& cloud, const KernelMoments& analytic) {
    const auto d = analytic.mean_x.size();
    require(cloud.cols() == 2 * d && cloud.rows() >= 2, "compare_moments: cloud shape");
    const double n = static_cast<double>(cloud.rows());
    Eigen::VectorXd mean_ref(2 * d);
    mean_ref << analytic.mean_x, analytic.mean_v;
    const Eigen::MatrixXd cov_ref = analytic.joint_cov().matrix();

    const Eigen::VectorXd mean = cloud.colwise().mean().transpose();
    const Eigen::MatrixXd centered = cloud.rowwise() - mean.transpose();

    MomentAgreement out;
    for (Eigen::Index i = 0; i < 2 * d; ++i) {
        const double sd = std::sqrt(centered.col(i).squaredNorm() / (n - 1.0));
        out.worst_mean_z = std::max(out.worst_mean_z, std::abs(mean(i) - mean_ref(i)) / (sd / std::sqrt(n)));
    }
    for (Eigen::Index i = 0; i < 2 * d; ++i) {
        for (Eigen::Index j = i; j < 2 * d; ++j) {
            const Eigen::ArrayXd prod = centered.col(i).array() * centered.col(j).array();
            const double c = prod.sum() / (n - 1.0);
            const double var_prod = (prod - prod.mean()).square().sum() / (n - 1.0);
            const double se = std::sqrt(var_prod / n);
            out.worst_cov_z = std::max(out.worst_cov_z, std::abs(c - cov_ref(i, j)) / se);
        }
    }
    return out;
}

bool KernelValidationReport::passed() const {
    return !cases.empty() && std::all_of(cases.begin(), cases.end(), [](const auto& c) { return c.passed; });
}

KernelValidationReport validate_kernel(std::uint64_t seed, int cases, int replicas, int substeps,
                                       double z_tolerance, unsigned threads) {
    require(cases >= 1, "validate_kernel: need at least one case");
    require(substeps >= 16, "validate_kernel: validation runs need >= 16 substeps");
    Rng rng(seed);
    std::uniform_real_distribution<double> spectrum(2.0, 50.0);
    std::uniform_real_distribution<double> diffusion(0.5, 2.0);
    constexpr Eigen::Index dims[] = {1, 2, 4};
    constexpr double deltas[] = {0.1, 0.5};

    KernelValidationReport report;
    for (int c = 0; c < cases; ++c) {
        const Eigen::Index d = dims[c % 3];
        const double delta = deltas[c % 2];
        Eigen::VectorXd alphas(d);
        for (Eigen::Index i = 0; i < d; ++i) alphas(i) = spectrum(rng);
        const Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(
                                      Eigen::MatrixXd(standard_normal(d * d, rng).reshaped(d, d)))
                                      .householderQ();
        ScalingConfig config;
        config.A = SymMatrixd(Eigen::MatrixXd(Q * alphas.asDiagonal() * Q.transpose()));
        config.gamma = 1.0;
        config.u = diffusion(rng);
        const ChainState state{standard_normal(d, rng), standard_normal(d, rng)};
        const Eigen::VectorXd grad = standard_normal(d, rng);

        const auto analytic = kernel_moments(state, grad, config, delta);
        const auto cloud = euler_frozen(state, grad, config, delta, {substeps, replicas, false},
                                        splitmix64(seed + std::uint64_t(c) + 1), threads);
        KernelCaseReport rep;
        rep.dim = d;
        rep.delta = delta;
        rep.alpha_min = alphas.minCoeff();
        rep.alpha_max = alphas.maxCoeff();
        rep.agreement = compare_moments(cloud, analytic);
        rep.passed = rep.agreement.worst() <= z_tolerance;
        report.cases.push_back(rep);
    }
    return report;
}

} // namespace uldmc
