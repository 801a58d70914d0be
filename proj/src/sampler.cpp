#include "uldmc/sampler.hpp"

#include <cmath>
#include <string>

namespace uldmc {

namespace {

void check_config(const ScalingConfig& config, double delta) {
    require(std::isfinite(delta) && delta > 0.0, "step size delta must be > 0");
    require(std::isfinite(config.gamma) && config.gamma > 0.0, "gamma must be > 0");
    require(std::isfinite(config.u) && config.u > 0.0, "u must be > 0");
}

Eigen::MatrixXd from_spectrum(const EigenPaird& pair, const Eigen::VectorXd& values) {
    return pair.vectors * values.asDiagonal() * pair.vectors.transpose();
}

void guard_state(const ChainState& s) {
    const auto bad = [](const Eigen::VectorXd& w) {
        return !w.allFinite() || (w.size() > 0 && w.cwiseAbs().maxCoeff() > kBlowupThreshold);
    };
    if (bad(s.x) || bad(s.v)) fail(Errc::NumericalBlowup, "state left the representable range");
}

} // namespace

SymMatrixd KernelMoments::joint_cov() const {
    const auto d = mean_x.size();
    Eigen::MatrixXd J(2 * d, 2 * d);
    J.topLeftCorner(d, d) = cov_xx.matrix();
    J.topRightCorner(d, d) = cov_xv;
    J.bottomLeftCorner(d, d) = cov_xv.transpose();
    J.bottomRightCorner(d, d) = cov_vv.matrix();
    return SymMatrixd(J);
}

StepCache make_step_cache(const ScalingConfig& config, double delta) {
    check_config(config, delta);
    const auto pair = sym_eig(config.A);
    if (pair.dim() == 0 || !(pair.min_value() > 0.0)) {
        fail(Errc::InvalidInput, "scaling matrix A must be SPD");
    }
    const auto d = pair.dim();
    const double g = config.gamma;

    Eigen::VectorXd vv(d), vg(d), xv(d), xg(d), cvv(d), cxv(d), cxx(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const auto c = step_coefficients(pair.values(i), g, config.u, delta);
        vv(i) = c.v_from_v;
        vg(i) = c.v_from_g;
        xv(i) = c.x_from_v;
        xg(i) = c.x_from_g;
        cvv(i) = c.cov_vv;
        cxv(i) = c.cov_xv;
        cxx(i) = c.cov_xx;
    }

    StepCache cache;
    cache.gamma = g;
    cache.u = config.u;
    cache.delta = delta;
    cache.exp_neg = apply_fn(pair, [&](double a) { return std::exp(-g * a * delta); });
    cache.exp_neg2 = apply_fn(pair, [&](double a) { return std::exp(-2.0 * g * a * delta); });
    cache.A_inv = apply_fn(pair, [](double a) { return 1.0 / a; });
    cache.gammaA_inv = apply_fn(pair, [&](double a) { return 1.0 / (g * a); });
    cache.v_from_v = cache.exp_neg.matrix();
    cache.v_from_g = from_spectrum(pair, vg);
    cache.x_from_v = from_spectrum(pair, xv);
    cache.x_from_g = from_spectrum(pair, xg);
    cache.cov_xx = SymMatrixd(from_spectrum(pair, cxx));
    cache.cov_vv = SymMatrixd(from_spectrum(pair, cvv));
    cache.cov_xv = symmetrized<double>(from_spectrum(pair, cxv));

    Eigen::MatrixXd J(2 * d, 2 * d);
    J.topLeftCorner(d, d) = cache.cov_xx.matrix();
    J.topRightCorner(d, d) = cache.cov_xv;
    J.bottomLeftCorner(d, d) = cache.cov_xv.transpose();
    J.bottomRightCorner(d, d) = cache.cov_vv.matrix();
    cache.joint_factor = cholesky_psd(SymMatrixd(J));
    return cache;
}

KernelMoments kernel_moments(const ChainState& state, const Eigen::VectorXd& grad, const StepCache& cache) {
    require(state.x.size() == cache.dim() && state.v.size() == cache.dim() && grad.size() == cache.dim(),
            "kernel_moments: dimension mismatch");
    KernelMoments km;
    km.mean_v = cache.v_from_v * state.v + cache.v_from_g * grad;
    km.mean_x = state.x + cache.x_from_v * state.v + cache.x_from_g * grad;
    km.cov_xx = cache.cov_xx;
    km.cov_vv = cache.cov_vv;
    km.cov_xv = cache.cov_xv;
    return km;
}

KernelMoments kernel_moments(const ChainState& state, const Eigen::VectorXd& grad,
                             const ScalingConfig& config, double delta) {
    return kernel_moments(state, grad, make_step_cache(config, delta));
}

ChainState step_with_noise(const ChainState& state, const Eigen::VectorXd& grad, const StepCache& cache,
                           const Eigen::VectorXd& z) {
    const auto d = cache.dim();
    if (!grad.allFinite()) fail(Errc::NumericalBlowup, "gradient oracle returned a non-finite value");
    require(z.size() == 2 * d, "noise vector must have length 2d");
    const Eigen::VectorXd noise = cache.joint_factor.triangularView<Eigen::Lower>() * z;
    ChainState next;
    next.x = state.x + cache.x_from_v * state.v + cache.x_from_g * grad + noise.head(d);
    next.v = cache.v_from_v * state.v + cache.v_from_g * grad + noise.tail(d);
    guard_state(next);
    return next;
}

ChainState step(const ChainState& state, const TargetModel& target, const StepCache& cache, Rng& rng) {
    require(target.dim == cache.dim() && state.dim() == cache.dim(), "step: dimension mismatch");
    return step_with_noise(state, target.grad(state.x), cache, standard_normal(2 * cache.dim(), rng));
}

ChainRun run_chain(const InitSpec& init, const TargetModel& target, const ScalingConfig& config,
                   double delta, std::uint64_t n_steps, Rng& rng, const ChainOptions& options) {
    require(n_steps >= 1, "run_chain: n_steps must be >= 1");
    require(options.thin >= 1, "run_chain: thin must be >= 1");
    require(init.x0.size() == target.dim && config.dim() == target.dim, "run_chain: dimension mismatch");
    const StepCache cache = make_step_cache(config, delta);
    const auto d = target.dim;

    ChainState state{init.x0, Eigen::VectorXd::Zero(d)};
    if (options.random_initial_velocity) state.v = std::sqrt(config.u) * standard_normal(d, rng);

    ChainRun run;
    const std::uint64_t kept = n_steps > options.burn_in ? (n_steps - options.burn_in) / options.thin : 0;
    run.samples.resize(static_cast<Eigen::Index>(kept), 2 * d);
    run.steps.reserve(kept);

    Eigen::Index row = 0;
    for (std::uint64_t i = 1; i <= n_steps; ++i) {
        try {
            state = step(state, target, cache, rng);
        } catch (const Error& e) {
            if (e.code() != Errc::NumericalBlowup) throw;
            fail(Errc::NumericalBlowup, std::string(e.what()) + " at step " + std::to_string(i));
        }
        ++run.grad_calls;
        if (i > options.burn_in && (i - options.burn_in) % options.thin == 0) {
            run.samples.row(row).head(d) = state.x.transpose();
            run.samples.row(row).tail(d) = state.v.transpose();
            run.steps.push_back(i);
            ++row;
        }
    }
    run.final_state = state;
    return run;
}

std::vector<double> coupled_pair_run(const InitSpec& init_a, const InitSpec& init_b, const TargetModel& target,
                                     const ScalingConfig& config, double delta, std::uint64_t n_steps, Rng& rng) {
    require(init_a.x0.size() == target.dim && init_b.x0.size() == target.dim, "coupled_pair_run: dimension mismatch");
    const StepCache cache = make_step_cache(config, delta);
    const auto d = target.dim;
    ChainState a{init_a.x0, Eigen::VectorXd::Zero(d)};
    ChainState b{init_b.x0, Eigen::VectorXd::Zero(d)};
    const auto rho = [](const ChainState& p, const ChainState& q) {
        const Eigen::VectorXd dx = p.x - q.x;
        return dx.squaredNorm() + (dx + p.v - q.v).squaredNorm();
    };
    std::vector<double> out;
    out.reserve(n_steps + 1);
    out.push_back(rho(a, b));
    for (std::uint64_t i = 1; i <= n_steps; ++i) {
        const Eigen::VectorXd z = standard_normal(2 * d, rng);
        try {
            a = step_with_noise(a, target.grad(a.x), cache, z);
            b = step_with_noise(b, target.grad(b.x), cache, z);
        } catch (const Error& e) {
            if (e.code() != Errc::NumericalBlowup) throw;
            fail(Errc::NumericalBlowup, std::string(e.what()) + " at step " + std::to_string(i));
        }
        out.push_back(rho(a, b));
    }
    return out;
}

} // namespace uldmc
