#include "uldmc/tuner.hpp"

#include <cmath>
#include <limits>

#include "uldmc/parallel.hpp"

namespace uldmc {

namespace {

void require_plan_inputs(double epsilon, Eigen::Index d, double m, double D) {
    require(std::isfinite(epsilon) && epsilon > 0.0, "epsilon must be > 0");
    require(d >= 1, "dimension must be >= 1");
    require(std::isfinite(m) && m > 0.0, "m must be > 0");
    require(std::isfinite(D) && D >= 0.0, "D must be >= 0");
}

void set_steps(PlanOutput& plan, double n_real) {
    plan.n_real = n_real;
    constexpr double kMax = 1.8e19;
    if (!(n_real < kMax)) {
        plan.n_steps = std::numeric_limits<std::uint64_t>::max();
        plan.warnings.push_back("iteration bound exceeds the representable range; saturated");
        return;
    }
    plan.n_steps = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(n_real)));
}

} // namespace

ThetaEstimate estimate_theta(const TargetModel& target, const std::vector<Eigen::VectorXd>& candidate_ys,
                             const std::vector<Eigen::VectorXd>& probe_xs, unsigned threads) {
    require(!candidate_ys.empty(), "estimate_theta: no candidate anchors");
    require(!probe_xs.empty(), "estimate_theta: no probe points");
    for (const auto& y : candidate_ys) require(y.size() == target.dim, "estimate_theta: candidate dimension");
    for (const auto& x : probe_xs) require(x.size() == target.dim, "estimate_theta: probe dimension");

    if (target.hessian_constant) {
        const auto H = target.hess(candidate_ys.front());
        return {0.0, candidate_ys.front(), sym_eig(H).min_value()};
    }

    std::vector<Eigen::MatrixXd> probe_hess(probe_xs.size());
    parallel_for(probe_xs.size(), threads,
                 [&](std::size_t i) { probe_hess[i] = target.hess(probe_xs[i]).matrix(); });

    std::vector<double> inner(candidate_ys.size());
    std::vector<double> anchor_min(candidate_ys.size());
    parallel_for(candidate_ys.size(), threads, [&](std::size_t c) {
        const Eigen::MatrixXd Hy = target.hess(candidate_ys[c]).matrix();
        const double my = sym_eig(SymMatrixd(Hy)).min_value();
        if (!(my > 0.0)) fail(Errc::InvalidInput, "Hessian at candidate anchor is not SPD");
        double worst = 0.0;
        for (const auto& Hx : probe_hess) {
            worst = std::max(worst, spectral_norm(SymMatrixd(Eigen::MatrixXd(Hx - Hy))) / my);
        }
        inner[c] = worst;
        anchor_min[c] = my;
    });

    std::size_t best = 0;
    for (std::size_t c = 1; c < inner.size(); ++c) {
        if (inner[c] < inner[best]) best = c;
    }
    return {inner[best], candidate_ys[best], anchor_min[best]};
}

ThetaSearchSets default_theta_sets(const TargetModel& target, int per_radius, std::uint64_t seed) {
    require(per_radius >= 1, "probes per radius must be >= 1");
    Rng rng(seed);
    ThetaSearchSets sets;
    sets.candidates.push_back(target.minimizer);
    sets.probes.push_back(target.minimizer);
    const double scale = std::sqrt(static_cast<double>(target.dim) / target.m);
    for (double radius : {1.0, 2.0, 4.0}) {
        for (int k = 0; k < per_radius; ++k) {
            Eigen::VectorXd dir = standard_normal(target.dim, rng);
            while (dir.norm() == 0.0) dir = standard_normal(target.dim, rng);
            sets.probes.push_back(target.minimizer + radius * scale * dir.normalized());
        }
    }
    return sets;
}

ScalingConfig scaled_params(const TargetModel& target, const ThetaEstimate& est) {
    require(est.m_hat > 0.0 && std::isfinite(est.m_hat), "scaled_params: m_hat must be > 0");
    require(est.y_hat.size() == target.dim, "scaled_params: anchor dimension mismatch");
    const SymMatrixd H = target.hess(est.y_hat);
    if (!is_spd(H)) fail(Errc::InvalidInput, "scaled_params: Hessian at anchor is not SPD");

    ScalingConfig c;
    c.u = 2.0 / est.m_hat;
    c.gamma = 1.0;
    c.A = c.u * H;
    c.theta = est.theta;
    c.m_hat = est.m_hat;
    c.kappa_hat = target.L / est.m_hat;
    c.y_hat = est.y_hat;
    if (est.theta > 0.5) {
        c.warnings.push_back("theta = " + std::to_string(est.theta) +
                             " > 1/2: iteration guarantee does not apply");
    }
    return c;
}

ScalingConfig unscaled_config(const TargetModel& target) {
    ScalingConfig c;
    c.A = SymMatrixd::identity(target.dim);
    c.u = 1.0 / target.L;
    c.gamma = 2.0;
    c.theta = 0.0;
    c.m_hat = target.m;
    c.kappa_hat = target.kappa();
    c.y_hat = target.minimizer;
    return c;
}

PlanOutput plan_scaled(double epsilon, const ScalingConfig& config, Eigen::Index d, double m, double D) {
    require_plan_inputs(epsilon, d, m, D);
    require(config.kappa_hat > 0.0 && std::isfinite(config.kappa_hat), "kappa_hat must be > 0");
    require(std::isfinite(config.theta) && config.theta >= 0.0, "theta must be >= 0");
    if (config.theta >= 0.5) {
        fail(Errc::TheoremInapplicable, "theta = " + std::to_string(config.theta) + " >= 1/2");
    }
    const double slack = 1.0 - 2.0 * config.theta;
    const double spread = static_cast<double>(d) / m + D * D;
    const double kh = config.kappa_hat;

    PlanOutput p;
    p.epsilon = epsilon;
    p.delta = epsilon * slack / kh * std::sqrt(5.0 / 73728.0) * std::sqrt(1.0 / spread);
    set_steps(p, kh / (epsilon * slack * slack) * std::sqrt(18432.0 / 5.0) * std::sqrt(spread) *
                     std::log(16.0 * (2.0 * static_cast<double>(d) / m + D * D) / epsilon));

    const double energy_bound = 36.0 * spread;
    const double lemma_bound = slack / (2.0 * kh) *
                               std::sqrt(5.0 * (8.0 * static_cast<double>(d) / m + 4.0 * D * D) /
                                         (8.0 * energy_bound));
    const bool contraction_ok = 2.0 * p.delta * slack < 1.0;
    const bool energy_ok = p.delta <= lemma_bound;
    if (!contraction_ok) p.warnings.push_back("2*delta*(1-2*theta) >= 1: epsilon too large");
    if (!energy_ok) p.warnings.push_back("delta exceeds the kinetic-energy step constraint: epsilon too large");
    p.applicable = contraction_ok && energy_ok;
    return p;
}

PlanOutput plan_unscaled(double epsilon, double kappa, Eigen::Index d, double m, double D) {
    require_plan_inputs(epsilon, d, m, D);
    require(std::isfinite(kappa) && kappa >= 1.0, "kappa must be >= 1");
    const double spread = static_cast<double>(d) / m + D * D;

    PlanOutput p;
    p.epsilon = epsilon;
    p.delta = epsilon / (104.0 * kappa) * std::sqrt(1.0 / spread);
    set_steps(p, 52.0 * kappa * kappa / epsilon * std::sqrt(spread) * std::log(24.0 * spread / epsilon));
    p.applicable = true;
    return p;
}

} // namespace uldmc
