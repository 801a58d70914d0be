#include <doctest.h>

#include <cmath>
#include <vector>

#include "test_support.hpp"
#include "uldmc/kernel.hpp"
#include "uldmc/sampler.hpp"

using namespace uldmc;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

ScalingConfig make_config(const SymMatrixd& A, double gamma, double u) {
    ScalingConfig c;
    c.A = A;
    c.gamma = gamma;
    c.u = u;
    return c;
}

ScalingConfig scalar_config(double a, double gamma, double u) {
    return make_config(SymMatrixd::diagonal(VectorXd::Constant(1, a)), gamma, u);
}

// Moments written as whole-matrix expressions in e^{-gamma A delta} and A^{-1}.
KernelMoments matrix_formula(const ChainState& s, const VectorXd& g, const ScalingConfig& c, double delta) {
    const auto d = s.dim();
    const MatrixXd I = MatrixXd::Identity(d, d);
    const MatrixXd E = spd_exp(c.A, -c.gamma * delta).matrix();
    const MatrixXd E2 = spd_exp(c.A, -2.0 * c.gamma * delta).matrix();
    const MatrixXd Ai = spd_inverse(c.A).matrix();
    const MatrixXd gAi = Ai / c.gamma;
    const double u = c.u, gm = c.gamma;
    KernelMoments k;
    k.mean_v = E * s.v - (u / gm) * Ai * (I - E) * g;
    k.mean_x = s.x + gAi * (I - E) * s.v - (u / gm) * Ai * (delta * I - gAi * (I - E)) * g;
    k.cov_vv = SymMatrixd(MatrixXd(u * (I - E2)));
    k.cov_xv = (u / gm) * Ai * (I + E2 - 2.0 * E);
    k.cov_xx = SymMatrixd(MatrixXd((2.0 * u / gm) * Ai *
                                   (delta * I - 0.5 * gAi * E2 + (2.0 / gm) * Ai * E - 1.5 * gAi)));
    return k;
}

double simpson(const auto& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return s * h / 3.0;
}

} // namespace

TEST_CASE("scalar example: unit velocity, no force") {
    const auto k = kernel_moments({VectorXd::Zero(1), VectorXd::Ones(1)}, VectorXd::Zero(1), scalar_config(2.0, 1.0, 1.0), 0.5);
    CHECK(k.mean_v(0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(k.mean_v(0) == doctest::Approx(0.36788).epsilon(1e-5));
    CHECK(k.mean_x(0) == doctest::Approx(0.5 * (1.0 - std::exp(-1.0))).epsilon(1e-14));
    CHECK(k.mean_x(0) == doctest::Approx(0.31606).epsilon(1e-4));
    CHECK(k.cov_vv(0, 0) == doctest::Approx(1.0 - std::exp(-2.0)).epsilon(1e-14));
    CHECK(k.cov_vv(0, 0) == doctest::Approx(0.86466).epsilon(1e-5));
}

TEST_CASE("scalar example: unit force from rest") {
    const auto k = kernel_moments({VectorXd::Zero(1), VectorXd::Zero(1)}, VectorXd::Ones(1), scalar_config(1.0, 1.0, 1.0), 1.0);
    CHECK(k.mean_v(0) == doctest::Approx(-(1.0 - std::exp(-1.0))).epsilon(1e-14));
    CHECK(k.mean_v(0) == doctest::Approx(-0.63212).epsilon(1e-5));
    CHECK(k.mean_x(0) == doctest::Approx(-std::exp(-1.0)).epsilon(1e-14));
    CHECK(k.mean_x(0) == doctest::Approx(-0.36788).epsilon(1e-5));
}

TEST_CASE("kernel moments agree with the whole-matrix expressions") {
    Rng rng(101);
    for (int trial = 0; trial < 30; ++trial) {
        const Eigen::Index d = 1 + trial % 5;
        const auto cfg = make_config(testing::random_spd(d, 0.5, 40.0, rng), testing::uniform(0.5, 2.0, rng),
                                     testing::uniform(0.2, 3.0, rng));
        const double delta = testing::uniform(0.05, 1.0, rng);
        const ChainState s{standard_normal(d, rng), standard_normal(d, rng)};
        const VectorXd g = standard_normal(d, rng);
        const auto got = kernel_moments(s, g, cfg, delta);
        const auto ref = matrix_formula(s, g, cfg, delta);
        CAPTURE(trial);
        CHECK((got.mean_x - ref.mean_x).norm() < 1e-9 * (1.0 + ref.mean_x.norm()));
        CHECK((got.mean_v - ref.mean_v).norm() < 1e-9 * (1.0 + ref.mean_v.norm()));
        CHECK((got.cov_vv.matrix() - ref.cov_vv.matrix()).norm() < 1e-9);
        CHECK((got.cov_xv - ref.cov_xv).norm() < 1e-9);
        // The expression for cov_xx cancels badly at small gamma*alpha*delta, hence the looser bound.
        CHECK((got.cov_xx.matrix() - ref.cov_xx.matrix()).norm() < 1e-7 * (1.0 + ref.cov_xx.matrix().norm()));
    }
}

TEST_CASE("joint covariance is PSD") {
    Rng rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        const Eigen::Index d = 1 + trial % 4;
        const auto cfg = make_config(testing::random_spd(d, 1e-3, 1e3, rng), 1.0, testing::uniform(0.2, 3.0, rng));
        const double delta = std::exp(testing::uniform(std::log(1e-6), std::log(10.0), rng));
        const auto k = kernel_moments({VectorXd::Zero(d), VectorXd::Zero(d)}, VectorXd::Zero(d), cfg, delta);
        const auto p = sym_eig(k.joint_cov());
        CHECK(p.min_value() >= -1e-12 * (1.0 + p.max_value()));
    }
}

TEST_CASE("delta to zero recovers the state with vanishing covariance") {
    Rng rng(9);
    const auto cfg = make_config(testing::random_spd(3, 0.5, 20.0, rng), 1.0, 2.0);
    const ChainState s{standard_normal(3, rng), standard_normal(3, rng)};
    const VectorXd g = standard_normal(3, rng);
    std::vector<double> gaps;
    for (double delta : {1e-2, 1e-4, 1e-6, 1e-8}) {
        const auto k = kernel_moments(s, g, cfg, delta);
        gaps.push_back((k.mean_x - s.x).norm() + (k.mean_v - s.v).norm() + k.joint_cov().matrix().norm());
    }
    // Every term is O(delta), so each factor 100 in delta shrinks the gap by about 100.
    for (std::size_t i = 1; i < gaps.size(); ++i) {
        CHECK(gaps[i] < gaps[i - 1]);
        CHECK(gaps[i - 1] / gaps[i] == doctest::Approx(100.0).epsilon(0.3));
    }
    CHECK_THROWS_WITH_AS(kernel_moments(s, g, cfg, 0.0), doctest::Contains("InvalidInput"), Error);
    CHECK_THROWS_AS(kernel_moments(s, g, cfg, -1.0), Error);
}

TEST_CASE("small-z expansions match quadrature and are continuous at the cutoff") {
    for (double z : {1e-6, 1e-3, 0.1, 0.3, 0.499, 0.5, 0.501, 1.0, 3.0}) {
        const double quad = simpson([](double s) { return std::pow(1.0 - std::exp(-s), 2); }, 0.0, z, 2000);
        CAPTURE(z);
        CHECK(detail::position_spread(z) == doctest::Approx(quad).epsilon(1e-10));
        const double gap_ref = simpson([](double s) { return 1.0 - std::exp(-s); }, 0.0, z, 2000);
        CHECK(detail::drift_gap(z) == doctest::Approx(gap_ref).epsilon(1e-10));
    }
    const double lo = std::nextafter(detail::kSeriesCutoff, 0.0), hi = detail::kSeriesCutoff;
    CHECK(detail::position_spread(lo) == doctest::Approx(detail::position_spread(hi)).epsilon(1e-14));
    CHECK(detail::drift_gap(lo) == doctest::Approx(detail::drift_gap(hi)).epsilon(1e-14));
    // Leading terms of the expansions.
    CHECK(detail::position_spread(1e-6) == doctest::Approx(1e-18 / 3.0).epsilon(1e-5));
    CHECK(detail::drift_gap(1e-6) == doctest::Approx(0.5e-12).epsilon(1e-5));
}

TEST_CASE("coefficients are templated on the scalar type") {
    const auto cf = step_coefficients<float>(2.0f, 1.0f, 1.0f, 0.5f);
    const auto cd = step_coefficients<double>(2.0, 1.0, 1.0, 0.5);
    const auto cl = step_coefficients<long double>(2.0L, 1.0L, 1.0L, 0.5L);
    CHECK(double(cf.cov_xx) == doctest::Approx(cd.cov_xx).epsilon(1e-6));
    CHECK(double(cl.cov_xx) == doctest::Approx(cd.cov_xx).epsilon(1e-14));
    CHECK(double(cl.x_from_g) == doctest::Approx(cd.x_from_g).epsilon(1e-14));
}

TEST_CASE("step cache reconstructions") {
    Rng rng(13);
    const auto cfg = make_config(testing::random_spd(4, 1.0, 30.0, rng), 1.5, 0.7);
    const double delta = 0.2;
    const auto cache = make_step_cache(cfg, delta);
    CHECK((cache.exp_neg.matrix() - spd_exp(cfg.A, -1.5 * delta).matrix()).norm() < 1e-9);
    CHECK((cache.exp_neg2.matrix() - spd_exp(cfg.A, -3.0 * delta).matrix()).norm() < 1e-9);
    CHECK((cache.A_inv.matrix() * cfg.A.matrix() - MatrixXd::Identity(4, 4)).norm() < 1e-9);
    CHECK((cache.gammaA_inv.matrix() * 1.5 * cfg.A.matrix() - MatrixXd::Identity(4, 4)).norm() < 1e-9);
    const MatrixXd J = cache.joint_factor * cache.joint_factor.transpose();
    const auto k = kernel_moments({VectorXd::Zero(4), VectorXd::Zero(4)}, VectorXd::Zero(4), cache);
    CHECK((J - k.joint_cov().matrix()).norm() < 1e-9 * (1.0 + J.norm()));

    ScalingConfig bad = cfg;
    bad.A = SymMatrixd::diagonal(VectorXd{{1.0, -1.0, 1.0, 1.0}});
    CHECK_THROWS_WITH_AS(make_step_cache(bad, delta), doctest::Contains("InvalidInput"), Error);
}
