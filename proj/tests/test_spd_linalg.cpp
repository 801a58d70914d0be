#include <doctest.h>

#include <cmath>
#include <limits>

#include "test_support.hpp"
#include "uldmc/spd_linalg.hpp"

using namespace uldmc;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("SymMatrix symmetrizes and rejects bad shapes") {
    MatrixXd m(2, 2);
    m << 1.0, 2.0, 2.0 + 1e-14, 3.0;
    const SymMatrixd s(m);
    CHECK(s(0, 1) == s(1, 0));
    CHECK_THROWS_AS(SymMatrixd(MatrixXd(2, 3)), Error);
    CHECK_THROWS_AS(SymMatrixd(MatrixXd::Zero(kMaxDim + 1, kMaxDim + 1)), Error);
}

TEST_CASE("sym_eig: identity, diagonal, random SPD") {
    const auto id = sym_eig(SymMatrixd::identity(3));
    CHECK(id.values.isApprox(VectorXd::Ones(3)));
    CHECK((id.vectors.transpose() * id.vectors).isApprox(MatrixXd::Identity(3, 3), 1e-12));

    const auto diag = sym_eig(SymMatrixd::diagonal(VectorXd{{8.0, 2.0}}));
    CHECK(diag.values(0) == doctest::Approx(2.0));
    CHECK(diag.values(1) == doctest::Approx(8.0));
    CHECK(std::abs(diag.vectors(1, 0)) == doctest::Approx(1.0));
    CHECK(std::abs(diag.vectors(0, 1)) == doctest::Approx(1.0));

    Rng rng(11);
    const SymMatrixd M = testing::random_spd(4, 0.5, 20.0, rng);
    const auto p = sym_eig(M);
    for (Eigen::Index i = 0; i < 4; ++i) {
        CHECK((M.matrix() * p.vectors.col(i) - p.values(i) * p.vectors.col(i)).norm() < 1e-9);
        if (i > 0) CHECK(p.values(i - 1) <= p.values(i));
    }
    CHECK((p.vectors.transpose() * p.vectors - MatrixXd::Identity(4, 4)).norm() < 1e-10);
    const MatrixXd rebuilt = p.vectors * p.values.asDiagonal() * p.vectors.transpose();
    CHECK((rebuilt - M.matrix()).norm() <= 1e-10 * M.matrix().norm());
}

TEST_CASE("sym_eig rejects non-finite entries") {
    MatrixXd m = MatrixXd::Identity(2, 2);
    m(0, 0) = NAN;
    CHECK_THROWS_WITH_AS(sym_eig(SymMatrixd(m)), doctest::Contains("InvalidInput"), Error);
}

TEST_CASE("matrix exponential closed forms") {
    CHECK(spd_exp(SymMatrixd::zero(3)).matrix().isApprox(MatrixXd::Identity(3, 3)));
    const auto e = spd_exp(SymMatrixd::diagonal(VectorXd{{std::log(2.0), std::log(3.0)}}));
    CHECK(e(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(e(1, 1) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(std::abs(e(0, 1)) < 1e-15);
}

TEST_CASE("matrix exponential matches a truncated Taylor series") {
    Rng rng(3);
    for (int trial = 0; trial < 5; ++trial) {
        MatrixXd raw = MatrixXd::Zero(3, 3);
        for (Eigen::Index i = 0; i < 9; ++i) raw(i) = testing::uniform(-1.0, 1.0, rng);
        const SymMatrixd M(raw);
        MatrixXd series = MatrixXd::Identity(3, 3), term = MatrixXd::Identity(3, 3);
        for (int k = 1; k <= 20; ++k) {
            term = term * M.matrix() / double(k);
            series += term;
        }
        CHECK((spd_exp(M).matrix() - series).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("exp semigroup property") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const SymMatrixd M = testing::random_spd(3, 0.1, 5.0, rng);
        const double s = testing::uniform(-1.0, 1.0, rng), t = testing::uniform(-1.0, 1.0, rng);
        const MatrixXd lhs = spd_exp(M, s).matrix() * spd_exp(M, t).matrix();
        CHECK((lhs - spd_exp(M, s + t).matrix()).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("inverse times M is identity") {
    Rng rng(17);
    for (double cond : {1.0, 1e2, 1e4, 1e6, 1e8}) {
        for (int trial = 0; trial < 5; ++trial) {
            const SymMatrixd M = testing::random_spd(5, 1.0, cond, rng);
            const MatrixXd r = spd_inverse(M).matrix() * M.matrix() - MatrixXd::Identity(5, 5);
            const double err = r.cwiseAbs().maxCoeff();
            CAPTURE(cond);
            CAPTURE(err);
            // Forming inv*M costs about cond*eps in double, so 1e-9 is only reachable up to cond 1e6.
            if (cond <= 1e6) CHECK(err < 1e-9);
            CHECK(err <= 10.0 * 5 * cond * std::numeric_limits<double>::epsilon());
        }
    }
}

TEST_CASE("inverse and sqrt of a singular matrix") {
    const SymMatrixd singular = SymMatrixd::diagonal(VectorXd{{1.0, 0.0}});
    CHECK_THROWS_WITH_AS(spd_inverse(singular), doctest::Contains("SingularMatrix"), Error);
    CHECK_THROWS_AS(spd_sqrt(singular), Error);
    const auto root = psd_sqrt(SymMatrixd::diagonal(VectorXd{{4.0, -1e-18}}));
    CHECK(root(0, 0) == doctest::Approx(2.0));
    CHECK(root(1, 1) == 0.0);
}

TEST_CASE("matrix function results are exactly symmetric") {
    Rng rng(23);
    const SymMatrixd M = testing::random_spd(6, 0.3, 30.0, rng);
    for (const auto& r : {spd_exp(M, -0.7), spd_inverse(M), spd_sqrt(M)}) {
        CHECK(r.matrix() == r.matrix().transpose());
    }
}

TEST_CASE("cholesky_psd") {
    CHECK(cholesky_psd(SymMatrixd::identity(3)).isApprox(MatrixXd::Identity(3, 3)));

    MatrixXd m(2, 2);
    m << 4.0, 2.0, 2.0, 3.0;
    const MatrixXd L = cholesky_psd(SymMatrixd(m));
    CHECK((L * L.transpose() - m).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(L(0, 1) == 0.0);

    CHECK(cholesky_psd(SymMatrixd::zero(3)).isZero(0.0));

    // Rank-deficient PSD goes through the jitter path.
    MatrixXd rank1(2, 2);
    rank1 << 1.0, 1.0, 1.0, 1.0;
    const MatrixXd L1 = cholesky_psd(SymMatrixd(rank1));
    CHECK((L1 * L1.transpose() - rank1).norm() <= 1e-8 * rank1.norm());

    MatrixXd indefinite(2, 2);
    indefinite << 1.0, 0.0, 0.0, -1.0;
    CHECK_THROWS_WITH_AS(cholesky_psd(SymMatrixd(indefinite)), doctest::Contains("NotPositiveDefinite"), Error);
}

TEST_CASE("cholesky_psd factors are lower triangular with nonnegative diagonal") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const SymMatrixd M = testing::random_spd(5, 1e-6, 10.0, rng);
        const MatrixXd L = cholesky_psd(M);
        CHECK(L.isLowerTriangular(0.0));
        CHECK((L.diagonal().array() >= 0.0).all());
        CHECK((L * L.transpose() - M.matrix()).norm() <= 1e-8 * M.matrix().norm());
    }
}
