#pragma once

// Dense symmetric / SPD kernels. Every matrix function goes through one
// symmetric eigendecomposition and is re-symmetrized on the way out.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "uldmc/errors.hpp"

namespace uldmc {

inline constexpr Eigen::Index kMaxDim = 4096;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
    return m.allFinite();
}

template <typename Scalar>
MatrixX<Scalar> symmetrized(const MatrixX<Scalar>& m) {
    return Scalar(0.5) * (m + m.transpose());
}

/// Symmetric matrix. Input is symmetrized on construction, so an entry pair
/// (i,j),(j,i) that differs by round-off is replaced by its average.
template <typename Scalar>
class SymMatrix {
public:
    using Matrix = MatrixX<Scalar>;

    SymMatrix() = default;

    template <typename Derived>
    explicit SymMatrix(const Eigen::MatrixBase<Derived>& m) {
        if (m.rows() != m.cols()) {
            fail(Errc::InvalidInput, "SymMatrix requires a square matrix, got " +
                                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
        }
        if (m.rows() > kMaxDim) {
            fail(Errc::InvalidInput, "dimension " + std::to_string(m.rows()) + " exceeds cap " +
                                         std::to_string(kMaxDim));
        }
        Matrix dense = m;
        m_ = symmetrized<Scalar>(dense);
    }

    static SymMatrix identity(Eigen::Index d) { return SymMatrix(Matrix::Identity(d, d)); }
    static SymMatrix zero(Eigen::Index d) { return SymMatrix(Matrix::Zero(d, d)); }
    static SymMatrix diagonal(const VectorX<Scalar>& diag) {
        return SymMatrix(Matrix(diag.asDiagonal()));
    }

    Eigen::Index dim() const noexcept { return m_.rows(); }
    const Matrix& matrix() const noexcept { return m_; }
    Scalar operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

    friend SymMatrix operator*(Scalar s, const SymMatrix& a) { return SymMatrix(Matrix(s * a.m_)); }

private:
    Matrix m_;
};

template <typename Scalar>
struct EigenPair {
    VectorX<Scalar> values;   // ascending
    MatrixX<Scalar> vectors;  // orthonormal columns

    Eigen::Index dim() const noexcept { return values.size(); }
    Scalar min_value() const { return values(0); }
    Scalar max_value() const { return values(values.size() - 1); }
};

template <typename Scalar>
EigenPair<Scalar> sym_eig(const SymMatrix<Scalar>& m) {
    if (!all_finite(m.matrix())) fail(Errc::InvalidInput, "sym_eig: non-finite entries");
    if (m.dim() == 0) return {VectorX<Scalar>(0), MatrixX<Scalar>(0, 0)};
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> solver(m.matrix(), Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) {
        fail(Errc::InvalidInput, "sym_eig: eigensolver did not converge");
    }
    return {solver.eigenvalues(), solver.eigenvectors()};
}

/// vectors * diag(fn(values)) * vectors^T for an already computed pair.
/// Throws SingularMatrix when fn is not finite on some eigenvalue.
template <typename Scalar, typename Fn>
SymMatrix<Scalar> apply_fn(const EigenPair<Scalar>& pair, Fn&& fn) {
    VectorX<Scalar> mapped(pair.dim());
    for (Eigen::Index i = 0; i < pair.dim(); ++i) {
        mapped(i) = fn(pair.values(i));
        if (!std::isfinite(static_cast<double>(mapped(i)))) {
            fail(Errc::SingularMatrix, "matrix function undefined at eigenvalue " +
                                           std::to_string(static_cast<double>(pair.values(i))));
        }
    }
    MatrixX<Scalar> r = pair.vectors * mapped.asDiagonal() * pair.vectors.transpose();
    return SymMatrix<Scalar>(r);
}

template <typename Scalar, typename Fn>
SymMatrix<Scalar> spd_apply_fn(const SymMatrix<Scalar>& m, Fn&& fn) {
    return apply_fn(sym_eig(m), std::forward<Fn>(fn));
}

// exp(t * M)
template <typename Scalar>
SymMatrix<Scalar> spd_exp(const SymMatrix<Scalar>& m, Scalar t = Scalar(1)) {
    return spd_apply_fn(m, [t](Scalar x) { return std::exp(t * x); });
}

template <typename Scalar>
SymMatrix<Scalar> spd_inverse(const SymMatrix<Scalar>& m) {
    return spd_apply_fn(m, [](Scalar x) {
        return x > Scalar(0) ? Scalar(1) / x : std::numeric_limits<Scalar>::quiet_NaN();
    });
}

template <typename Scalar>
SymMatrix<Scalar> spd_sqrt(const SymMatrix<Scalar>& m) {
    return spd_apply_fn(m, [](Scalar x) {
        return x > Scalar(0) ? std::sqrt(x) : std::numeric_limits<Scalar>::quiet_NaN();
    });
}

/// Square root of a PSD matrix with negative round-off eigenvalues clipped to 0.
template <typename Scalar>
SymMatrix<Scalar> psd_sqrt(const SymMatrix<Scalar>& m) {
    return spd_apply_fn(m, [](Scalar x) { return std::sqrt(std::max(x, Scalar(0))); });
}

template <typename Scalar>
Scalar spectral_norm(const SymMatrix<Scalar>& m) {
    if (m.dim() == 0) return Scalar(0);
    const auto pair = sym_eig(m);
    return std::max(std::abs(pair.min_value()), std::abs(pair.max_value()));
}

template <typename Scalar>
bool is_spd(const SymMatrix<Scalar>& m) {
    if (m.dim() == 0 || !all_finite(m.matrix())) return false;
    return sym_eig(m).min_value() > Scalar(0);
}

/// Lower Cholesky factor of a PSD matrix. A strict factorization is tried
/// first; on failure a diagonal jitter of 1e-12 * trace / d is added and
/// escalated by 10x at most three times.
template <typename Scalar>
MatrixX<Scalar> cholesky_psd(const SymMatrix<Scalar>& m) {
    const auto d = m.dim();
    if (!all_finite(m.matrix())) fail(Errc::InvalidInput, "cholesky_psd: non-finite entries");
    if (d == 0) return MatrixX<Scalar>(0, 0);
    if (m.matrix().isZero(Scalar(0))) return MatrixX<Scalar>::Zero(d, d);

    Eigen::LLT<MatrixX<Scalar>> llt(m.matrix());
    if (llt.info() == Eigen::Success) return llt.matrixL();

    const Scalar trace = m.matrix().trace();
    if (!(trace > Scalar(0))) {
        fail(Errc::NotPositiveDefinite, "cholesky_psd: nonpositive trace");
    }
    Scalar jitter = Scalar(1e-12) * trace / Scalar(d);
    for (int attempt = 0; attempt <= 3; ++attempt, jitter *= Scalar(10)) {
        MatrixX<Scalar> shifted = m.matrix();
        shifted.diagonal().array() += jitter;
        llt.compute(shifted);
        if (llt.info() == Eigen::Success) return llt.matrixL();
    }
    fail(Errc::NotPositiveDefinite, "cholesky_psd: matrix indefinite after maximal jitter");
}

using SymMatrixd = SymMatrix<double>;
using EigenPaird = EigenPair<double>;

} // namespace uldmc
