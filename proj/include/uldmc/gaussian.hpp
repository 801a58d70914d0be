#pragma once

#include <Eigen/Core>

#include "uldmc/spd_linalg.hpp"

namespace uldmc {

/// Mean and covariance of a (possibly empirical) law on R^d.
struct GaussianSummary {
    Eigen::VectorXd mean;
    SymMatrixd cov;

    Eigen::Index dim() const noexcept { return mean.size(); }
};

} // namespace uldmc
