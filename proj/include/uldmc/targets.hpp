#pragma once

// Strongly log-concave targets p(x) ∝ exp(-f(x)) with value, gradient and
// Hessian oracles plus the constants the tuner and planners consume.

#include <Eigen/Core>

#include <algorithm>
#include <functional>
#include <optional>
#include <string>
#include <utility>

#include "uldmc/gaussian.hpp"
#include "uldmc/rng.hpp"
#include "uldmc/spd_linalg.hpp"

namespace uldmc {

struct TargetModel {
    using Vector = Eigen::VectorXd;

    std::string name;
    Eigen::Index dim = 0;
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> grad;
    std::function<SymMatrixd(const Vector&)> hess;
    double m = 0.0;  // strong convexity
    double L = 0.0;  // gradient Lipschitz constant
    Vector minimizer;
    bool hessian_constant = false;
    // Present when exact draws from the target are available (Gaussian targets).
    std::optional<GaussianSummary> exact_law;

    double kappa() const noexcept { return L / m; }
};

/// Throws InvalidInput if L >= m > 0 or the minimizer consistency check fails.
void validate_target(const TargetModel& target);

TargetModel make_gaussian(const Eigen::VectorXd& mean, const SymMatrixd& precision);

/// f(x) = sum_i log(1 + exp(-y_i a_i^T x)) + ridge/2 |x|^2, rows of `features` are a_i.
TargetModel make_logistic_ridge(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                                double ridge);

struct LogisticData {
    Eigen::MatrixXd features;
    Eigen::VectorXd labels;
};

/// One observation per line, comma separated, label (-1 or +1) last, no header.
LogisticData load_logistic_csv(const std::string& path);

struct GradCheck {
    double gradient = 0.0;
    double hessian = 0.0;
    double max() const noexcept { return std::max(gradient, hessian); }
};

/// Central-difference check of the gradient (against value) and of the
/// Hessian rows (against differenced gradients). Errors are
/// |analytic - numeric| / (1 + |analytic|), maximized over entries.
GradCheck grad_check(const TargetModel& target, const Eigen::VectorXd& point);

/// Starting position and an upper bound D on |x0 - x*|.
struct InitSpec {
    Eigen::VectorXd x0;
    double D = 0.0;
};

/// D defaults to |x0 - x*|; a supplied D smaller than that is rejected.
InitSpec make_init(const TargetModel& target, const Eigen::VectorXd& x0,
                   std::optional<double> D = std::nullopt);

/// `count` exact draws (rows) from a target with an exact law.
Eigen::MatrixXd draw_exact(const TargetModel& target, Eigen::Index count, Rng& rng);

/// Worst violations found by random spot checks of the target assumptions;
/// all three are <= 0 (up to round-off) for a valid target.
struct AssumptionCheck {
    double lipschitz = 0.0;   // max |∇f(x)-∇f(y)| - L|x-y|
    double convexity = 0.0;   // max (m/2)|y-x|^2 - (f(y)-f(x)-<∇f(x),y-x>)
    double hessian_norm = 0.0;  // max |∇²f(x)|_2 - L
};

AssumptionCheck spot_check_assumptions(const TargetModel& target, int pairs, double radius, Rng& rng);

} // namespace uldmc
