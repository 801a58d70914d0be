#include "uldmc/targets.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

namespace uldmc {

namespace {

// log(1 + exp(t)) without overflow.
double softplus(double t) {
    return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

} // namespace

void validate_target(const TargetModel& target) {
    require(target.dim > 0, "target dimension must be positive");
    require(target.m > 0.0 && std::isfinite(target.m), "strong convexity constant m must be > 0");
    require(target.L >= target.m && std::isfinite(target.L), "Lipschitz constant L must be >= m");
    require(target.minimizer.size() == target.dim, "minimizer dimension mismatch");
    require(target.grad && target.hess && target.value, "target oracles must be set");
    const double gnorm = target.grad(target.minimizer).norm();
    if (!(gnorm <= 1e-8 * (1.0 + target.L))) {
        fail(Errc::InvalidInput, "gradient at minimizer has norm " + std::to_string(gnorm));
    }
}

TargetModel make_gaussian(const Eigen::VectorXd& mean, const SymMatrixd& precision) {
    require(mean.size() == precision.dim() && mean.size() > 0, "make_gaussian: dimension mismatch");
    require(mean.allFinite(), "make_gaussian: non-finite mean");
    const auto eig = sym_eig(precision);
    if (!(eig.min_value() > 0.0)) fail(Errc::InvalidInput, "make_gaussian: precision is not SPD");

    const Eigen::MatrixXd P = precision.matrix();
    TargetModel t;
    t.name = "gaussian";
    t.dim = mean.size();
    t.value = [P, mean](const Eigen::VectorXd& x) {
        const Eigen::VectorXd r = x - mean;
        return 0.5 * r.dot(P * r);
    };
    t.grad = [P, mean](const Eigen::VectorXd& x) -> Eigen::VectorXd { return P * (x - mean); };
    t.hess = [precision](const Eigen::VectorXd&) { return precision; };
    t.m = eig.min_value();
    t.L = eig.max_value();
    t.minimizer = mean;
    t.hessian_constant = true;
    t.exact_law = GaussianSummary{mean, apply_fn(eig, [](double l) { return 1.0 / l; })};
    validate_target(t);
    return t;
}

TargetModel make_logistic_ridge(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
                                double ridge) {
    require(ridge > 0.0 && std::isfinite(ridge), "make_logistic_ridge: ridge must be > 0");
    require(features.rows() == labels.size(), "make_logistic_ridge: one label per feature row");
    require(features.cols() > 0, "make_logistic_ridge: need at least one feature column");
    require(features.allFinite(), "make_logistic_ridge: non-finite features");
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        require(labels(i) == 1.0 || labels(i) == -1.0, "make_logistic_ridge: labels must be -1 or +1");
    }
    const Eigen::Index d = features.cols();
    // Fold labels into rows: z_i = y_i a_i.
    const Eigen::MatrixXd Z = labels.asDiagonal() * features;

    TargetModel t;
    t.name = "logistic";
    t.dim = d;
    t.value = [Z, ridge](const Eigen::VectorXd& x) {
        const Eigen::VectorXd margins = Z * x;
        double f = 0.5 * ridge * x.squaredNorm();
        for (Eigen::Index i = 0; i < margins.size(); ++i) f += softplus(-margins(i));
        return f;
    };
    t.grad = [Z, ridge](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        const Eigen::VectorXd margins = Z * x;
        Eigen::VectorXd w(margins.size());
        for (Eigen::Index i = 0; i < margins.size(); ++i) w(i) = -sigmoid(-margins(i));
        return Z.transpose() * w + ridge * x;
    };
    t.hess = [Z, ridge](const Eigen::VectorXd& x) {
        const Eigen::VectorXd margins = Z * x;
        Eigen::VectorXd w(margins.size());
        for (Eigen::Index i = 0; i < margins.size(); ++i) {
            const double s = sigmoid(margins(i));
            w(i) = s * (1.0 - s);
        }
        Eigen::MatrixXd H = Z.transpose() * w.asDiagonal() * Z;
        H.diagonal().array() += ridge;
        return SymMatrixd(H);
    };
    t.m = ridge;
    const double gram_max = features.rows() == 0
                                ? 0.0
                                : sym_eig(SymMatrixd(Eigen::MatrixXd(features.transpose() * features))).max_value();
    t.L = ridge + 0.25 * std::max(gram_max, 0.0);
    t.hessian_constant = features.isZero(0.0);

    // Damped Newton from the origin.
    Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
        const Eigen::VectorXd g = t.grad(x);
        if (g.norm() <= 1e-10) {
            converged = true;
            break;
        }
        const Eigen::VectorXd step = t.hess(x).matrix().llt().solve(g);
        const double f0 = t.value(x);
        const double slope = g.dot(step);
        double s = 1.0;
        // Once the predicted decrease is below the round-off in f the Armijo test is meaningless;
        // take the full step, which is in the quadratic convergence region.
        const bool resolvable = 0.5 * slope > 1e3 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(f0));
        while (resolvable && s > 1e-12 && t.value(x - s * step) > f0 - 1e-4 * s * slope) s *= 0.5;
        x -= s * step;
    }
    if (!converged) fail(Errc::MinimizerNotFound, "Newton iteration did not reach |grad| <= 1e-10");
    t.minimizer = x;
    validate_target(t);
    return t;
}

LogisticData load_logistic_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::IoError, "cannot open dataset '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
            } catch (const std::exception&) {
                fail(Errc::InvalidInput, path + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
            }
        }
        if (row.size() < 2) fail(Errc::InvalidInput, path + ":" + std::to_string(lineno) + ": need features and a label");
        if (!rows.empty() && row.size() != rows.front().size()) {
            fail(Errc::InvalidInput, path + ":" + std::to_string(lineno) + ": inconsistent column count");
        }
        if (row.back() != 1.0 && row.back() != -1.0) {
            fail(Errc::InvalidInput, path + ":" + std::to_string(lineno) + ": label must be -1 or +1");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) fail(Errc::InvalidInput, "dataset '" + path + "' is empty");
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto d = static_cast<Eigen::Index>(rows.front().size()) - 1;
    LogisticData data{Eigen::MatrixXd(n, d), Eigen::VectorXd(n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) data.features(i, j) = rows[i][j];
        data.labels(i) = rows[i][d];
    }
    return data;
}

GradCheck grad_check(const TargetModel& target, const Eigen::VectorXd& point) {
    require(point.size() == target.dim && point.allFinite(), "grad_check: bad point");
    const Eigen::VectorXd g = target.grad(point);
    const Eigen::MatrixXd H = target.hess(point).matrix();
    GradCheck out;
    for (Eigen::Index i = 0; i < target.dim; ++i) {
        const double h = 1e-5 * (1.0 + std::abs(point(i)));
        Eigen::VectorXd xp = point, xm = point;
        xp(i) += h;
        xm(i) -= h;
        const double fd = (target.value(xp) - target.value(xm)) / (2.0 * h);
        out.gradient = std::max(out.gradient, std::abs(g(i) - fd) / (1.0 + std::abs(g(i))));
        const Eigen::VectorXd col = (target.grad(xp) - target.grad(xm)) / (2.0 * h);
        for (Eigen::Index j = 0; j < target.dim; ++j) {
            out.hessian = std::max(out.hessian, std::abs(H(j, i) - col(j)) / (1.0 + std::abs(H(j, i))));
        }
    }
    return out;
}

InitSpec make_init(const TargetModel& target, const Eigen::VectorXd& x0, std::optional<double> D) {
    require(x0.size() == target.dim, "initial point dimension mismatch");
    require(x0.allFinite(), "initial point must be finite");
    const double dist = (x0 - target.minimizer).norm();
    if (!D) return {x0, dist};
    require(std::isfinite(*D) && *D >= 0.0, "D must be a nonnegative number");
    if (*D < dist * (1.0 - 1e-12)) {
        fail(Errc::InvalidInput, "D = " + std::to_string(*D) + " is below |x0 - x*| = " + std::to_string(dist));
    }
    return {x0, *D};
}

Eigen::MatrixXd draw_exact(const TargetModel& target, Eigen::Index count, Rng& rng) {
    if (!target.exact_law) fail(Errc::InvalidInput, "target '" + target.name + "' has no exact sampler");
    const auto& law = *target.exact_law;
    const Eigen::MatrixXd chol = cholesky_psd(law.cov);
    Eigen::MatrixXd out(count, target.dim);
    Eigen::VectorXd z(target.dim);
    for (Eigen::Index r = 0; r < count; ++r) {
        fill_standard_normal(z, rng);
        out.row(r) = (law.mean + chol * z).transpose();
    }
    return out;
}

AssumptionCheck spot_check_assumptions(const TargetModel& target, int pairs, double radius, Rng& rng) {
    AssumptionCheck c{-INFINITY, -INFINITY, -INFINITY};
    for (int k = 0; k < pairs; ++k) {
        const Eigen::VectorXd x = target.minimizer + radius * standard_normal(target.dim, rng);
        const Eigen::VectorXd y = target.minimizer + radius * standard_normal(target.dim, rng);
        const Eigen::VectorXd gx = target.grad(x);
        c.lipschitz = std::max(c.lipschitz, (gx - target.grad(y)).norm() - target.L * (x - y).norm());
        const double gap = target.value(y) - target.value(x) - gx.dot(y - x);
        c.convexity = std::max(c.convexity, 0.5 * target.m * (y - x).squaredNorm() - gap);
        c.hessian_norm = std::max(c.hessian_norm, spectral_norm(target.hess(x)) - target.L);
    }
    return c;
}

} // namespace uldmc
