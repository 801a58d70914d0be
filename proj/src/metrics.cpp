#include "uldmc/metrics.hpp"

#include <cmath>
#include <limits>

namespace uldmc {

namespace {

void require_psd(const SymMatrixd& cov, const char* which) {
    if (cov.dim() == 0) return;
    const auto pair = sym_eig(cov);
    const double scale = 1.0 + std::max(std::abs(pair.min_value()), std::abs(pair.max_value()));
    if (pair.min_value() < -1e-10 * scale) {
        fail(Errc::InvalidInput, std::string("gaussian_w2: covariance ") + which + " is indefinite");
    }
}

} // namespace

SampleCloud::SampleCloud(Eigen::MatrixXd pts) : points(std::move(pts)) {
    require(points.rows() > 0, "sample cloud must be nonempty");
    require(points.allFinite(), "sample cloud has non-finite entries");
}

double gaussian_w2(const GaussianSummary& a, const GaussianSummary& b) {
    require(a.dim() == b.dim() && a.cov.dim() == a.dim() && b.cov.dim() == b.dim(),
            "gaussian_w2: dimension mismatch");
    require_psd(a.cov, "a");
    require_psd(b.cov, "b");
    const SymMatrixd root_b = psd_sqrt(b.cov);
    const SymMatrixd inner(Eigen::MatrixXd(root_b.matrix() * a.cov.matrix() * root_b.matrix()));
    const double cross = psd_sqrt(inner).matrix().trace();
    const double sq = (a.mean - b.mean).squaredNorm() + a.cov.matrix().trace() + b.cov.matrix().trace() - 2.0 * cross;
    return std::sqrt(std::max(sq, 0.0));
}

std::vector<Eigen::Index> min_cost_assignment(const Eigen::MatrixXd& cost) {
    // Shortest augmenting paths with dual potentials (Hungarian method), O(n^3).
    require(cost.rows() == cost.cols(), "assignment needs a square cost matrix");
    const Eigen::Index n = cost.rows();
    constexpr double inf = std::numeric_limits<double>::infinity();
    // 1-based; index 0 is a virtual column.
    std::vector<double> row_pot(n + 1, 0.0), col_pot(n + 1, 0.0);
    std::vector<Eigen::Index> match(n + 1, 0), way(n + 1, 0);
    for (Eigen::Index i = 1; i <= n; ++i) {
        match[0] = i;
        Eigen::Index j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const Eigen::Index i0 = match[j0];
            double delta = inf;
            Eigen::Index j1 = 0;
            for (Eigen::Index j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - row_pot[i0] - col_pot[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (Eigen::Index j = 0; j <= n; ++j) {
                if (used[j]) {
                    row_pot[match[j]] += delta;
                    col_pot[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const Eigen::Index j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<Eigen::Index> assignment(n);
    for (Eigen::Index j = 1; j <= n; ++j) assignment[match[j] - 1] = j - 1;
    return assignment;
}

double empirical_w2(const SampleCloud& a, const SampleCloud& b) {
    if (a.count() != b.count()) {
        fail(Errc::InvalidInput, "empirical_w2: clouds have " + std::to_string(a.count()) + " and " +
                                     std::to_string(b.count()) + " points");
    }
    require(a.dim() == b.dim(), "empirical_w2: dimension mismatch");
    require(a.count() <= kMaxCloudSize, "empirical_w2: cloud exceeds 4096 points");
    const Eigen::Index n = a.count();
    Eigen::MatrixXd cost(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) cost(i, j) = (a.points.row(i) - b.points.row(j)).squaredNorm();
    }
    const auto match = min_cost_assignment(cost);
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) total += cost(i, match[std::size_t(i)]);
    return std::sqrt(total / static_cast<double>(n));
}

GaussianSummary moment_summary(const SampleCloud& cloud) {
    require(cloud.count() >= 2, "moment_summary: need at least two points");
    const Eigen::VectorXd mean = cloud.points.colwise().mean().transpose();
    const Eigen::MatrixXd centered = cloud.points.rowwise() - mean.transpose();
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(cloud.count() - 1);
    return {mean, SymMatrixd(cov)};
}

Eigen::MatrixXd even_subsample(const Eigen::MatrixXd& points, Eigen::Index max_count) {
    const Eigen::Index n = points.rows();
    if (n <= max_count) return points;
    Eigen::MatrixXd out(max_count, points.cols());
    for (Eigen::Index k = 0; k < max_count; ++k) out.row(k) = points.row(k * n / max_count);
    return out;
}

} // namespace uldmc
