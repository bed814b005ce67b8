#include <motkit/association.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace motkit {

namespace {

Eigen::MatrixXd pack_unit_rows(const std::vector<Eigen::VectorXd>& embs,
                               Eigen::Index dim, const char* what) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(embs.size()), dim);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (embs[i].size() != dim) {
            throw std::invalid_argument(std::string(what) + ": embedding dimension mismatch");
        }
        const double norm = embs[i].norm();
        if (norm == 0.0 || !std::isfinite(norm)) {
            throw std::invalid_argument(std::string(what) + ": zero-norm embedding");
        }
        m.row(i) = embs[i].transpose() / norm;
    }
    return m;
}

// Square-matrix Hungarian (potentials + shortest augmenting path, O(n^3)).
// Finite costs only; returns row -> col.
std::vector<int> hungarian_square(const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(cost.rows());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);

    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }

    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j) {
        if (p[j]) row_to_col[p[j] - 1] = j - 1;
    }
    return row_to_col;
}

}  // namespace

double assignment_cost(const CostMatrix& c, const Assignment& a) {
    double total = 0.0;
    for (const auto& [i, j] : a.matches) total += c(i, j);
    return total;
}

CostMatrix appearance_cost(const std::vector<Eigen::VectorXd>& track_embs,
                           const std::vector<Eigen::VectorXd>& det_embs) {
    const int rows = static_cast<int>(track_embs.size());
    const int cols = static_cast<int>(det_embs.size());
    CostMatrix out(rows, cols);
    if (rows == 0 || cols == 0) {
        if (rows > 0) pack_unit_rows(track_embs, track_embs[0].size(), "appearance_cost");
        if (cols > 0) pack_unit_rows(det_embs, det_embs[0].size(), "appearance_cost");
        return out;
    }

    const Eigen::Index dim = track_embs[0].size();
    const Eigen::MatrixXd t = pack_unit_rows(track_embs, dim, "appearance_cost");
    const Eigen::MatrixXd d = pack_unit_rows(det_embs, dim, "appearance_cost");

#pragma omp parallel for schedule(static)
    for (int i = 0; i < rows; ++i) {
        out.values.row(i) = 1.0 - (d * t.row(i).transpose()).transpose().array();
    }
    return out;
}

CostMatrix appearance_cost_serial(const std::vector<Eigen::VectorXd>& track_embs,
                                  const std::vector<Eigen::VectorXd>& det_embs) {
    const Eigen::Index dim =
        !track_embs.empty() ? track_embs[0].size()
                            : (!det_embs.empty() ? det_embs[0].size() : 0);
    CostMatrix out(static_cast<Eigen::Index>(track_embs.size()),
                   static_cast<Eigen::Index>(det_embs.size()));
    for (std::size_t i = 0; i < track_embs.size(); ++i) {
        if (track_embs[i].size() != dim) {
            throw std::invalid_argument("appearance_cost: embedding dimension mismatch");
        }
        const double ni = track_embs[i].norm();
        if (ni == 0.0) throw std::invalid_argument("appearance_cost: zero-norm embedding");
        for (std::size_t j = 0; j < det_embs.size(); ++j) {
            if (det_embs[j].size() != dim) {
                throw std::invalid_argument("appearance_cost: embedding dimension mismatch");
            }
            const double nj = det_embs[j].norm();
            if (nj == 0.0) throw std::invalid_argument("appearance_cost: zero-norm embedding");
            out(static_cast<int>(i), static_cast<int>(j)) =
                1.0 - track_embs[i].dot(det_embs[j]) / (ni * nj);
        }
    }
    return out;
}

CostMatrix motion_cost(const Eigen::MatrixXd& gating, double gate) {
    if (!(gate > 0.0)) throw std::invalid_argument("motion_cost: gate must be positive");
    CostMatrix out(gating.rows(), gating.cols());
    for (Eigen::Index i = 0; i < gating.rows(); ++i) {
        for (Eigen::Index j = 0; j < gating.cols(); ++j) {
            const double d2 = gating(i, j);
            out(i, j) = d2 > gate ? CostMatrix::kInfeasible
                                  : std::min(d2 / gate, 1.0);
        }
    }
    return out;
}

CostMatrix fuse_costs(const CostMatrix& a_e, const CostMatrix& a_m, double lambda) {
    if (a_e.rows() != a_m.rows() || a_e.cols() != a_m.cols()) {
        throw std::invalid_argument("fuse_costs: shape mismatch");
    }
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw std::invalid_argument("fuse_costs: lambda must be in [0, 1]");
    }
    CostMatrix out(a_e.rows(), a_e.cols());
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        for (Eigen::Index j = 0; j < out.cols(); ++j) {
            if (!a_e.feasible(i, j) || !a_m.feasible(i, j)) {
                out(i, j) = CostMatrix::kInfeasible;
            } else {
                out(i, j) = lambda * a_e(i, j) + (1.0 - lambda) * a_m(i, j);
            }
        }
    }
    return out;
}

Assignment solve_assignment(const CostMatrix& c, double max_cost) {
    const int rows = static_cast<int>(c.rows());
    const int cols = static_cast<int>(c.cols());
    Assignment out;

    auto pair_feasible = [&](int i, int j) {
        const double v = c(i, j);
        return std::isfinite(v) && v <= max_cost;
    };

    bool any_feasible = false;
    double max_abs = 0.0;
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            if (pair_feasible(i, j)) {
                any_feasible = true;
                max_abs = std::max(max_abs, std::abs(c(i, j)));
            }
        }
    }
    if (!any_feasible) {
        for (int i = 0; i < rows; ++i) out.unmatched_rows.push_back(i);
        for (int j = 0; j < cols; ++j) out.unmatched_cols.push_back(j);
        return out;
    }

    // Square augmentation: real pairs top-left, one private dummy column per
    // row and dummy row per column priced so that dropping a feasible match
    // is never cheaper than keeping it, and a zero block so dummies always
    // pair off. Minimizing the augmented sum maximizes real-match cardinality
    // first, then real cost.
    const int n = rows + cols;
    const double big = (max_abs + 1.0) * (std::min(rows, cols) + 1);
    const double forbid = 4.0 * big;
    Eigen::MatrixXd aug = Eigen::MatrixXd::Constant(n, n, forbid);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            if (pair_feasible(i, j)) aug(i, j) = c(i, j);
        }
        aug(i, cols + i) = big;
    }
    for (int j = 0; j < cols; ++j) aug(rows + j, j) = big;
    aug.block(rows, cols, cols, rows).setZero();

    const std::vector<int> row_to_col = hungarian_square(aug);

    std::vector<char> col_matched(cols, 0);
    for (int i = 0; i < rows; ++i) {
        const int j = row_to_col[i];
        if (j >= 0 && j < cols && pair_feasible(i, j)) {
            out.matches.emplace_back(i, j);
            col_matched[j] = 1;
        } else {
            out.unmatched_rows.push_back(i);
        }
    }
    for (int j = 0; j < cols; ++j) {
        if (!col_matched[j]) out.unmatched_cols.push_back(j);
    }
    return out;
}

}  // namespace motkit
