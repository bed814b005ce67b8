#pragma once

#include <Eigen/Dense>
#include <limits>
#include <utility>
#include <vector>

namespace motkit {

// Dense rectangular cost matrix, tracklets as rows and detections as
// columns. Feasible entries are finite and non-negative; kInfeasible marks
// pairs the solver must never match.
struct CostMatrix {
    static constexpr double kInfeasible = std::numeric_limits<double>::infinity();

    Eigen::MatrixXd values;

    CostMatrix() = default;
    CostMatrix(Eigen::Index rows, Eigen::Index cols, double fill = 0.0)
        : values(Eigen::MatrixXd::Constant(rows, cols, fill)) {}
    explicit CostMatrix(Eigen::MatrixXd v) : values(std::move(v)) {}

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
    double operator()(Eigen::Index i, Eigen::Index j) const { return values(i, j); }
    double& operator()(Eigen::Index i, Eigen::Index j) { return values(i, j); }
    bool feasible(Eigen::Index i, Eigen::Index j) const {
        return std::isfinite(values(i, j));
    }
};

struct Assignment {
    std::vector<std::pair<int, int>> matches;  // (row, col), sorted by row
    std::vector<int> unmatched_rows;
    std::vector<int> unmatched_cols;
};

// Sum of matched entries.
double assignment_cost(const CostMatrix& c, const Assignment& a);

// Cosine-distance matrix 1 - cos(e_i, f_j) in [0, 2]. Rows run under OpenMP
// after packing both sides into unit-row matrices. Throws
// std::invalid_argument on a zero-norm vector or mismatched dimensions.
CostMatrix appearance_cost(const std::vector<Eigen::VectorXd>& track_embs,
                           const std::vector<Eigen::VectorXd>& det_embs);

// Per-pair serial reference for appearance_cost.
CostMatrix appearance_cost_serial(const std::vector<Eigen::VectorXd>& track_embs,
                                  const std::vector<Eigen::VectorXd>& det_embs);

// Gate-normalized motion cost: d2/gate for d2 <= gate, kInfeasible beyond.
CostMatrix motion_cost(const Eigen::MatrixXd& gating, double gate);

// C = lambda * a_e + (1 - lambda) * a_m; infeasible entries propagate.
CostMatrix fuse_costs(const CostMatrix& a_e, const CostMatrix& a_m, double lambda);

// Minimum-cost assignment among maximum-cardinality matchings over the
// feasible pairs. Entries above max_cost count as infeasible. Rectangular
// and empty inputs are handled by an infeasibility-aware square augmentation
// solved with a shortest-augmenting-path Hungarian pass; output is
// deterministic for a fixed input.
Assignment solve_assignment(const CostMatrix& c,
                            double max_cost = std::numeric_limits<double>::infinity());

}  // namespace motkit
