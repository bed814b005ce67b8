#include <motkit/simulate.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <motkit/rng.hpp>

namespace motkit {

namespace {

// Sub-stream tags; see rng.hpp for the derivation.
enum Stream : std::uint64_t {
    kStreamTargets = 0,
    kStreamIdentityEmbeddings = 1,
    kStreamMisses = 2,
    kStreamJitter = 3,
    kStreamFalsePositives = 4,
    kStreamFpEmbeddings = 5,
    kStreamConfidence = 6,
    kStreamDetEmbeddings = 7,
};

Eigen::VectorXd random_unit_vector(Rng& rng, int dim) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = rng.normal();
    const double norm = v.norm();
    if (norm == 0.0) {
        v.setZero();
        v[0] = 1.0;
        return v;
    }
    return v / norm;
}

Eigen::VectorXd perturbed_embedding(const Eigen::VectorXd& mean, double noise_std,
                                    Rng& rng) {
    if (noise_std <= 0.0) return mean;
    Eigen::VectorXd v = mean;
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] += noise_std * rng.normal();
    const double norm = v.norm();
    return norm == 0.0 ? mean : Eigen::VectorXd(v / norm);
}

// Reflect p into [lo, hi], flipping the velocity sign when a wall is hit.
void reflect(double& p, double& v, double lo, double hi) {
    if (hi <= lo) {
        p = lo;
        return;
    }
    while (p < lo || p > hi) {
        if (p < lo) {
            p = 2.0 * lo - p;
            v = -v;
        } else {
            p = 2.0 * hi - p;
            v = -v;
        }
    }
}

// Center and height jitter; width follows the target's aspect ratio, which
// per-frame detector noise barely moves.
Box jittered_box(const Box& b, double std, Rng& rng) {
    const double dcx = std * rng.normal();
    const double dcy = std * rng.normal();
    const double dh = std * rng.normal();
    const double h = std::max(2.0, b.h + dh);
    const double w = (b.w / b.h) * h;
    return Box::from_center(b.cx() + dcx, b.cy() + dcy, w, h);
}

struct MovingTarget {
    double cx, cy, vx, vy, w, h;
};

}  // namespace

Scenario generate_scenario(const ScenarioConfig& cfg) {
    if (cfg.n_frames < 0 || cfg.n_targets < 0) {
        throw std::invalid_argument("generate_scenario: counts must be non-negative");
    }
    if (cfg.p_miss < 0.0 || cfg.p_miss >= 1.0) {
        throw std::invalid_argument("generate_scenario: p_miss must lie in [0, 1)");
    }
    if (cfg.fp_rate < 0.0 || cfg.box_jitter_std < 0.0 || cfg.embed_noise_std < 0.0) {
        throw std::invalid_argument("generate_scenario: rates must be non-negative");
    }
    if (cfg.embed_dim < 1) {
        throw std::invalid_argument("generate_scenario: embed_dim must be >= 1");
    }

    Rng targets_rng = Rng::substream(cfg.seed, kStreamTargets);
    Rng identity_rng = Rng::substream(cfg.seed, kStreamIdentityEmbeddings);
    Rng miss_rng = Rng::substream(cfg.seed, kStreamMisses);
    Rng jitter_rng = Rng::substream(cfg.seed, kStreamJitter);
    Rng fp_rng = Rng::substream(cfg.seed, kStreamFalsePositives);
    Rng fp_emb_rng = Rng::substream(cfg.seed, kStreamFpEmbeddings);
    Rng conf_rng = Rng::substream(cfg.seed, kStreamConfidence);
    Rng det_emb_rng = Rng::substream(cfg.seed, kStreamDetEmbeddings);

    std::vector<MovingTarget> targets(static_cast<std::size_t>(cfg.n_targets));
    for (auto& t : targets) {
        t.w = targets_rng.uniform(18.0, 36.0);
        t.h = 3.0 * t.w;
        t.cx = targets_rng.uniform(t.w / 2.0, std::max(t.w / 2.0, cfg.arena_w - t.w / 2.0));
        t.cy = targets_rng.uniform(t.h / 2.0, std::max(t.h / 2.0, cfg.arena_h - t.h / 2.0));
        const double speed = targets_rng.uniform(cfg.speed_min, cfg.speed_max);
        const double angle = targets_rng.uniform(0.0, 6.283185307179586476925287);
        t.vx = speed * std::cos(angle);
        t.vy = speed * std::sin(angle);
    }

    std::vector<Eigen::VectorXd> identity_means;
    identity_means.reserve(static_cast<std::size_t>(cfg.n_targets));
    for (int i = 0; i < cfg.n_targets; ++i) {
        identity_means.push_back(random_unit_vector(identity_rng, cfg.embed_dim));
    }
    const Eigen::VectorXd background_mean = random_unit_vector(identity_rng, cfg.embed_dim);

    Scenario out;
    out.frames.resize(static_cast<std::size_t>(cfg.n_frames));
    for (int f = 1; f <= cfg.n_frames; ++f) {
        auto& dets = out.frames[static_cast<std::size_t>(f - 1)];
        for (std::size_t ti = 0; ti < targets.size(); ++ti) {
            auto& t = targets[ti];
            if (f > 1) {
                t.cx += t.vx;
                t.cy += t.vy;
                reflect(t.cx, t.vx, t.w / 2.0, std::max(t.w / 2.0, cfg.arena_w - t.w / 2.0));
                reflect(t.cy, t.vy, t.h / 2.0, std::max(t.h / 2.0, cfg.arena_h - t.h / 2.0));
            }
            const Box gt_box = Box::from_center(t.cx, t.cy, t.w, t.h);
            out.gt.rows.push_back({f, static_cast<int>(ti) + 1, gt_box});

            if (miss_rng.bernoulli(cfg.p_miss)) continue;
            Detection d;
            d.box = cfg.box_jitter_std > 0.0 ? jittered_box(gt_box, cfg.box_jitter_std, jitter_rng)
                                             : gt_box;
            d.confidence = conf_rng.uniform(0.8, 1.0);
            d.embedding = perturbed_embedding(identity_means[ti], cfg.embed_noise_std,
                                              det_emb_rng);
            dets.push_back(std::move(d));
        }

        const int n_fp = fp_rng.poisson(cfg.fp_rate);
        for (int k = 0; k < n_fp; ++k) {
            const double w = fp_rng.uniform(18.0, 36.0);
            const double h = 3.0 * w;
            Detection d;
            d.box = Box::from_center(
                fp_rng.uniform(w / 2.0, std::max(w / 2.0, cfg.arena_w - w / 2.0)),
                fp_rng.uniform(h / 2.0, std::max(h / 2.0, cfg.arena_h - h / 2.0)), w, h);
            d.confidence = conf_rng.uniform(0.55, 0.9);
            d.embedding = perturbed_embedding(
                background_mean, std::max(cfg.embed_noise_std, 0.05), fp_emb_rng);
            dets.push_back(std::move(d));
        }
    }
    return out;
}

Scenario crossing_scenario(const CrossingConfig& cfg) {
    if (cfg.n_frames < 4) {
        throw std::invalid_argument("crossing_scenario: need at least 4 frames");
    }
    Rng identity_rng = Rng::substream(cfg.seed, kStreamIdentityEmbeddings);
    Rng jitter_rng = Rng::substream(cfg.seed, kStreamJitter);
    Rng det_emb_rng = Rng::substream(cfg.seed, kStreamDetEmbeddings);

    const double w = 40.0, h = 120.0;
    const double cy = 360.0;
    const int t_meet = cfg.n_frames / 2;
    // Walk the meeting point backwards so the pair is meet_gap apart at
    // t_meet and separates afterwards along reversed velocities.
    const double meet_a = 640.0 - cfg.meet_gap / 2.0;
    const double meet_b = 640.0 + cfg.meet_gap / 2.0;

    std::vector<Eigen::VectorXd> identity_means = {
        random_unit_vector(identity_rng, cfg.embed_dim),
        random_unit_vector(identity_rng, cfg.embed_dim)};

    Scenario out;
    out.frames.resize(static_cast<std::size_t>(cfg.n_frames));
    for (int f = 1; f <= cfg.n_frames; ++f) {
        const double steps_from_meet = std::abs(static_cast<double>(f - t_meet));
        const double ax = meet_a - cfg.speed * steps_from_meet;
        const double bx = meet_b + cfg.speed * steps_from_meet;
        const Box boxes[2] = {Box::from_center(ax, cy, w, h),
                              Box::from_center(bx, cy, w, h)};
        for (int ti = 0; ti < 2; ++ti) {
            out.gt.rows.push_back({f, ti + 1, boxes[ti]});
            Detection d;
            d.box = cfg.box_jitter_std > 0.0
                        ? jittered_box(boxes[ti], cfg.box_jitter_std, jitter_rng)
                        : boxes[ti];
            d.confidence = 1.0;
            d.embedding = perturbed_embedding(identity_means[static_cast<std::size_t>(ti)],
                                              cfg.embed_noise_std, det_emb_rng);
            out.frames[static_cast<std::size_t>(f - 1)].push_back(std::move(d));
        }
    }
    return out;
}

namespace {

struct BruteState {
    const CostMatrix* c;
    bool transposed;
    int rows, cols;
    std::vector<int> row_to_col;
    std::vector<char> col_used;
    int best_k = -1;
    double best_cost = 0.0;
    std::vector<std::pair<int, int>> best_matches;

    bool feasible(int i, int j) const {
        return transposed ? std::isfinite((*c)(j, i)) : std::isfinite((*c)(i, j));
    }
    double cost(int i, int j) const { return transposed ? (*c)(j, i) : (*c)(i, j); }

    void consider_leaf(double cur_cost, int cur_k) {
        // maximality: no feasible pair may remain between unused rows/cols
        for (int i = 0; i < rows; ++i) {
            if (row_to_col[static_cast<std::size_t>(i)] >= 0) continue;
            for (int j = 0; j < cols; ++j) {
                if (!col_used[static_cast<std::size_t>(j)] && feasible(i, j)) return;
            }
        }
        std::vector<std::pair<int, int>> matches;
        for (int i = 0; i < rows; ++i) {
            const int j = row_to_col[static_cast<std::size_t>(i)];
            if (j >= 0) matches.emplace_back(transposed ? j : i, transposed ? i : j);
        }
        std::sort(matches.begin(), matches.end());
        if (cur_k > best_k || (cur_k == best_k && cur_cost < best_cost) ||
            (cur_k == best_k && cur_cost == best_cost && matches < best_matches)) {
            best_k = cur_k;
            best_cost = cur_cost;
            best_matches = std::move(matches);
        }
    }

    void recurse(int row, double cur_cost, int cur_k) {
        if (best_k >= 0) {
            const int max_k = cur_k + (rows - row);
            if (max_k < best_k) return;
            if (max_k == best_k && cur_cost > best_cost) return;
        }
        if (row == rows) {
            consider_leaf(cur_cost, cur_k);
            return;
        }
        for (int j = 0; j < cols; ++j) {
            if (col_used[static_cast<std::size_t>(j)] || !feasible(row, j)) continue;
            col_used[static_cast<std::size_t>(j)] = 1;
            row_to_col[static_cast<std::size_t>(row)] = j;
            recurse(row + 1, cur_cost + cost(row, j), cur_k + 1);
            row_to_col[static_cast<std::size_t>(row)] = -1;
            col_used[static_cast<std::size_t>(j)] = 0;
        }
        recurse(row + 1, cur_cost, cur_k);  // leave this row unmatched
    }
};

}  // namespace

Assignment brute_force_assignment(const CostMatrix& c) {
    const int rows = static_cast<int>(c.rows());
    const int cols = static_cast<int>(c.cols());
    if (std::min(rows, cols) > 8) {
        throw std::logic_error("brute_force_assignment: min(rows, cols) must be <= 8");
    }

    BruteState st;
    st.c = &c;
    st.transposed = rows > cols;
    st.rows = st.transposed ? cols : rows;
    st.cols = st.transposed ? rows : cols;
    st.row_to_col.assign(static_cast<std::size_t>(st.rows), -1);
    st.col_used.assign(static_cast<std::size_t>(st.cols), 0);
    st.recurse(0, 0.0, 0);

    Assignment out;
    std::vector<char> row_matched(static_cast<std::size_t>(rows), 0);
    std::vector<char> col_matched(static_cast<std::size_t>(cols), 0);
    out.matches = st.best_matches;
    for (const auto& [i, j] : out.matches) {
        row_matched[static_cast<std::size_t>(i)] = 1;
        col_matched[static_cast<std::size_t>(j)] = 1;
    }
    for (int i = 0; i < rows; ++i) {
        if (!row_matched[static_cast<std::size_t>(i)]) out.unmatched_rows.push_back(i);
    }
    for (int j = 0; j < cols; ++j) {
        if (!col_matched[static_cast<std::size_t>(j)]) out.unmatched_cols.push_back(j);
    }
    return out;
}

}  // namespace motkit
