#include <motkit/tracker.hpp>

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace motkit {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

Eigen::VectorXd ema_update(const Eigen::VectorXd& e_prev, const Eigen::VectorXd& f,
                           double alpha, bool* degenerate) {
    if (e_prev.size() != f.size()) {
        throw std::invalid_argument("ema_update: dimension mismatch");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument("ema_update: alpha must be in [0, 1]");
    }
    if (degenerate) *degenerate = false;
    Eigen::VectorXd v = alpha * e_prev + (1.0 - alpha) * f;
    const double norm = v.norm();
    if (norm == 0.0) {
        if (degenerate) *degenerate = true;
        return e_prev;
    }
    return v / norm;
}

Tracker::Tracker(TrackerConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.motion_only) cfg_.lambda = 0.0;
    if (!(cfg_.lambda >= 0.0 && cfg_.lambda <= 1.0)) {
        throw std::invalid_argument("tracker: lambda must be in [0, 1]");
    }
    if (!(cfg_.alpha_ema >= 0.0 && cfg_.alpha_ema <= 1.0)) {
        throw std::invalid_argument("tracker: alpha_ema must be in [0, 1]");
    }
    if (cfg_.confirm_frames < 1) {
        throw std::invalid_argument("tracker: confirm_frames must be >= 1");
    }
    if (cfg_.max_lost_frames < 0) {
        throw std::invalid_argument("tracker: max_lost_frames must be >= 0");
    }
    if (!(cfg_.gate > 0.0)) {
        throw std::invalid_argument("tracker: gate must be positive");
    }
}

std::vector<std::pair<int, Box>> Tracker::step(int frame_index,
                                               const std::vector<Detection>& detections) {
    return step_impl(frame_index, detections, nullptr);
}

std::vector<std::pair<int, Box>> Tracker::step_timed(int frame_index,
                                                     const std::vector<Detection>& detections,
                                                     StageTimes& times) {
    return step_impl(frame_index, detections, &times);
}

std::vector<std::pair<int, Box>> Tracker::step_impl(int frame_index,
                                                    const std::vector<Detection>& detections,
                                                    StageTimes* times) {
    if (!first_step_ && frame_index <= last_frame_) {
        throw std::logic_error("tracker: frame_index must be strictly increasing");
    }
    const bool use_appearance = cfg_.lambda > 0.0 && !cfg_.motion_only;

    // Ingest: confidence filter, embedding normalization.
    std::vector<Detection> dets;
    dets.reserve(detections.size());
    for (const auto& d : detections) {
        if (d.confidence < cfg_.min_confidence) continue;
        if (!d.box.valid()) {
            throw std::invalid_argument("tracker: detection box must have positive size");
        }
        Detection kept = d;
        if (use_appearance) {
            if (kept.embedding.size() == 0) {
                throw std::invalid_argument(
                    "tracker: appearance weight is nonzero but a detection has no embedding");
            }
            const double norm = kept.embedding.norm();
            if (norm == 0.0 || !std::isfinite(norm)) {
                throw std::invalid_argument("tracker: zero-norm detection embedding");
            }
            kept.embedding /= norm;
        }
        dets.push_back(std::move(kept));
    }

    // 1. predict the whole pool
    auto t0 = Clock::now();
    {
        std::vector<MotionState> states;
        states.reserve(pool_.size());
        for (const auto& t : pool_) states.push_back(t.motion);
        states = kf_predict_batch(states);
        for (std::size_t i = 0; i < pool_.size(); ++i) pool_[i].motion = states[i];
    }
    if (times) times->predict += seconds_since(t0);

    // 2. one fused-cost assignment over pool x detections
    t0 = Clock::now();
    Assignment assignment;
    const int n_tracks = static_cast<int>(pool_.size());
    const int n_dets = static_cast<int>(dets.size());
    if (n_tracks > 0 && n_dets > 0) {
        std::vector<Measurement> measurements;
        measurements.reserve(dets.size());
        for (const auto& d : dets) measurements.emplace_back(d.box);

        const Eigen::MatrixXd gating = gating_distance_batch(
            [&] {
                std::vector<MotionState> states;
                states.reserve(pool_.size());
                for (const auto& t : pool_) states.push_back(t.motion);
                return states;
            }(),
            measurements);
        const CostMatrix a_m = motion_cost(gating, cfg_.gate);

        CostMatrix fused;
        if (use_appearance) {
            std::vector<Eigen::VectorXd> track_embs, det_embs;
            track_embs.reserve(pool_.size());
            det_embs.reserve(dets.size());
            for (const auto& t : pool_) track_embs.push_back(t.appearance);
            for (const auto& d : dets) det_embs.push_back(d.embedding);
            fused = fuse_costs(appearance_cost(track_embs, det_embs), a_m, cfg_.lambda);
        } else {
            fused = a_m;
        }
        if (times) times->cost += seconds_since(t0);

        t0 = Clock::now();
        assignment = solve_assignment(fused, cfg_.max_cost);
        if (times) times->assign += seconds_since(t0);
    } else {
        for (int i = 0; i < n_tracks; ++i) assignment.unmatched_rows.push_back(i);
        for (int j = 0; j < n_dets; ++j) assignment.unmatched_cols.push_back(j);
        if (times) times->cost += seconds_since(t0);
    }

    // 3. matched tracklets: correct, refresh appearance, confirm
    t0 = Clock::now();
    for (const auto& [ti, dj] : assignment.matches) {
        Tracklet& t = pool_[static_cast<std::size_t>(ti)];
        const Detection& d = dets[static_cast<std::size_t>(dj)];
        t.motion = kf_update(t.motion, Measurement(d.box));
        if (use_appearance) {
            t.appearance = ema_update(t.appearance, d.embedding, cfg_.alpha_ema);
        }
        t.frames_since_update = 0;
        ++t.consecutive_hits;
        t.history.emplace_back(frame_index, t.box_from_mean());
        if (t.status == TrackStatus::Tentative) {
            if (t.consecutive_hits >= cfg_.confirm_frames) {
                t.status = TrackStatus::Active;
                // retroactive emission of the tentative-phase rows
                for (const auto& [f, box] : t.history) {
                    emitted_.rows.push_back({f, t.id, box});
                }
            }
        } else {
            t.status = TrackStatus::Active;  // re-activates Lost
            emitted_.rows.push_back({frame_index, t.id, t.history.back().second});
        }
    }

    // 4. unmatched tracklets: tentative die, active coast as lost
    for (const int ti : assignment.unmatched_rows) {
        Tracklet& t = pool_[static_cast<std::size_t>(ti)];
        t.consecutive_hits = 0;
        ++t.frames_since_update;
        if (t.status == TrackStatus::Tentative) {
            t.status = TrackStatus::Removed;
        } else {
            t.status = TrackStatus::Lost;
            if (t.frames_since_update > cfg_.max_lost_frames) {
                t.status = TrackStatus::Removed;
            }
        }
    }

    // 5. unmatched detections spawn tentative tracklets, in detection order
    for (const int dj : assignment.unmatched_cols) {
        const Detection& d = dets[static_cast<std::size_t>(dj)];
        Tracklet t;
        t.id = next_id_++;
        t.motion = kf_initiate(Measurement(d.box));
        if (use_appearance) t.appearance = d.embedding;
        t.status = TrackStatus::Tentative;
        t.frames_since_update = 0;
        t.consecutive_hits = 1;
        t.history.emplace_back(frame_index, t.box_from_mean());
        if (cfg_.confirm_frames <= 1) {
            t.status = TrackStatus::Active;
            emitted_.rows.push_back({frame_index, t.id, t.history.back().second});
        }
        pool_.push_back(std::move(t));
    }
    // 6. duplicate suppression: a lost tracklet sitting on top of an active
    // one is the same target twice; drop the lost copy so the two cannot
    // keep trading the detection
    if (cfg_.duplicate_iou <= 1.0) {
        for (const auto& a : pool_) {
            if (a.status != TrackStatus::Active) continue;
            const Box abox = a.box_from_mean();
            if (!abox.valid()) continue;
            for (auto& l : pool_) {
                if (l.status != TrackStatus::Lost) continue;
                const Box lbox = l.box_from_mean();
                if (!lbox.valid()) continue;  // coasted into degeneracy
                if (iou(abox, lbox) > cfg_.duplicate_iou) {
                    l.status = TrackStatus::Removed;
                }
            }
        }
    }
    if (times) times->update += seconds_since(t0);

    std::vector<std::pair<int, Box>> out;
    for (const auto& t : pool_) {
        if (t.status == TrackStatus::Active) out.emplace_back(t.id, t.box_from_mean());
    }
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    std::erase_if(pool_, [](const Tracklet& t) { return t.status == TrackStatus::Removed; });

    last_frame_ = frame_index;
    first_step_ = false;
    return out;
}

SequenceResult run_tracker(const TrackerConfig& cfg,
                           const std::vector<std::vector<Detection>>& frames) {
    Tracker tracker(cfg);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        tracker.step(static_cast<int>(i) + 1, frames[i]);
    }
    SequenceResult result = tracker.emitted();
    std::stable_sort(result.rows.begin(), result.rows.end(),
                     [](const TrackRow& a, const TrackRow& b) { return a.frame < b.frame; });
    return result;
}

}  // namespace motkit
