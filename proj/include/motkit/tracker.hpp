#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include <motkit/association.hpp>
#include <motkit/geometry.hpp>
#include <motkit/kalman.hpp>
#include <motkit/sequence.hpp>

namespace motkit {

// One observed target in a frame. The embedding may be empty when running
// motion-only; otherwise it is renormalized to unit length on ingestion.
struct Detection {
    Box box;
    double confidence = 1.0;
    Eigen::VectorXd embedding;
};

enum class TrackStatus { Tentative, Active, Lost, Removed };

struct Tracklet {
    int id = 0;
    MotionState motion;
    Eigen::VectorXd appearance;  // unit norm; frozen while Lost
    TrackStatus status = TrackStatus::Tentative;
    int frames_since_update = 0;
    int consecutive_hits = 0;
    std::vector<std::pair<int, Box>> history;  // (frame, box) when matched

    Box box_from_mean() const {
        const double h = motion.mean[3];
        const double w = motion.mean[2] * h;
        return Box::from_center(motion.mean[0], motion.mean[1], w, h);
    }
};

struct TrackerConfig {
    double lambda = 0.9;          // appearance weight in the fused cost
    double alpha_ema = 0.9;       // appearance momentum
    int confirm_frames = 2;       // consecutive hits to confirm
    int max_lost_frames = 30;     // misses before termination
    double gate = kChi2Gate95_4dof;
    double max_cost = 0.7;
    double min_confidence = 0.5;
    bool motion_only = false;     // forces lambda = 0, ignores embeddings
    // A lost tracklet overlapping an active one above this IOU is the same
    // target twice; the lost copy is dropped. > 1 disables.
    double duplicate_iou = 0.85;
};

// Momentum update alpha * e_prev + (1 - alpha) * f, renormalized to unit
// length. On exact cancellation returns e_prev and sets *degenerate.
Eigen::VectorXd ema_update(const Eigen::VectorXd& e_prev, const Eigen::VectorXd& f,
                           double alpha, bool* degenerate = nullptr);

// Wall time spent per association stage, seconds; filled by step_timed.
struct StageTimes {
    double predict = 0.0;
    double cost = 0.0;
    double assign = 0.0;
    double update = 0.0;

    double total() const { return predict + cost + assign + update; }
    StageTimes& operator+=(const StageTimes& o) {
        predict += o.predict;
        cost += o.cost;
        assign += o.assign;
        update += o.update;
        return *this;
    }
};

// Online tracklet lifecycle engine. One association pass per frame over the
// whole pool (tentative, active and recently lost tracklets compete in the
// same assignment). A single instance is a mutable state machine; run one
// instance per sequence.
//
// Sequence output: a tracklet contributes rows only once confirmed; at the
// confirming frame its buffered tentative history is emitted retroactively,
// so a target present from frame 1 is covered from frame 1 while a
// one-frame detection never appears.
class Tracker {
public:
    explicit Tracker(TrackerConfig cfg);

    // Advances one frame and returns (id, box) for tracklets active at the
    // end of the step, ascending id. frame_index must be strictly
    // increasing; violations throw std::logic_error.
    std::vector<std::pair<int, Box>> step(int frame_index,
                                          const std::vector<Detection>& detections);

    std::vector<std::pair<int, Box>> step_timed(int frame_index,
                                                const std::vector<Detection>& detections,
                                                StageTimes& times);

    const std::vector<Tracklet>& pool() const { return pool_; }
    const TrackerConfig& config() const { return cfg_; }

    // All rows emitted so far (confirmed tracklets only, including their
    // retroactive tentative-phase rows).
    const SequenceResult& emitted() const { return emitted_; }

private:
    std::vector<std::pair<int, Box>> step_impl(int frame_index,
                                               const std::vector<Detection>& detections,
                                               StageTimes* times);

    TrackerConfig cfg_;
    std::vector<Tracklet> pool_;
    SequenceResult emitted_;
    int next_id_ = 1;
    int last_frame_ = 0;
    bool first_step_ = true;
};

// Batch driver: frames[i] holds the detections of frame i+1. Returns the
// concatenated per-frame outputs as MOT-style rows.
SequenceResult run_tracker(const TrackerConfig& cfg,
                           const std::vector<std::vector<Detection>>& frames);

}  // namespace motkit
