#pragma once

#include <vector>

#include <motkit/geometry.hpp>
#include <motkit/sequence.hpp>

namespace motkit {

// CLEAR-MOT tallies plus IDF-1. The MOTA identity
// MOTA = 1 - (FN + FP + IDs) / GT holds exactly on every report.
struct MotReport {
    double mota = 1.0;
    double idf1 = 1.0;
    int mostly_tracked = 0;
    int mostly_lost = 0;
    int id_switches = 0;
    int false_positives = 0;
    int false_negatives = 0;
    int fragmentations = 0;
    int gt_boxes = 0;
    int gt_trajectories = 0;
};

// CLEAR evaluation with match persistence: matches carried over from the
// previous frame while still at or above the IOU threshold, remaining pairs
// re-assigned at minimum 1-IOU cost. Fills every MotReport field except
// idf1. Throws FormatError on duplicate (frame, id) rows.
MotReport evaluate_clear(const SequenceResult& gt, const SequenceResult& hyp,
                         double iou_threshold = 0.5);

// Global identity measure: one-to-one matching between gt and hypothesis
// identities maximizing identity-true-positive box count, then
// IDF1 = 2 IDTP / (2 IDTP + IDFP + IDFN).
double evaluate_idf1(const SequenceResult& gt, const SequenceResult& hyp,
                     double iou_threshold = 0.5);

// evaluate_clear plus the idf1 field.
MotReport evaluate_mot(const SequenceResult& gt, const SequenceResult& hyp,
                       double iou_threshold = 0.5);

// True-positive rate at a false-accept rate: the accept threshold is the
// lowest score that keeps the impostor fraction at or above it within far,
// and the returned value is the fraction of genuine scores strictly above
// that threshold. Throws std::invalid_argument on empty inputs or far
// outside (0, 1).
double tpr_at_far(const std::vector<double>& genuine_scores,
                  const std::vector<double>& impostor_scores, double far);

// Detector average precision: greedy score-descending matching against
// ground truth at the IOU threshold, area under the interpolated
// precision-recall curve.
double average_precision(const std::vector<std::pair<Box, double>>& scored_boxes,
                         const std::vector<Box>& gts, double iou_threshold = 0.5);

}  // namespace motkit
