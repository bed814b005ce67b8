#include <motkit/metrics.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

#include <motkit/association.hpp>

namespace motkit {

namespace {

struct FrameItems {
    std::vector<int> ids;
    std::vector<Box> boxes;
};

std::map<int, FrameItems> group_frames(const SequenceResult& seq) {
    seq.validate();
    std::map<int, FrameItems> out;
    for (const auto& row : seq.rows) {
        auto& f = out[row.frame];
        f.ids.push_back(row.id);
        f.boxes.push_back(row.box);
    }
    return out;
}

}  // namespace

void SequenceResult::validate() const {
    std::set<std::pair<int, int>> seen;
    for (const auto& row : rows) {
        if (row.frame < 0) {
            throw FormatError("sequence: negative frame index " + std::to_string(row.frame));
        }
        if (!seen.insert({row.frame, row.id}).second) {
            throw FormatError("sequence: duplicate (frame, id) = (" +
                              std::to_string(row.frame) + ", " + std::to_string(row.id) + ")");
        }
    }
}

std::map<int, std::vector<const TrackRow*>> SequenceResult::by_frame() const {
    std::map<int, std::vector<const TrackRow*>> out;
    for (const auto& row : rows) out[row.frame].push_back(&row);
    return out;
}

MotReport evaluate_clear(const SequenceResult& gt, const SequenceResult& hyp,
                         double iou_threshold) {
    const auto gt_frames = group_frames(gt);
    const auto hyp_frames = group_frames(hyp);

    std::set<int> frames;
    for (const auto& [f, _] : gt_frames) frames.insert(f);
    for (const auto& [f, _] : hyp_frames) frames.insert(f);

    MotReport report;
    report.gt_boxes = static_cast<int>(gt.rows.size());

    std::unordered_map<int, int> prev_match;          // gt id -> hyp id, previous frame
    std::unordered_map<int, int> last_match;          // gt id -> hyp id, ever
    std::unordered_map<int, bool> matched_last_seen;  // gt id matched at its last appearance
    std::unordered_map<int, int> gt_span, gt_covered;

    static const FrameItems kEmpty;
    for (const int f : frames) {
        auto git = gt_frames.find(f);
        auto hit = hyp_frames.find(f);
        const FrameItems& g = git != gt_frames.end() ? git->second : kEmpty;
        const FrameItems& h = hit != hyp_frames.end() ? hit->second : kEmpty;

        const int ng = static_cast<int>(g.ids.size());
        const int nh = static_cast<int>(h.ids.size());

        std::vector<char> g_used(ng, 0), h_used(nh, 0);
        std::unordered_map<int, int> frame_match;

        // carry over persisting correspondences first
        for (int i = 0; i < ng; ++i) {
            auto it = prev_match.find(g.ids[i]);
            if (it == prev_match.end()) continue;
            for (int j = 0; j < nh; ++j) {
                if (h_used[j] || h.ids[j] != it->second) continue;
                if (iou(g.boxes[i], h.boxes[j]) >= iou_threshold) {
                    g_used[i] = 1;
                    h_used[j] = 1;
                    frame_match[g.ids[i]] = h.ids[j];
                }
                break;
            }
        }

        // minimum 1-IOU assignment on the rest
        std::vector<int> g_rest, h_rest;
        for (int i = 0; i < ng; ++i)
            if (!g_used[i]) g_rest.push_back(i);
        for (int j = 0; j < nh; ++j)
            if (!h_used[j]) h_rest.push_back(j);
        if (!g_rest.empty() && !h_rest.empty()) {
            CostMatrix cost(static_cast<Eigen::Index>(g_rest.size()),
                            static_cast<Eigen::Index>(h_rest.size()));
            for (std::size_t a = 0; a < g_rest.size(); ++a) {
                for (std::size_t b = 0; b < h_rest.size(); ++b) {
                    const double v = iou(g.boxes[g_rest[a]], h.boxes[h_rest[b]]);
                    cost(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                        v >= iou_threshold ? 1.0 - v : CostMatrix::kInfeasible;
                }
            }
            for (const auto& [a, b] : solve_assignment(cost).matches) {
                const int gi = g_rest[static_cast<std::size_t>(a)];
                const int hj = h_rest[static_cast<std::size_t>(b)];
                g_used[gi] = 1;
                h_used[hj] = 1;
                frame_match[g.ids[gi]] = h.ids[hj];
            }
        }

        report.false_negatives += ng - static_cast<int>(frame_match.size());
        report.false_positives += nh - static_cast<int>(frame_match.size());

        for (int i = 0; i < ng; ++i) {
            const int gid = g.ids[i];
            ++gt_span[gid];
            auto fit = frame_match.find(gid);
            const bool matched = fit != frame_match.end();
            if (matched) {
                ++gt_covered[gid];
                auto lit = last_match.find(gid);
                if (lit != last_match.end() && lit->second != fit->second) {
                    ++report.id_switches;
                }
                auto mls = matched_last_seen.find(gid);
                if (mls != matched_last_seen.end() && !mls->second &&
                    last_match.count(gid)) {
                    ++report.fragmentations;
                }
                last_match[gid] = fit->second;
            }
            matched_last_seen[gid] = matched;
        }

        prev_match = std::move(frame_match);
    }

    report.gt_trajectories = static_cast<int>(gt_span.size());
    for (const auto& [gid, span] : gt_span) {
        const double coverage = static_cast<double>(gt_covered[gid]) / span;
        if (coverage >= 0.8) ++report.mostly_tracked;
        if (coverage < 0.2) ++report.mostly_lost;
    }

    const int errors =
        report.false_negatives + report.false_positives + report.id_switches;
    if (report.gt_boxes > 0) {
        report.mota = 1.0 - static_cast<double>(errors) / report.gt_boxes;
    } else {
        report.mota = errors == 0 ? 1.0 : -std::numeric_limits<double>::infinity();
    }
    return report;
}

double evaluate_idf1(const SequenceResult& gt, const SequenceResult& hyp,
                     double iou_threshold) {
    const auto gt_frames = group_frames(gt);
    const auto hyp_frames = group_frames(hyp);

    // Identity index maps
    std::unordered_map<int, int> gid_index, hid_index;
    for (const auto& row : gt.rows) {
        gid_index.emplace(row.id, static_cast<int>(gid_index.size()));
    }
    for (const auto& row : hyp.rows) {
        hid_index.emplace(row.id, static_cast<int>(hid_index.size()));
    }

    const int ng = static_cast<int>(gid_index.size());
    const int nh = static_cast<int>(hid_index.size());
    if (ng == 0 && nh == 0) return 1.0;
    if (ng == 0 || nh == 0) return 0.0;

    // Per-pair count of frames where the two identities' boxes overlap at
    // or above the threshold.
    Eigen::MatrixXd overlap = Eigen::MatrixXd::Zero(ng, nh);
    for (const auto& [f, g] : gt_frames) {
        auto hit = hyp_frames.find(f);
        if (hit == hyp_frames.end()) continue;
        const auto& h = hit->second;
        for (std::size_t i = 0; i < g.ids.size(); ++i) {
            for (std::size_t j = 0; j < h.ids.size(); ++j) {
                if (iou(g.boxes[i], h.boxes[j]) >= iou_threshold) {
                    overlap(gid_index[g.ids[i]], hid_index[h.ids[j]]) += 1.0;
                }
            }
        }
    }

    // Maximize total overlap with the assignment solver (costs as deficit
    // from the best possible count).
    const double top = overlap.maxCoeff();
    CostMatrix cost(ng, nh);
    cost.values = top - overlap.array();
    double idtp = 0.0;
    for (const auto& [i, j] : solve_assignment(cost).matches) idtp += overlap(i, j);

    const double idfn = static_cast<double>(gt.rows.size()) - idtp;
    const double idfp = static_cast<double>(hyp.rows.size()) - idtp;
    return 2.0 * idtp / (2.0 * idtp + idfp + idfn);
}

MotReport evaluate_mot(const SequenceResult& gt, const SequenceResult& hyp,
                       double iou_threshold) {
    MotReport report = evaluate_clear(gt, hyp, iou_threshold);
    report.idf1 = evaluate_idf1(gt, hyp, iou_threshold);
    return report;
}

double tpr_at_far(const std::vector<double>& genuine_scores,
                  const std::vector<double>& impostor_scores, double far) {
    if (genuine_scores.empty() || impostor_scores.empty()) {
        throw std::invalid_argument("tpr_at_far: score lists must be nonempty");
    }
    if (!(far > 0.0 && far < 1.0)) {
        throw std::invalid_argument("tpr_at_far: far must lie in (0, 1)");
    }

    std::vector<double> imp = impostor_scores;
    std::sort(imp.begin(), imp.end(), std::greater<>());
    const double n = static_cast<double>(imp.size());

    // Walk candidate thresholds (distinct impostor scores, descending) and
    // keep the lowest one whose acceptance fraction stays within far.
    double threshold = imp.front();
    bool found = false;
    std::size_t i = 0;
    while (i < imp.size()) {
        std::size_t j = i;
        while (j < imp.size() && imp[j] == imp[i]) ++j;  // count ties
        const double frac = static_cast<double>(j) / n;  // #{imp >= imp[i]} / n
        if (frac <= far) {
            threshold = imp[i];
            found = true;
        } else {
            break;  // fractions only grow from here
        }
        i = j;
    }
    if (!found) threshold = imp.front();  // accept only above every impostor

    std::size_t accepted = 0;
    for (const double s : genuine_scores) {
        if (s > threshold) ++accepted;
    }
    return static_cast<double>(accepted) / static_cast<double>(genuine_scores.size());
}

double average_precision(const std::vector<std::pair<Box, double>>& scored_boxes,
                         const std::vector<Box>& gts, double iou_threshold) {
    if (scored_boxes.empty() || gts.empty()) return 0.0;

    std::vector<int> order(scored_boxes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return scored_boxes[static_cast<std::size_t>(a)].second >
               scored_boxes[static_cast<std::size_t>(b)].second;
    });

    std::vector<char> gt_used(gts.size(), 0);
    std::vector<char> is_tp(order.size(), 0);
    for (std::size_t r = 0; r < order.size(); ++r) {
        const Box& det = scored_boxes[static_cast<std::size_t>(order[r])].first;
        double best = -1.0;
        int best_gt = -1;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            if (gt_used[g]) continue;
            const double v = iou(det, gts[g]);
            if (v >= iou_threshold && v > best) {
                best = v;
                best_gt = static_cast<int>(g);
            }
        }
        if (best_gt >= 0) {
            gt_used[static_cast<std::size_t>(best_gt)] = 1;
            is_tp[r] = 1;
        }
    }

    const double total_gt = static_cast<double>(gts.size());
    std::vector<double> precision(order.size()), recall(order.size());
    int tp = 0;
    for (std::size_t r = 0; r < order.size(); ++r) {
        if (is_tp[r]) ++tp;
        precision[r] = static_cast<double>(tp) / static_cast<double>(r + 1);
        recall[r] = static_cast<double>(tp) / total_gt;
    }

    // Area under the interpolated (monotone envelope) PR curve.
    for (std::size_t r = order.size() - 1; r-- > 0;) {
        precision[r] = std::max(precision[r], precision[r + 1]);
    }
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t r = 0; r < order.size(); ++r) {
        if (recall[r] > prev_recall) {
            ap += (recall[r] - prev_recall) * precision[r];
            prev_recall = recall[r];
        }
    }
    return ap;
}

}  // namespace motkit
