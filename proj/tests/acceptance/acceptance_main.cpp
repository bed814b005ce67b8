// Acceptance suite: runs every criterion at its stated tolerance and prints
// one PASS/FAIL line each. Exit code is the number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <motkit/association.hpp>
#include <motkit/geometry.hpp>
#include <motkit/kalman.hpp>
#include <motkit/losses.hpp>
#include <motkit/metrics.hpp>
#include <motkit/rng.hpp>
#include <motkit/simulate.hpp>
#include <motkit/tracker.hpp>

using namespace motkit;

namespace {

int failures = 0;

void report(int index, const char* name, bool pass, const std::string& details,
            bool warn_only = false) {
    const char* tag = pass ? "[PASS]" : (warn_only ? "[WARN]" : "[FAIL]");
    if (!pass && !warn_only) ++failures;
    std::printf("%s %d. %s — %s\n", tag, index, name, details.c_str());
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return buf;
}

// ---------------------------------------------------------------- 1
void criterion_assignment() {
    Rng rng(1001);
    const auto t0 = std::chrono::steady_clock::now();
    int mismatches = 0;
    int solved = 0;
    for (int n = 1; n <= 7; ++n) {
        for (int trial = 0; trial < 1000; ++trial) {
            CostMatrix c(n, n);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) c(i, j) = rng.uniform(0.0, 1.0);
            }
            const Assignment fast = solve_assignment(c);
            const Assignment slow = brute_force_assignment(c);
            ++solved;
            if (fast.matches.size() != slow.matches.size() ||
                assignment_cost(c, fast) != assignment_cost(c, slow)) {
                ++mismatches;
            }
        }
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(1, "assignment optimality vs exhaustive oracle",
           mismatches == 0 && secs < 10.0,
           fmt("%d matrices (1x1..7x7), %d cost mismatches, %.2f s (< 10 s)", solved,
               mismatches, secs));
}

// ---------------------------------------------------------------- 2
void criterion_kalman() {
    Rng rng(1002);
    double worst = 0.0;
    for (int batch = 0; batch < 1000; ++batch) {
        const int n = 1 + static_cast<int>(rng.below(24));
        const int m = 1 + static_cast<int>(rng.below(16));
        std::vector<MotionState> states;
        std::vector<Measurement> ms;
        for (int i = 0; i < n; ++i) {
            Vec4 v;
            v << rng.uniform(0.0, 1280.0), rng.uniform(0.0, 720.0), rng.uniform(0.15, 0.8),
                rng.uniform(30.0, 220.0);
            MotionState s = kf_initiate(Measurement(v));
            s.mean[4] = rng.uniform(-4.0, 4.0);
            s.mean[5] = rng.uniform(-4.0, 4.0);
            states.push_back(s);
        }
        for (int j = 0; j < m; ++j) {
            Vec4 v;
            v << rng.uniform(0.0, 1280.0), rng.uniform(0.0, 720.0), rng.uniform(0.15, 0.8),
                rng.uniform(30.0, 220.0);
            ms.emplace_back(v);
        }

        const auto batched = kf_predict_batch(states);
        for (std::size_t i = 0; i < states.size(); ++i) {
            const MotionState one = kf_predict(states[i]);
            worst = std::max(worst, (batched[i].mean - one.mean).cwiseAbs().maxCoeff());
            worst = std::max(worst,
                             (batched[i].covariance - one.covariance).cwiseAbs().maxCoeff());
        }

        const Eigen::MatrixXd g = gating_distance_batch(batched, ms);
        for (std::size_t i = 0; i < batched.size(); ++i) {
            for (std::size_t j = 0; j < ms.size(); ++j) {
                const double scalar = gating_distance(batched[i], ms[j]);
                worst = std::max(worst, std::abs(g(static_cast<int>(i),
                                                   static_cast<int>(j)) -
                                                 scalar));
            }
        }
    }
    report(2, "vectorized kalman equals sequential reference", worst < 1e-9,
           fmt("1000 random batches, max |batched - sequential| = %.3e (< 1e-9)", worst));
}

// ---------------------------------------------------------------- 3
EmbeddingBatch clustered_batch(Rng& rng, int dim, int n_pos, int n_neg, double noise) {
    Eigen::VectorXd anchor_mean(dim), negative_mean(dim);
    for (int i = 0; i < dim; ++i) anchor_mean[i] = rng.normal();
    for (int i = 0; i < dim; ++i) negative_mean[i] = rng.normal();
    anchor_mean.normalize();
    negative_mean.normalize();
    auto around = [&](const Eigen::VectorXd& mean) {
        Eigen::VectorXd v = mean;
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] += noise * rng.normal();
        v.normalize();
        return v;
    };
    EmbeddingBatch b;
    b.anchor = around(anchor_mean);
    for (int i = 0; i < n_pos; ++i) b.positives.push_back(around(anchor_mean));
    for (int i = 0; i < n_neg; ++i) b.negatives.push_back(around(negative_mean));
    return b;
}

bool smooth_point(const EmbeddingBatch& b) {
    double lo = 1e300, second = 1e300;
    for (const auto& p : b.positives) {
        const double d = b.anchor.dot(p);
        if (d < lo) {
            second = lo;
            lo = d;
        } else if (d < second) {
            second = d;
        }
    }
    if (b.positives.size() > 1 && second - lo < 1e-2) return false;
    for (const auto& n : b.negatives) {
        if (std::abs(b.anchor.dot(n) - lo) < 1e-2) return false;
    }
    return true;
}

double grad_error(const EmbeddingBatch& b,
                  const std::function<double(const EmbeddingBatch&)>& eval,
                  const EmbeddingGrad& grad) {
    const double step = 1e-5;
    double worst = 0.0;
    auto probe = [&](auto mutate, double analytic) {
        EmbeddingBatch hi = b, lo = b;
        mutate(hi, step);
        mutate(lo, -step);
        const double fd = (eval(hi) - eval(lo)) / (2.0 * step);
        const double denom = std::max({std::abs(fd), std::abs(analytic), 1.0});
        worst = std::max(worst, std::abs(fd - analytic) / denom);
    };
    for (Eigen::Index i = 0; i < b.anchor.size(); ++i) {
        probe([i](EmbeddingBatch& x, double d) { x.anchor[i] += d; }, grad.d_anchor[i]);
    }
    for (std::size_t p = 0; p < b.positives.size(); ++p) {
        for (Eigen::Index i = 0; i < b.anchor.size(); ++i) {
            probe([p, i](EmbeddingBatch& x, double d) { x.positives[p][i] += d; },
                  grad.d_positives[p][i]);
        }
    }
    for (std::size_t n = 0; n < b.negatives.size(); ++n) {
        for (Eigen::Index i = 0; i < b.anchor.size(); ++i) {
            probe([n, i](EmbeddingBatch& x, double d) { x.negatives[n][i] += d; },
                  grad.d_negatives[n][i]);
        }
    }
    return worst;
}

void criterion_losses() {
    Rng rng(1003);
    int ordering_violations = 0;
    double max_identity_gap = 0.0;
    for (int t = 0; t < 10000; ++t) {
        const EmbeddingBatch b =
            clustered_batch(rng, 16, 1 + static_cast<int>(rng.below(4)),
                            1 + static_cast<int>(rng.below(8)), 0.1);
        const double lt = triplet_loss(b).value;
        const double lu = upper_bound_loss(b).value;
        if (!(lu >= lt && lt >= 0.0)) ++ordering_violations;
        max_identity_gap =
            std::max(max_identity_gap, std::abs(lu - softmax_form_loss(b)));
    }

    double max_grad = 0.0;
    Rng grng(1004);
    int points = 0;
    while (points < 100) {
        const EmbeddingBatch b = clustered_batch(grng, 8, 2, 4, 0.4);
        if (!smooth_point(b)) continue;
        ++points;
        max_grad = std::max(
            max_grad, grad_error(b, [](const EmbeddingBatch& x) { return triplet_loss(x).value; },
                                 triplet_loss(b).grad));
        max_grad = std::max(
            max_grad,
            grad_error(b, [](const EmbeddingBatch& x) { return upper_bound_loss(x).value; },
                       upper_bound_loss(b).grad));
    }
    const double step = 1e-5;
    for (int t = 0; t < 100; ++t) {
        const int classes = 2 + static_cast<int>(grng.below(10));
        Eigen::VectorXd logits(classes);
        for (int i = 0; i < classes; ++i) logits[i] = grng.uniform(-3.0, 3.0);
        const int target = static_cast<int>(grng.below(classes));
        const auto r = cross_entropy_loss(logits, target);
        for (int i = 0; i < classes; ++i) {
            Eigen::VectorXd hi = logits, lo = logits;
            hi[i] += step;
            lo[i] -= step;
            const double fd = (cross_entropy_loss(hi, target).value -
                               cross_entropy_loss(lo, target).value) /
                              (2.0 * step);
            const double denom = std::max({std::abs(fd), std::abs(r.d_logits[i]), 1.0});
            max_grad = std::max(max_grad, std::abs(fd - r.d_logits[i]) / denom);
        }

        TaskLossSet set;
        set.losses = Eigen::MatrixXd::Zero(1, 3);
        for (int j = 0; j < 3; ++j) set.losses(0, j) = grng.uniform(0.1, 10.0);
        Eigen::MatrixXd s = Eigen::MatrixXd::Zero(1, 3);
        for (int j = 0; j < 3; ++j) s(0, j) = grng.uniform(-2.0, 2.0);
        const auto u = uncertainty_total_loss(set, s);
        for (int j = 0; j < 3; ++j) {
            Eigen::MatrixXd hi = s, lo = s;
            hi(0, j) += step;
            lo(0, j) -= step;
            const double fd = (uncertainty_total_loss(set, hi).value -
                               uncertainty_total_loss(set, lo).value) /
                              (2.0 * step);
            const double denom = std::max({std::abs(fd), std::abs(u.d_s(0, j)), 1.0});
            max_grad = std::max(max_grad, std::abs(fd - u.d_s(0, j)) / denom);
        }
    }

    report(3, "loss chain: ordering, smooth/softmax identity, gradients",
           ordering_violations == 0 && max_identity_gap < 1e-12 && max_grad < 1e-4,
           fmt("10^4 batches: %d ordering violations, |Eq2-Eq3| max %.2e (< 1e-12), "
               "grad rel err max %.2e (< 1e-4)",
               ordering_violations, max_identity_gap, max_grad));
}

// ---------------------------------------------------------------- 4
void criterion_uncertainty_minimum() {
    Rng rng(1005);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const double loss = rng.uniform(0.01, 100.0);
        auto term = [&](double sv) { return 0.5 * (std::exp(-sv) * loss + sv); };
        double lo = std::log(loss) - 6.0, hi = std::log(loss) + 6.0;
        for (int it = 0; it < 300; ++it) {
            const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
            if (term(m1) < term(m2)) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        const double numeric = term(0.5 * (lo + hi));
        const double closed = 0.5 * (1.0 + std::log(loss));
        worst = std::max(worst, std::abs(numeric - closed));

        TaskLossSet set;
        set.losses = Eigen::MatrixXd::Constant(1, 3, loss);
        const Eigen::MatrixXd s = Eigen::MatrixXd::Constant(1, 3, std::log(loss));
        worst = std::max(worst,
                         std::abs(uncertainty_total_loss(set, s).value - 3.0 * closed));
        worst = std::max(worst, uncertainty_total_loss(set, s).d_s.cwiseAbs().maxCoeff());
    }
    report(4, "uncertainty per-term minimum equals (1 + log L)/2", worst < 1e-9,
           fmt("100 random L in (0.01, 100), max gap %.3e (< 1e-9)", worst));
}

// ---------------------------------------------------------------- 5
void criterion_end_to_end() {
    ScenarioConfig cfg;
    cfg.n_frames = 100;
    cfg.n_targets = 5;
    cfg.p_miss = 0.05;
    cfg.box_jitter_std = 1.0;
    cfg.embed_dim = 128;
    cfg.embed_noise_std = 0.05;
    cfg.seed = 20260808;
    const Scenario noisy = generate_scenario(cfg);
    const MotReport r = evaluate_mot(noisy.gt, run_tracker(TrackerConfig{}, noisy.frames));

    ScenarioConfig clean = cfg;
    clean.p_miss = 0.0;
    clean.box_jitter_std = 0.0;
    clean.embed_noise_std = 0.0;
    const Scenario noiseless = generate_scenario(clean);
    const MotReport rc =
        evaluate_mot(noiseless.gt, run_tracker(TrackerConfig{}, noiseless.frames));

    const bool pass = r.mota >= 0.95 && r.idf1 >= 0.90 && r.id_switches <= 2 &&
                      rc.mota == 1.0 && rc.id_switches == 0;
    report(5, "end-to-end synthetic tracking",
           pass,
           fmt("noisy: MOTA %.4f (>= 0.95), IDF1 %.4f (>= 0.90), IDs %d (<= 2); "
               "noiseless: MOTA %.4f (= 1.0), IDs %d (= 0)",
               r.mota, r.idf1, r.id_switches, rc.mota, rc.id_switches));
}

// ---------------------------------------------------------------- 6
void criterion_appearance_ablation() {
    CrossingConfig cfg;
    cfg.n_frames = 40;
    cfg.speed = 6.0;
    cfg.meet_gap = 4.0;
    cfg.box_jitter_std = 0.5;
    cfg.embed_dim = 64;
    cfg.embed_noise_std = 0.05;
    cfg.seed = 4242;
    const Scenario sc = crossing_scenario(cfg);

    TrackerConfig full;
    full.lambda = 0.9;
    const double idf1_full = evaluate_idf1(sc.gt, run_tracker(full, sc.frames));

    TrackerConfig motion;
    motion.motion_only = true;
    const double idf1_motion = evaluate_idf1(sc.gt, run_tracker(motion, sc.frames));

    report(6, "appearance ablation on crossing targets", idf1_full > idf1_motion,
           fmt("IDF1 full-cost %.4f > motion-only %.4f", idf1_full, idf1_motion));
}

// ---------------------------------------------------------------- 7
void criterion_throughput() {
    ScenarioConfig cfg;
    cfg.n_frames = 400;
    cfg.n_targets = 30;
    cfg.p_miss = 0.02;
    cfg.fp_rate = 0.5;
    cfg.box_jitter_std = 1.0;
    cfg.embed_dim = 128;
    cfg.embed_noise_std = 0.05;
    cfg.seed = 2;
    const Scenario sc = generate_scenario(cfg);

    Tracker tracker{TrackerConfig{}};
    double total = 0.0;
    for (std::size_t i = 0; i < sc.frames.size(); ++i) {
        StageTimes t;
        tracker.step_timed(static_cast<int>(i) + 1, sc.frames[i], t);
        total += t.total();
    }
    const double steps_per_sec = sc.frames.size() / total;

    if (steps_per_sec >= 200.0) {
        report(7, "association throughput at 30 targets/frame", true,
               fmt("%.1f steps/s (>= 200)", steps_per_sec));
    } else if (steps_per_sec >= 50.0) {
        report(7, "association throughput at 30 targets/frame", false,
               fmt("%.1f steps/s below the 200 target but above the 50 hard floor",
                   steps_per_sec),
               /*warn_only=*/true);
    } else {
        report(7, "association throughput at 30 targets/frame", false,
               fmt("%.1f steps/s (< 50 hard floor)", steps_per_sec));
    }
}

// ---------------------------------------------------------------- 8
void criterion_metrics_consistency() {
    Rng seeds(1006);
    bool perfect_ok = true;
    bool identity_ok = true;
    bool relabel_ok = true;
    for (int t = 0; t < 100; ++t) {
        ScenarioConfig cfg;
        cfg.n_frames = 20 + static_cast<int>(seeds.below(30));
        cfg.n_targets = 2 + static_cast<int>(seeds.below(6));
        cfg.p_miss = 0.1;
        cfg.fp_rate = 0.5;
        cfg.box_jitter_std = 1.0;
        cfg.embed_dim = 8;
        cfg.embed_noise_std = 0.1;
        cfg.seed = seeds.next_u64();
        const Scenario sc = generate_scenario(cfg);

        const MotReport self = evaluate_mot(sc.gt, sc.gt);
        if (!(self.mota == 1.0 && self.idf1 == 1.0 && self.false_negatives == 0 &&
              self.false_positives == 0 && self.id_switches == 0)) {
            perfect_ok = false;
        }

        const SequenceResult hyp = run_tracker(TrackerConfig{}, sc.frames);
        const MotReport r = evaluate_mot(sc.gt, hyp);
        const double identity =
            1.0 - static_cast<double>(r.false_negatives + r.false_positives +
                                      r.id_switches) /
                      r.gt_boxes;
        if (r.mota != identity) identity_ok = false;

        SequenceResult renamed = hyp;
        for (auto& row : renamed.rows) row.id = row.id * 11 + 5;
        const MotReport rr = evaluate_mot(sc.gt, renamed);
        if (std::abs(rr.mota - r.mota) > 1e-12 || std::abs(rr.idf1 - r.idf1) > 1e-12) {
            relabel_ok = false;
        }
    }
    report(8, "metrics self-consistency", perfect_ok && identity_ok && relabel_ok,
           fmt("100 scenarios: gt-vs-gt perfect %s, MOTA identity exact %s, "
               "relabeling invariant %s",
               perfect_ok ? "yes" : "NO", identity_ok ? "yes" : "NO",
               relabel_ok ? "yes" : "NO"));
}

// ---------------------------------------------------------------- 9
void criterion_geometry() {
    Rng rng(1007);
    double worst = 0.0;
    for (int t = 0; t < 10000; ++t) {
        const Box gt{rng.uniform(-200.0, 200.0), rng.uniform(-200.0, 200.0),
                     rng.uniform(0.5, 150.0), rng.uniform(0.5, 150.0)};
        const Box anchor{rng.uniform(-200.0, 200.0), rng.uniform(-200.0, 200.0),
                         rng.uniform(0.5, 150.0), rng.uniform(0.5, 150.0)};
        const Box back = decode_box(encode_box(gt, anchor), anchor);
        worst = std::max(worst, std::abs(back.x - gt.x) / std::max(1.0, std::abs(gt.x)));
        worst = std::max(worst, std::abs(back.y - gt.y) / std::max(1.0, std::abs(gt.y)));
        worst = std::max(worst, std::abs(back.w - gt.w) / gt.w);
        worst = std::max(worst, std::abs(back.h - gt.h) / gt.h);
    }

    const auto templates = make_anchor_templates();
    bool anchors_ok = templates.size() == 12;
    if (anchors_ok) {
        anchors_ok = std::abs(templates.front().width - 8.0 * std::sqrt(2.0)) < 0.005 &&
                     std::abs(templates.back().width - 512.0) < 1e-9;
        for (const auto& t : templates) {
            if (std::abs(t.height - 3.0 * t.width) > 1e-9) anchors_ok = false;
        }
    }
    report(9, "geometry round-trip and anchor templates", worst < 1e-9 && anchors_ok,
           fmt("10^4 encode/decode pairs, max rel err %.3e (< 1e-9); 12 templates, "
               "widths 11.31..512, h = 3w %s",
               worst, anchors_ok ? "hold" : "VIOLATED"));
}

}  // namespace

int main() {
    std::printf("acceptance suite\n");
    criterion_assignment();
    criterion_kalman();
    criterion_losses();
    criterion_uncertainty_minimum();
    criterion_end_to_end();
    criterion_appearance_ablation();
    criterion_throughput();
    criterion_metrics_consistency();
    criterion_geometry();
    std::printf("%s (%d failing)\n", failures == 0 ? "ALL CRITERIA PASS" : "FAILURES PRESENT",
                failures);
    return failures;
}
