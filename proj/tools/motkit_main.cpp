// Command-line surface: track, eval, simulate, bench, losses-check.
// Exit codes: 0 ok, 1 runtime failure, 2 usage/format error.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include <motkit/association.hpp>
#include <motkit/losses.hpp>
#include <motkit/metrics.hpp>
#include <motkit/mot_io.hpp>
#include <motkit/rng.hpp>
#include <motkit/simulate.hpp>
#include <motkit/tracker.hpp>

namespace {

using namespace motkit;

struct TrackArgs {
    std::string dets, embs, out;
    TrackerConfig cfg;
};

int run_track(const TrackArgs& a) {
    if (!a.cfg.motion_only && a.embs.empty()) {
        std::cerr << "track: --embs is required unless --motion-only is set\n";
        return 2;
    }
    const std::vector<MotRow> det_rows = read_mot_file(a.dets);
    std::vector<Eigen::VectorXd> embs;
    if (!a.cfg.motion_only) embs = read_embeddings(a.embs);

    const auto frames = group_detections(det_rows, a.cfg.motion_only ? std::vector<Eigen::VectorXd>{} : embs);
    const SequenceResult result = run_tracker(a.cfg, frames);
    write_mot_file(a.out, to_mot_rows(result, 1.0));
    std::cout << "tracked " << frames.size() << " frames, wrote " << result.rows.size()
              << " rows to " << a.out << "\n";
    return 0;
}

struct EvalArgs {
    std::string gt, result, csv;
    double iou_threshold = 0.5;
};

void clip_to_range(SequenceResult& seq, int lo, int hi) {
    std::erase_if(seq.rows, [&](const TrackRow& r) { return r.frame < lo || r.frame > hi; });
}

int run_eval(const EvalArgs& a) {
    SequenceResult gt = to_sequence(read_mot_file(a.gt));
    SequenceResult hyp = to_sequence(read_mot_file(a.result));
    if (gt.rows.empty()) {
        std::cerr << "eval: ground-truth file has no rows\n";
        return 2;
    }

    auto range = [](const SequenceResult& s) {
        int lo = INT32_MAX, hi = 0;
        for (const auto& r : s.rows) {
            lo = std::min(lo, r.frame);
            hi = std::max(hi, r.frame);
        }
        return std::pair{lo, hi};
    };
    const auto [glo, ghi] = range(gt);
    if (!hyp.rows.empty()) {
        const auto [hlo, hhi] = range(hyp);
        if (glo != hlo || ghi != hhi) {
            const int lo = std::max(glo, hlo);
            const int hi = std::min(ghi, hhi);
            std::cerr << "eval: warning: frame ranges differ (gt " << glo << ".." << ghi
                      << ", result " << hlo << ".." << hhi << "); evaluating " << lo
                      << ".." << hi << "\n";
            clip_to_range(gt, lo, hi);
            clip_to_range(hyp, lo, hi);
        }
    }

    const MotReport r = evaluate_mot(gt, hyp, a.iou_threshold);
    char line[256];
    std::printf("%-8s%-8s%-6s%-6s%-6s%-6s%-6s\n", "MOTA", "IDF1", "MT", "ML", "IDs", "FP", "FN");
    std::snprintf(line, sizeof(line), "%-8.3f%-8.3f%-6d%-6d%-6d%-6d%-6d", r.mota, r.idf1,
                  r.mostly_tracked, r.mostly_lost, r.id_switches, r.false_positives,
                  r.false_negatives);
    std::printf("%s\n", line);

    if (!a.csv.empty()) {
        std::FILE* f = std::fopen(a.csv.c_str(), "w");
        if (!f) throw std::runtime_error("cannot write '" + a.csv + "'");
        std::fprintf(f, "MOTA,IDF1,MT,ML,IDs,FP,FN\n");
        std::fprintf(f, "%.6f,%.6f,%d,%d,%d,%d,%d\n", r.mota, r.idf1, r.mostly_tracked,
                     r.mostly_lost, r.id_switches, r.false_positives, r.false_negatives);
        std::fclose(f);
    }
    return 0;
}

struct SimulateArgs {
    std::string out_gt, out_dets, out_embs;
    std::string kind = "random";
    ScenarioConfig cfg;
    CrossingConfig crossing;
};

int run_simulate(const SimulateArgs& a) {
    Scenario sc;
    if (a.kind == "random") {
        sc = generate_scenario(a.cfg);
    } else if (a.kind == "crossing") {
        sc = crossing_scenario(a.crossing);
    } else {
        std::cerr << "simulate: unknown scenario '" << a.kind << "'\n";
        return 2;
    }

    if (!a.out_gt.empty()) write_mot_file(a.out_gt, to_mot_rows(sc.gt, 1.0));

    std::vector<MotRow> det_rows;
    std::vector<Eigen::VectorXd> embs;
    for (std::size_t f = 0; f < sc.frames.size(); ++f) {
        for (const auto& d : sc.frames[f]) {
            MotRow row;
            row.frame = static_cast<int>(f) + 1;
            row.id = -1;
            row.bb_left = d.box.x;
            row.bb_top = d.box.y;
            row.bb_width = d.box.w;
            row.bb_height = d.box.h;
            row.conf = d.confidence;
            det_rows.push_back(row);
            embs.push_back(d.embedding);
        }
    }
    if (!a.out_dets.empty()) write_mot_file(a.out_dets, det_rows);
    if (!a.out_embs.empty()) write_embeddings(a.out_embs, embs);

    std::cout << "scenario '" << a.kind << "': " << sc.frames.size() << " frames, "
              << sc.gt.rows.size() << " gt boxes, " << det_rows.size() << " detections\n";
    return 0;
}

struct BenchArgs {
    std::vector<int> densities = {10, 30, 60};
    int n_frames = 300;
    std::uint64_t seed = 42;
    int embed_dim = 128;
    bool motion_only = false;
    double lambda = 0.9;
};

int run_bench(const BenchArgs& a) {
    std::printf("%-8s %-7s %-10s %-9s %-9s %-9s %-7s %-8s %-8s\n", "density", "frames",
                "steps/s", "mean_ms", "p99_ms", "predict%", "cost%", "assign%", "update%");
    for (const int density : a.densities) {
        ScenarioConfig cfg;
        cfg.n_frames = a.n_frames;
        cfg.n_targets = density;
        cfg.p_miss = 0.02;
        cfg.fp_rate = 0.5;
        cfg.box_jitter_std = 1.0;
        cfg.embed_dim = a.embed_dim;
        cfg.embed_noise_std = 0.05;
        cfg.seed = a.seed;
        const Scenario sc = generate_scenario(cfg);

        TrackerConfig tc;
        tc.lambda = a.lambda;
        tc.motion_only = a.motion_only;
        Tracker tracker(tc);

        StageTimes stages;
        std::vector<double> frame_seconds;
        frame_seconds.reserve(sc.frames.size());
        for (std::size_t i = 0; i < sc.frames.size(); ++i) {
            StageTimes t;
            tracker.step_timed(static_cast<int>(i) + 1, sc.frames[i], t);
            stages += t;
            frame_seconds.push_back(t.total());
        }

        const double total = std::accumulate(frame_seconds.begin(), frame_seconds.end(), 0.0);
        const double steps_per_sec = total > 0.0 ? frame_seconds.size() / total : 0.0;
        const double mean_ms = 1e3 * total / frame_seconds.size();
        std::vector<double> sorted = frame_seconds;
        std::sort(sorted.begin(), sorted.end());
        const std::size_t p99_idx =
            std::min(sorted.size() - 1,
                     static_cast<std::size_t>(std::ceil(0.99 * sorted.size())) - 1);
        const double p99_ms = 1e3 * sorted[p99_idx];
        const double st = stages.total() > 0.0 ? stages.total() : 1.0;

        std::printf("%-8d %-7zu %-10.1f %-9.4f %-9.4f %-9.1f %-7.1f %-8.1f %-8.1f\n", density,
                    frame_seconds.size(), steps_per_sec, mean_ms, p99_ms,
                    100.0 * stages.predict / st, 100.0 * stages.cost / st,
                    100.0 * stages.assign / st, 100.0 * stages.update / st);
    }
    return 0;
}

struct LossesCheckArgs {
    int trials = 10000;
    int grad_trials = 100;
    int dim = 16;
    std::uint64_t seed = 123;
};

EmbeddingBatch sample_batch(Rng& rng, int dim) {
    const int n_pos = 1 + static_cast<int>(rng.below(4));
    const int n_neg = 1 + static_cast<int>(rng.below(8));
    Eigen::VectorXd anchor_mean(dim), negative_mean(dim);
    for (int i = 0; i < dim; ++i) anchor_mean[i] = rng.normal();
    for (int i = 0; i < dim; ++i) negative_mean[i] = rng.normal();
    anchor_mean.normalize();
    negative_mean.normalize();

    auto around = [&](const Eigen::VectorXd& mean) {
        Eigen::VectorXd v = mean;
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] += 0.1 * rng.normal();
        v.normalize();
        return v;
    };
    EmbeddingBatch b;
    b.anchor = around(anchor_mean);
    for (int i = 0; i < n_pos; ++i) b.positives.push_back(around(anchor_mean));
    for (int i = 0; i < n_neg; ++i) b.negatives.push_back(around(negative_mean));
    return b;
}

int run_losses_check(const LossesCheckArgs& a) {
    Rng rng = Rng::substream(a.seed, 0);
    int ordering_violations = 0;
    double max_identity_gap = 0.0;
    for (int t = 0; t < a.trials; ++t) {
        const EmbeddingBatch b = sample_batch(rng, a.dim);
        const double lt = triplet_loss(b).value;
        const double lu = upper_bound_loss(b).value;
        const double ls = softmax_form_loss(b);
        if (!(lu >= lt && lt >= 0.0)) ++ordering_violations;
        max_identity_gap = std::max(max_identity_gap, std::abs(lu - ls));
    }
    std::printf("ordering   upper>=triplet>=0: %d violations in %d trials\n",
                ordering_violations, a.trials);
    std::printf("identity   max |smooth - softmax form| = %.3e (bound 1e-12)\n",
                max_identity_gap);

    // finite-difference gradient probe at smooth points
    const double step = 1e-5;
    double max_rel = 0.0;
    Rng grad_rng = Rng::substream(a.seed, 1);
    for (int t = 0; t < a.grad_trials; ++t) {
        EmbeddingBatch b = sample_batch(grad_rng, a.dim);
        for (int which = 0; which < 2; ++which) {
            const auto eval = [&](const EmbeddingBatch& x) {
                return which == 0 ? triplet_loss(x).value : upper_bound_loss(x).value;
            };
            const auto res = which == 0 ? triplet_loss(b) : upper_bound_loss(b);
            for (Eigen::Index i = 0; i < b.anchor.size(); ++i) {
                EmbeddingBatch hi = b, lo = b;
                hi.anchor[i] += step;
                lo.anchor[i] -= step;
                const double fd = (eval(hi) - eval(lo)) / (2.0 * step);
                const double an = res.grad.d_anchor[i];
                const double denom = std::max({std::abs(fd), std::abs(an), 1.0});
                max_rel = std::max(max_rel, std::abs(fd - an) / denom);
            }
        }
    }
    std::printf("gradients  max relative error vs central differences = %.3e (bound 1e-4)\n",
                max_rel);

    double max_station = 0.0;
    Rng urng = Rng::substream(a.seed, 2);
    for (int t = 0; t < 100; ++t) {
        const double loss = urng.uniform(0.01, 100.0);
        TaskLossSet set;
        set.losses = Eigen::MatrixXd::Constant(1, 3, loss);
        Eigen::MatrixXd s = Eigen::MatrixXd::Constant(1, 3, std::log(loss));
        const auto res = uncertainty_total_loss(set, s);
        const double expect = 3.0 * 0.5 * (1.0 + std::log(loss));
        max_station = std::max(max_station, std::abs(res.value - expect));
        max_station = std::max(max_station, res.d_s.cwiseAbs().maxCoeff());
    }
    std::printf("uncertainty per-term minimum matches (1 + log L)/2, max gap %.3e (bound 1e-9)\n",
                max_station);

    const bool ok = ordering_violations == 0 && max_identity_gap < 1e-12 &&
                    max_rel < 1e-4 && max_station < 1e-9;
    std::printf("%s\n", ok ? "losses-check: PASS" : "losses-check: FAIL");
    return ok ? 0 : 1;
}

// Plain key=value config support. The file's pairs are spliced in right
// after the subcommand token so explicit command-line flags, which come
// later, override them.
std::vector<std::pair<std::string, std::string>> load_config_pairs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open config file '" + path + "'");
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string line;
    int line_no = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw FormatError("config line " + std::to_string(line_no) +
                              ": expected key=value");
        }
        pairs.emplace_back(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
    }
    return pairs;
}

std::vector<std::string> splice_config(std::vector<std::string> args) {
    std::string config_path;
    for (std::size_t i = 0; i < args.size();) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                       args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
        } else {
            ++i;
        }
    }
    if (config_path.empty()) return args;

    std::vector<std::string> expanded;
    expanded.reserve(args.size() + 8);
    std::size_t insert_after = 0;
    if (!args.empty() && !args[0].empty() && args[0][0] != '-') insert_after = 1;
    expanded.insert(expanded.end(), args.begin(),
                    args.begin() + static_cast<std::ptrdiff_t>(insert_after));
    for (const auto& [key, value] : load_config_pairs(config_path)) {
        if (key == "motion-only") {  // boolean flags take no value
            if (value == "true" || value == "1" || value.empty()) {
                expanded.push_back("--" + key);
            }
        } else {
            expanded.push_back("--" + key);
            expanded.push_back(value);
        }
    }
    expanded.insert(expanded.end(), args.begin() + static_cast<std::ptrdiff_t>(insert_after),
                    args.end());
    return expanded;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-object tracking association engine and evaluation toolkit"};
    app.require_subcommand(1);

    TrackArgs track_args;
    auto* track = app.add_subcommand("track", "associate detections into tracks");
    track->add_option("--dets", track_args.dets, "detection file (MOT rows, id -1)")
        ->required()
        ->check(CLI::ExistingFile);
    track->add_option("--embs", track_args.embs, "embedding sidecar (JDEB)");
    track->add_option("--out", track_args.out, "output hypothesis file")->required();
    track->add_option("--lambda", track_args.cfg.lambda, "appearance weight in fused cost");
    track->add_option("--alpha", track_args.cfg.alpha_ema, "appearance EMA momentum");
    track->add_option("--confirm-frames", track_args.cfg.confirm_frames,
                      "consecutive hits to confirm a tracklet");
    track->add_option("--max-lost", track_args.cfg.max_lost_frames,
                      "frames without update before termination");
    track->add_option("--gate", track_args.cfg.gate, "squared-Mahalanobis gate");
    track->add_option("--max-cost", track_args.cfg.max_cost, "maximum matchable fused cost");
    track->add_option("--min-conf", track_args.cfg.min_confidence,
                      "detection confidence floor");
    track->add_flag("--motion-only", track_args.cfg.motion_only,
                    "force lambda = 0 and ignore embeddings");
    std::string track_config;
    track->add_option("--config", track_config, "key=value config file; flags override");

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "CLEAR/IDF1 evaluation of a result file");
    eval->add_option("--gt", eval_args.gt, "ground-truth MOT file")
        ->required()
        ->check(CLI::ExistingFile);
    eval->add_option("--result", eval_args.result, "hypothesis MOT file")
        ->required()
        ->check(CLI::ExistingFile);
    eval->add_option("--iou", eval_args.iou_threshold, "match IOU threshold");
    eval->add_option("--csv", eval_args.csv, "also write the report as CSV");
    std::string eval_config;
    eval->add_option("--config", eval_config, "key=value config file; flags override");

    SimulateArgs sim_args;
    auto* sim = app.add_subcommand("simulate", "generate a synthetic scenario");
    sim->add_option("--scenario", sim_args.kind, "random | crossing");
    sim->add_option("--out-gt", sim_args.out_gt, "ground-truth output file");
    sim->add_option("--out-dets", sim_args.out_dets, "detections output file");
    sim->add_option("--out-embs", sim_args.out_embs, "embedding sidecar output file");
    sim->add_option("--frames", sim_args.cfg.n_frames, "frame count");
    sim->add_option("--targets", sim_args.cfg.n_targets, "target count");
    sim->add_option("--arena-w", sim_args.cfg.arena_w, "arena width, px");
    sim->add_option("--arena-h", sim_args.cfg.arena_h, "arena height, px");
    sim->add_option("--speed-min", sim_args.cfg.speed_min, "min speed, px/frame");
    sim->add_option("--speed-max", sim_args.cfg.speed_max, "max speed, px/frame");
    sim->add_option("--p-miss", sim_args.cfg.p_miss, "per-box drop probability");
    sim->add_option("--fp-rate", sim_args.cfg.fp_rate, "expected false positives per frame");
    sim->add_option("--jitter", sim_args.cfg.box_jitter_std, "box jitter std, px");
    sim->add_option("--embed-dim", sim_args.cfg.embed_dim, "embedding dimension");
    sim->add_option("--embed-noise", sim_args.cfg.embed_noise_std, "embedding noise std");
    sim->add_option("--seed", sim_args.cfg.seed, "scenario seed");
    sim->add_option("--crossing-speed", sim_args.crossing.speed, "crossing: speed px/frame");
    sim->add_option("--crossing-gap", sim_args.crossing.meet_gap, "crossing: gap at meeting");
    std::string sim_config;
    sim->add_option("--config", sim_config, "key=value config file; flags override");

    BenchArgs bench_args;
    auto* bench = app.add_subcommand("bench", "association throughput benchmark");
    bench->add_option("--densities", bench_args.densities, "targets per frame to sweep")
        ->delimiter(',');
    bench->add_option("--frames", bench_args.n_frames, "frames per run");
    bench->add_option("--seed", bench_args.seed, "scenario seed");
    bench->add_option("--embed-dim", bench_args.embed_dim, "embedding dimension");
    bench->add_option("--lambda", bench_args.lambda, "appearance weight");
    bench->add_flag("--motion-only", bench_args.motion_only, "benchmark motion-only mode");
    std::string bench_config;
    bench->add_option("--config", bench_config, "key=value config file; flags override");

    LossesCheckArgs losses_args;
    auto* lcheck = app.add_subcommand("losses-check",
                                      "loss ordering/equivalence/gradient diagnostics");
    lcheck->add_option("--trials", losses_args.trials, "ordering/identity trials");
    lcheck->add_option("--grad-trials", losses_args.grad_trials, "gradient probe points");
    lcheck->add_option("--dim", losses_args.dim, "embedding dimension");
    lcheck->add_option("--seed", losses_args.seed, "rng seed");

    // config pairs may repeat an option the user also passed; last one wins
    for (auto* sub : {track, eval, sim, bench, lcheck}) {
        for (auto* opt : sub->get_options()) {
            opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        }
    }

    try {
        std::vector<std::string> args =
            splice_config(std::vector<std::string>(argv + 1, argv + argc));
        std::reverse(args.begin(), args.end());  // CLI11 wants reversed argv
        app.parse(std::move(args));
        if (track->parsed()) return run_track(track_args);
        if (eval->parsed()) return run_eval(eval_args);
        if (sim->parsed()) return run_simulate(sim_args);
        if (bench->parsed()) return run_bench(bench_args);
        if (lcheck->parsed()) return run_losses_check(losses_args);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::logic_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
