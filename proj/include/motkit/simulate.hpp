#pragma once

#include <cstdint>
#include <vector>

#include <motkit/association.hpp>
#include <motkit/sequence.hpp>
#include <motkit/tracker.hpp>

namespace motkit {

// Synthetic constant-velocity scenario. The seed fully determines the
// output; randomness is split into fixed sub-streams (see rng.hpp) so
// results are stable across platforms.
struct ScenarioConfig {
    int n_frames = 100;
    int n_targets = 5;
    double arena_w = 1280.0;
    double arena_h = 720.0;
    double speed_min = 1.0;       // px/frame
    double speed_max = 3.0;
    double p_miss = 0.0;          // independent per-box drop probability
    double fp_rate = 0.0;         // expected false positives per frame
    double box_jitter_std = 0.0;  // px, on center and size
    int embed_dim = 128;
    double embed_noise_std = 0.0;
    std::uint64_t seed = 1;
};

struct Scenario {
    SequenceResult gt;
    std::vector<std::vector<Detection>> frames;  // frames[i] is frame i+1
};

// Targets bounce off the arena walls; detections are the ground-truth boxes
// after independent drops and gaussian jitter, each carrying a unit-norm
// embedding sampled around its identity's mean. False positives draw from a
// shared background embedding cluster.
Scenario generate_scenario(const ScenarioConfig& cfg);

// Two targets that approach head-on, meet, and reverse away again. A
// constant-velocity motion model extrapolates straight through the meeting
// point, so motion-only association swaps the two identities there while
// distinct embeddings keep them apart.
struct CrossingConfig {
    int n_frames = 40;
    double speed = 6.0;     // px/frame
    double meet_gap = 4.0;  // center gap at closest approach, px
    double box_jitter_std = 0.0;
    int embed_dim = 32;
    double embed_noise_std = 0.0;
    std::uint64_t seed = 7;
};

Scenario crossing_scenario(const CrossingConfig& cfg);

// Exhaustive assignment oracle: enumerates every maximal feasible matching
// and returns the best under the solver's objective (most matches, then
// least cost, then lexicographically smallest). Requires
// min(rows, cols) <= 8; larger inputs throw std::logic_error.
Assignment brute_force_assignment(const CostMatrix& c);

}  // namespace motkit
