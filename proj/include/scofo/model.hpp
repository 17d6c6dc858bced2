#pragma once

#include <array>
#include <string>
#include <vector>

#include "scofo/logmath.hpp"
#include "scofo/score.hpp"

namespace scofo {

// Top-level topology of the performance model.
//   Baseline: the fully connected event matrix, materialized densely.
//   NoBreak:  banded neighbor matrix plus the stop/resume outer product.
//   Break:    banded neighbor matrix plus an extra top state through which
//             every repeat/skip routes as a two-step transition.
enum class TopologyVariant { Baseline, NoBreak, Break };

std::string to_string(TopologyVariant v);
TopologyVariant variant_from_string(const std::string& s);

// Per-event bottom chain: state 0 sustains the event, optional state 1 is
// the between-note pause. All probabilities are kept in the log domain.
struct BottomHmm {
    int L = 1;
    std::array<std::array<double, 2>, 2> log_a{{{kLogZero, kLogZero}, {kLogZero, kLogZero}}};
    std::array<double, 2> log_exit{kLogZero, kLogZero};
    std::array<double, 2> log_init{kLogZero, kLogZero};
};

struct ModelConfig {
    double hop_s = 0.020;
    double frame_s = 0.128;
    TopologyVariant variant = TopologyVariant::Break;
    double log10_s = -100.0;  // stop probability as log10; -inf means s = 0
    bool pause_states = false;
    double a_skip2 = 1e-50;       // deletion-error transition j -> j+2
    double a_self_top = 0.0;      // insertion-error self transition j -> j
    double a_pause_self = 0.999;  // pause-state dwell
    double a_pause_entry = 1e-100;
    double a_break_self = 0.996;  // break-state bottom self-loop
};

ModelConfig model_config_from_json(const std::string& text);
std::string model_config_to_json(const ModelConfig& cfg);

// Two-level performance model. Immutable once built; sharing a built model
// across threads is safe.
struct PerformanceHmm {
    int n_events = 0;
    int L = 1;
    TopologyVariant variant = TopologyVariant::NoBreak;

    std::vector<BottomHmm> bottoms;
    std::vector<double> log_top_init;  // pi_i

    // Banded neighbor transitions, log a^(nbh)_{j,j+k} for k = 0,1,2.
    std::vector<std::array<double, 3>> log_band;
    // Stop/resume factorization (NoBreak and Break variants).
    std::vector<double> log_stop;    // s_j
    std::vector<double> log_resume;  // r_i
    // Baseline variant only: dense log a_{j,i}, row-major.
    std::vector<double> log_top_dense;

    // Break state (variant == Break): single bottom state with a self-loop.
    double log_break_self = kLogZero;
    double log_break_exit = kLogZero;

    double log_skip2 = kLogZero;     // a_{i,i+2}
    double log_self_top = kLogZero;  // a_{i,i}

    std::vector<int> pitches;  // per-event emission binding
    double hop_s = 0.020;

    bool has_break() const { return variant == TopologyVariant::Break; }
    // Effective top transition a_{j,i} (events only), including the stop/
    // resume mass where the variant carries it.
    double log_top_trans(int j, int i) const;
};

// Inverts the geometric mean dwell: the self-loop probability for an event
// expected to last d frames. Events shorter than one frame get no self-loop
// at all.
double duration_to_self_loop(double d_frames);

// Builds the two-level model for a score. Throws std::invalid_argument when
// the configured masses are inconsistent (s >= 1, or no residual left for
// the forward transition).
PerformanceHmm build_performance_hmm(const Score& score, const ModelConfig& cfg);

inline bool in_nbh(int j, int i) { return i - j >= 0 && i - j <= 2; }

}  // namespace scofo
