#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "scofo/emission.hpp"
#include "scofo/score.hpp"

namespace scofo {

// Practice-style error rates per event.
struct ErrorRates {
    double p_delete = 0.0034;
    double p_insert = 0.0245;
    double p_sub_semitone = 0.0145;
    double p_sub_wholetone = 0.0224;
    double p_sub_perfect12 = 0.0047;

    static ErrorRates none() { return {0, 0, 0, 0, 0}; }
};

enum class NoteKind { Correct, Substitution, Insertion, Pause, Break };

struct PerformedNote {
    int score_event = -1;  // -1 for inserted notes and breaks
    int played_pitch = kRestPitch;
    double start_s = 0.0;
    double end_s = 0.0;
    NoteKind kind = NoteKind::Correct;
};

struct Jump {
    double time_s = 0.0;  // resumption instant (end of the silent break)
    int from_event = 0;
    int to_event = 0;
};

// Per-frame truth labels plus the repeat/skip list. Frames inside silent
// breaks and inserted notes carry markers instead of event indices.
struct GroundTruth {
    static constexpr int kBreakMarker = -2;
    static constexpr int kInsertedMarker = -3;

    double hop_s = 0.020;
    std::vector<int> frame_event;
    std::vector<Jump> jumps;
};

struct JumpConfig {
    double p_jump = 0.1;
    double min_break_s = 0.5;
    double max_break_s = 30.0;
    bool force_at_least_one = true;
    int max_jumps = 4;  // keeps the walk finite when back-jumps re-trigger
};

// Realizes a performance of the score with randomly injected deletion,
// insertion and substitution errors. Rests pass through untouched.
std::vector<PerformedNote> inject_errors(const Score& score, const ErrorRates& rates,
                                         std::uint64_t seed);

// Inserts repeats/skips: at note boundaries, with probability p_jump, the
// walk stops, a silent break of U(min,max) seconds is inserted, and play
// resumes from a uniformly random score position. Only transitions outside
// the neighbor band are recorded as repeats/skips. Timestamps are re-laid
// sequentially. Throws std::invalid_argument when the performance cannot
// host a jump.
std::pair<std::vector<PerformedNote>, GroundTruth> inject_repeats_skips(
    const std::vector<PerformedNote>& perf, const JumpConfig& cfg,
    std::uint64_t seed);

// Samples one feature frame per hop from the Gaussian of the sounding pitch
// (silence during rests and breaks), projected back onto the simplex, and
// labels each frame with the covering note. `truth` supplies the jump list
// and receives the frame labels.
std::vector<FeatureFrame> render_features(const std::vector<PerformedNote>& perf,
                                          const PitchModelSet& models, double hop_s,
                                          std::uint64_t seed, GroundTruth& truth);

// Convenience overload for jump-free performances.
std::pair<std::vector<FeatureFrame>, GroundTruth> render_features(
    const std::vector<PerformedNote>& perf, const PitchModelSet& models,
    double hop_s, std::uint64_t seed);

// Additive synthesis at 16 kHz: 8 partials with amplitude ratio 0.6,
// seeded random phases, 10 ms attack/release ramps, silence for rests and
// breaks.
std::vector<float> render_audio(const std::vector<PerformedNote>& perf,
                                std::uint64_t seed, int sample_rate = 16000);

}  // namespace scofo
