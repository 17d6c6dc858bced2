#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "scofo/emission.hpp"
#include "scofo/standard_hmm.hpp"

namespace scofo {

enum class Algorithm { Baseline, NoBreak, Break };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

// Log-domain forward variables after frame t.
struct ForwardState {
    std::vector<double> log_alpha;
    int t = 0;
    // log sum_{j,l'} alpha * e * s, cached by the factorized kernels.
    double cached_pool = std::numeric_limits<double>::quiet_NaN();
};

struct PositionEstimate {
    int event = 0;
    int bottom = 0;
    int frame = 0;
    double log_posterior_gap = 0.0;  // argmax log alpha minus runner-up
    bool suspended = false;          // argmax sat on the break state
};

struct AlignmentTrace {
    double hop_s = 0.020;
    std::vector<PositionEstimate> frames;
    std::vector<int> first_frame;  // per event; -1 if never estimated
    std::vector<double> frame_total_s;   // per-frame wall time
    std::vector<double> frame_kernel_s;  // forward-update portion

    double frame_time(int t) const { return t * hop_s; }
};

// t = 0 branch: log alpha = log b~ + log pi~.
ForwardState forward_init(const StandardHmm& hmm, std::span<const double> log_b);

// Reference O((LN)^2) sweep over every source/destination pair, valid for
// any topology variant. The fast kernels are checked against it.
void forward_step_baseline(ForwardState& state, const StandardHmm& hmm,
                           std::span<const double> log_b, Exec exec = Exec::Serial);

// O(LN) update for the stop/resume factorized model: banded neighbor terms
// plus a pooled term shared by every destination. The out-of-band pool is
// the difference of two log-sums, evaluated on the linear-domain ratio with
// clamping so near-total cancellation degrades to -inf instead of NaN.
void forward_step_nobreak(ForwardState& state, const StandardHmm& hmm,
                          std::span<const double> log_b, Exec exec = Exec::Serial);

// O(LN) update for the break-state model: each event state pulls from at
// most 3 neighbor events plus the break state; the break state pools over
// all sources once.
void forward_step_break(ForwardState& state, const StandardHmm& hmm,
                        std::span<const double> log_b, Exec exec = Exec::Serial);

void forward_step(ForwardState& state, const StandardHmm& hmm,
                  std::span<const double> log_b, Algorithm algorithm,
                  Exec exec = Exec::Serial);

// MAP readout. Ties break toward the lowest event, then the lowest bottom
// state. When the argmax is the break state the estimate is flagged
// suspended and reports last_event (the caller's most recent non-break
// estimate), falling back to the best non-break state.
PositionEstimate estimate_position(const ForwardState& state, const StandardHmm& hmm,
                                   int last_event = -1);

// Streaming follower. Single-writer: frames must be pushed by one logical
// thread at a time, but the instance may migrate between threads between
// pushes. Distinct followers are independent.
class Follower {
public:
    Follower(const StandardHmm& hmm, const EmissionTable& emissions,
             Algorithm algorithm, Exec exec = Exec::Serial);

    PositionEstimate push(const FeatureFrame& frame);
    const AlignmentTrace& trace() const { return trace_; }
    const ForwardState& state() const { return state_; }
    int frames_seen() const { return frames_seen_; }

private:
    const StandardHmm* hmm_;
    const EmissionTable* emissions_;
    Algorithm algorithm_;
    Exec exec_;
    ForwardState state_;
    AlignmentTrace trace_;
    std::vector<double> log_b_;
    int frames_seen_ = 0;
    int last_event_ = -1;
};

// Runs init + step over an ordered frame sequence. Throws on an empty
// stream.
AlignmentTrace follow(const StandardHmm& hmm, const EmissionTable& emissions,
                      std::span<const FeatureFrame> frames, Algorithm algorithm,
                      Exec exec = Exec::Serial);

}  // namespace scofo
