#pragma once

#include <span>
#include <vector>

#include "scofo/forward.hpp"
#include "scofo/simulate.hpp"

namespace scofo {

// Piecewise precision rate: fraction of true-event onsets whose first
// report in the +/- delta window lands inside it.
struct PprResult {
    double rate = 0.0;
    double delta_ms = 300.0;
    std::vector<double> per_piece;
    int detected = 0;
    int total = 0;
};

// Single piece. Throws std::invalid_argument when trace and truth disagree
// on the frame count.
PprResult ppr(const AlignmentTrace& trace, const GroundTruth& truth, double delta_ms);

// Unweighted mean of per-piece rates.
PprResult ppr_mean(std::span<const PprResult> pieces, double delta_ms);

struct RepeatSkipReport {
    int detected = 0;
    int total = 0;
    std::vector<double> following_times_s;  // one per detected jump
};

// A jump is detected iff some frame between its resumption and the next
// jump (or stream end) estimates exactly the true event; the following time
// is that first frame's offset from the resumption.
RepeatSkipReport repeat_skip_report(const AlignmentTrace& trace,
                                    const GroundTruth& truth);

double median(std::vector<double> xs);

}  // namespace scofo
