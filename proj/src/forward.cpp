#include "scofo/forward.hpp"

#include <chrono>
#include <stdexcept>

#include "scofo/common.hpp"

namespace scofo {

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::Baseline: return "baseline";
        case Algorithm::NoBreak: return "nobreak";
        case Algorithm::Break: return "break";
    }
    return "?";
}

Algorithm algorithm_from_string(const std::string& s) {
    if (s == "baseline") return Algorithm::Baseline;
    if (s == "nobreak") return Algorithm::NoBreak;
    if (s == "break") return Algorithm::Break;
    throw parse_error("unknown algorithm '" + s + "'");
}

PositionEstimate estimate_position(const ForwardState& state, const StandardHmm& hmm,
                                   int last_event) {
    const int K = hmm.n_states;
    double best = kLogZero;
    double runner = kLogZero;
    int best_idx = -1;
    double best_event_val = kLogZero;
    int best_event_idx = -1;
    for (int s = 0; s < K; ++s) {
        const double v = state.log_alpha[static_cast<std::size_t>(s)];
        if (v == kLogZero) continue;
        if (v > best) {
            runner = best;
            best = v;
            best_idx = s;
        } else if (v > runner) {
            runner = v;
        }
        if (s != hmm.break_state() && v > best_event_val) {
            best_event_val = v;
            best_event_idx = s;
        }
    }
    if (best_idx < 0)
        throw std::runtime_error("estimate_position: all forward variables are zero");

    PositionEstimate est;
    est.frame = state.t;
    est.log_posterior_gap = best - runner;  // +inf when only one state is live
    if (best_idx == hmm.break_state()) {
        est.suspended = true;
        if (last_event >= 0) {
            est.event = last_event;
            est.bottom = 0;
        } else if (best_event_idx >= 0) {
            est.event = hmm.event_of(best_event_idx);
            est.bottom = hmm.bottom_of(best_event_idx);
        } else {
            est.event = 0;
            est.bottom = 0;
        }
    } else {
        est.event = hmm.event_of(best_idx);
        est.bottom = hmm.bottom_of(best_idx);
    }
    return est;
}

Follower::Follower(const StandardHmm& hmm, const EmissionTable& emissions,
                   Algorithm algorithm, Exec exec)
    : hmm_(&hmm), emissions_(&emissions), algorithm_(algorithm), exec_(exec) {
    if (algorithm == Algorithm::NoBreak && hmm.variant != TopologyVariant::NoBreak)
        throw std::invalid_argument("nobreak algorithm needs the nobreak model variant");
    if (algorithm == Algorithm::Break && hmm.variant != TopologyVariant::Break)
        throw std::invalid_argument("break algorithm needs the break model variant");
    trace_.hop_s = hmm.hop_s;
    trace_.first_frame.assign(static_cast<std::size_t>(hmm.n_events), -1);
}

PositionEstimate Follower::push(const FeatureFrame& frame) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    emissions_->eval_states(frame, *hmm_, log_b_);
    const auto t1 = clock::now();
    if (frames_seen_ == 0)
        state_ = forward_init(*hmm_, log_b_);
    else
        forward_step(state_, *hmm_, log_b_, algorithm_, exec_);
    ++frames_seen_;

    PositionEstimate est = estimate_position(state_, *hmm_, last_event_);
    if (!est.suspended) last_event_ = est.event;

    // Rebase so the magnitudes stay small over long streams. A uniform
    // shift leaves the argmax and the gap untouched.
    double m = kLogZero;
    for (double v : state_.log_alpha) m = std::max(m, v);
    if (m != kLogZero)
        for (double& v : state_.log_alpha) v -= m;
    const auto t2 = clock::now();

    if (est.event >= 0 && est.event < hmm_->n_events &&
        trace_.first_frame[static_cast<std::size_t>(est.event)] < 0)
        trace_.first_frame[static_cast<std::size_t>(est.event)] = est.frame;
    trace_.frames.push_back(est);
    trace_.frame_kernel_s.push_back(std::chrono::duration<double>(t2 - t1).count());
    trace_.frame_total_s.push_back(std::chrono::duration<double>(t2 - t0).count());
    return est;
}

AlignmentTrace follow(const StandardHmm& hmm, const EmissionTable& emissions,
                      std::span<const FeatureFrame> frames, Algorithm algorithm,
                      Exec exec) {
    if (frames.empty()) throw std::invalid_argument("follow: empty feature stream");
    Follower follower(hmm, emissions, algorithm, exec);
    for (const FeatureFrame& f : frames) follower.push(f);
    return follower.trace();
}

}  // namespace scofo
