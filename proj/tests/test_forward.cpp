#include <cmath>
#include <random>

#include <doctest.h>

#include "oracle.hpp"
#include "support.hpp"

#include "scofo/forward.hpp"

using namespace scofo;
using namespace scofo::testing;

namespace {

std::vector<double> uniform_emissions(int n_states, double value = 0.0) {
    return std::vector<double>(static_cast<std::size_t>(n_states), value);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == kLogZero && b[i] == kLogZero) continue;
        worst = std::max(worst, std::abs(a[i] - b[i]));
    }
    return worst;
}

}  // namespace

TEST_CASE("init puts mass only where the model can start") {
    std::mt19937_64 rng(61);
    HmmGenOptions opts;
    opts.random_init = false;  // pi_0 = 1
    const PerformanceHmm hmm = random_perf_hmm(rng, 5, 2, TopologyVariant::NoBreak, opts);
    const StandardHmm flat = flatten(hmm);
    const auto log_b = uniform_emissions(flat.n_states, -1.0);
    const ForwardState state = forward_init(flat, log_b);
    for (int s = 0; s < flat.n_states; ++s) {
        const bool live = state.log_alpha[static_cast<std::size_t>(s)] != kLogZero;
        CHECK(live == (s == flat.state_index(0, 0)));  // pause state has pi_1 = 0
    }
    CHECK(state.t == 0);
}

TEST_CASE("init with uniform start and identical emissions is symmetric") {
    std::mt19937_64 rng(67);
    PerformanceHmm hmm = random_perf_hmm(rng, 4, 1, TopologyVariant::NoBreak);
    for (auto& v : hmm.log_top_init) v = std::log(0.25);
    const StandardHmm flat = flatten(hmm);
    const ForwardState state = forward_init(flat, uniform_emissions(4, -2.0));
    for (int s = 1; s < 4; ++s)
        CHECK(state.log_alpha[static_cast<std::size_t>(s)] ==
              doctest::Approx(state.log_alpha[0]));
    CHECK_NOTHROW(estimate_position(state, flat));
}

TEST_CASE("baseline on a single state is a plain product") {
    std::mt19937_64 rng(71);
    const PerformanceHmm hmm = random_perf_hmm(rng, 1, 1, TopologyVariant::NoBreak);
    const StandardHmm flat = flatten(hmm);
    const auto log_b = uniform_emissions(1, -3.0);
    ForwardState state = forward_init(flat, log_b);
    const double a0 = state.log_alpha[0];
    forward_step_baseline(state, flat, log_b);
    CHECK(state.log_alpha[0] ==
          doctest::Approx(a0 + flat.log_trans(0, 0) - 3.0).epsilon(1e-12));
    CHECK(state.t == 1);
}

TEST_CASE("baseline equals the dense recursion on random models") {
    std::mt19937_64 rng(73);
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 2 + static_cast<int>(rng() % 9);
        const int L = 1 + static_cast<int>(rng() % 2);
        const auto variant = rep % 3 == 0   ? TopologyVariant::Baseline
                             : rep % 3 == 1 ? TopologyVariant::NoBreak
                                            : TopologyVariant::Break;
        const PerformanceHmm hmm = random_perf_hmm(rng, n, L, variant);
        const StandardHmm flat = flatten(hmm);
        const DenseHmm dense = materialize_dense(hmm);

        auto log_b = random_log_emissions(rng, flat.n_states);
        ForwardState state = forward_init(flat, log_b);
        std::vector<double> oracle = dense_forward_init(dense, log_b);
        CHECK(max_abs_diff(state.log_alpha, oracle) <= 1e-9);
        for (int t = 1; t <= 5; ++t) {
            log_b = random_log_emissions(rng, flat.n_states);
            forward_step_baseline(state, flat, log_b);
            oracle = dense_forward_step(dense, oracle, log_b);
            CHECK(max_abs_diff(state.log_alpha, oracle) <= 1e-9);
        }
    }
}

TEST_CASE("a one-hot chain advances one event per frame") {
    // e = 1 per event (no dwell), next-event transition takes all the mass.
    PerformanceHmm hmm;
    hmm.n_events = 4;
    hmm.L = 1;
    hmm.variant = TopologyVariant::NoBreak;
    for (int i = 0; i < 4; ++i) {
        BottomHmm b;
        b.L = 1;
        b.log_a[0][0] = kLogZero;
        b.log_exit[0] = 0.0;
        b.log_init[0] = 0.0;
        hmm.bottoms.push_back(b);
        hmm.pitches.push_back(60 + i);
    }
    hmm.log_band.assign(4, {kLogZero, kLogZero, kLogZero});
    for (int j = 0; j < 3; ++j) hmm.log_band[static_cast<std::size_t>(j)][1] = 0.0;
    hmm.log_band[3][0] = 0.0;  // final event holds
    hmm.log_stop.assign(4, kLogZero);
    hmm.log_resume.assign(4, std::log(0.25));
    hmm.log_top_init.assign(4, kLogZero);
    hmm.log_top_init[0] = 0.0;
    const StandardHmm flat = flatten(hmm);

    const auto log_b = uniform_emissions(4, 0.0);
    ForwardState state = forward_init(flat, log_b);
    CHECK(estimate_position(state, flat).event == 0);
    for (int t = 1; t < 4; ++t) {
        forward_step_baseline(state, flat, log_b);
        CHECK(estimate_position(state, flat).event == t);
    }
}

TEST_CASE("nobreak with zero stop mass equals the banded baseline") {
    std::mt19937_64 rng(79);
    HmmGenOptions opts;
    opts.zero_stop = true;
    const PerformanceHmm hmm = random_perf_hmm(rng, 7, 2, TopologyVariant::NoBreak, opts);
    const StandardHmm flat = flatten(hmm);

    auto log_b = random_log_emissions(rng, flat.n_states);
    ForwardState fast = forward_init(flat, log_b);
    ForwardState slow = fast;
    for (int t = 1; t <= 30; ++t) {
        log_b = random_log_emissions(rng, flat.n_states);
        forward_step_nobreak(fast, flat, log_b);
        forward_step_baseline(slow, flat, log_b);
        CHECK(max_abs_diff(fast.log_alpha, slow.log_alpha) <= 1e-12);
        CHECK(fast.cached_pool == kLogZero);  // nothing pooled when s = 0
    }
}

TEST_CASE("nobreak matches the baseline oracle at depth") {
    std::mt19937_64 rng(83);
    for (int rep = 0; rep < 10; ++rep) {
        const int L = 1 + rep % 2;
        const PerformanceHmm hmm = random_perf_hmm(rng, 30, L, TopologyVariant::NoBreak);
        const StandardHmm flat = flatten(hmm);
        auto log_b = random_log_emissions(rng, flat.n_states);
        ForwardState fast = forward_init(flat, log_b);
        ForwardState slow = fast;
        for (int t = 1; t <= 50; ++t) {
            log_b = random_log_emissions(rng, flat.n_states);
            forward_step_nobreak(fast, flat, log_b);
            forward_step_baseline(slow, flat, log_b);
            CHECK(max_abs_diff(fast.log_alpha, slow.log_alpha) <= 1e-9);
        }
    }
}

TEST_CASE("kernels agree with the oracle at sub-underflow stop probabilities") {
    // s = 1e-100: the pooled out-of-band mass is ~230 logs below the band,
    // the worst case for the pooled-difference cancellation.
    std::mt19937_64 rng(131);
    for (auto variant : {TopologyVariant::NoBreak, TopologyVariant::Break}) {
        PerformanceHmm hmm = random_perf_hmm(rng, 30, 1, variant);
        const double log_s = -100.0 * std::log(10.0);
        for (double& v : hmm.log_stop) v = log_s;
        // rebuild the band rows so they absorb the whole row again
        for (int j = 0; j < hmm.n_events; ++j) {
            auto& row = hmm.log_band[static_cast<std::size_t>(j)];
            if (j + 1 >= hmm.n_events) {
                row = {std::log1p(-1e-100), kLogZero, kLogZero};
                continue;
            }
            const double skip2 = j + 2 < hmm.n_events ? 0.05 : 0.0;
            row[0] = std::log(0.1);
            row[1] = std::log(1.0 - 1e-100 - 0.1 - skip2);
            row[2] = skip2 > 0.0 ? std::log(skip2) : kLogZero;
        }
        const StandardHmm flat = flatten(hmm);
        auto log_b = random_log_emissions(rng, flat.n_states);
        ForwardState fast = forward_init(flat, log_b);
        ForwardState slow = fast;
        for (int t = 1; t <= 50; ++t) {
            log_b = random_log_emissions(rng, flat.n_states);
            if (variant == TopologyVariant::NoBreak)
                forward_step_nobreak(fast, flat, log_b);
            else
                forward_step_break(fast, flat, log_b);
            forward_step_baseline(slow, flat, log_b);
            for (std::size_t s = 0; s < fast.log_alpha.size(); ++s) {
                if (fast.log_alpha[s] == kLogZero && slow.log_alpha[s] == kLogZero)
                    continue;
                CHECK(std::abs(fast.log_alpha[s] - slow.log_alpha[s]) <= 1e-9);
            }
        }
    }
}

TEST_CASE("init rejects emission vectors of the wrong size") {
    std::mt19937_64 rng(137);
    const StandardHmm flat = flatten(random_perf_hmm(rng, 5, 1, TopologyVariant::NoBreak));
    const std::vector<double> wrong(3, 0.0);
    CHECK_THROWS_AS(forward_init(flat, wrong), std::invalid_argument);
}

TEST_CASE("pooled term on a three-event example matches hand arithmetic") {
    PerformanceHmm hmm;
    hmm.n_events = 3;
    hmm.L = 1;
    hmm.variant = TopologyVariant::NoBreak;
    for (int i = 0; i < 3; ++i) {
        BottomHmm b;
        b.L = 1;
        b.log_a[0][0] = std::log(0.5);  // e = 0.5
        b.log_exit[0] = std::log(0.5);
        b.log_init[0] = 0.0;
        hmm.bottoms.push_back(b);
        hmm.pitches.push_back(60 + i);
    }
    const double s = 0.1;
    hmm.log_band.assign(3, {kLogZero, kLogZero, kLogZero});
    hmm.log_band[0] = {kLogZero, std::log(1.0 - s), kLogZero};
    hmm.log_band[1] = {kLogZero, std::log(1.0 - s), kLogZero};
    hmm.log_band[2] = {std::log(1.0 - s), kLogZero, kLogZero};
    hmm.log_stop.assign(3, std::log(s));
    hmm.log_resume.assign(3, std::log(1.0 / 3.0));
    hmm.log_top_init.assign(3, std::log(1.0 / 3.0));
    const StandardHmm flat = flatten(hmm);

    const auto log_b = uniform_emissions(3, 0.0);
    ForwardState state = forward_init(flat, log_b);
    // alpha_0 = (1/3, 1/3, 1/3); pool = sum alpha * e * s = 3 * (1/3 * 0.05)
    forward_step_nobreak(state, flat, log_b);
    CHECK(state.cached_pool == doctest::Approx(std::log(0.05)).epsilon(1e-12));
}

TEST_CASE("break kernel matches the dense oracle including the break state") {
    std::mt19937_64 rng(89);
    for (int rep = 0; rep < 10; ++rep) {
        const int L = 1 + rep % 2;
        const PerformanceHmm hmm = random_perf_hmm(rng, 30, L, TopologyVariant::Break);
        const StandardHmm flat = flatten(hmm);
        const DenseHmm dense = materialize_dense(hmm);
        auto log_b = random_log_emissions(rng, flat.n_states);
        ForwardState fast = forward_init(flat, log_b);
        std::vector<double> oracle = dense_forward_init(dense, log_b);
        for (int t = 1; t <= 50; ++t) {
            log_b = random_log_emissions(rng, flat.n_states);
            forward_step_break(fast, flat, log_b);
            oracle = dense_forward_step(dense, oracle, log_b);
            CHECK(max_abs_diff(fast.log_alpha, oracle) <= 1e-9);
        }
    }
}

TEST_CASE("break state starves when s = 0") {
    std::mt19937_64 rng(97);
    HmmGenOptions opts;
    opts.zero_stop = true;
    opts.random_init = false;
    const PerformanceHmm hmm = random_perf_hmm(rng, 6, 1, TopologyVariant::Break, opts);
    const StandardHmm flat = flatten(hmm);
    auto log_b = random_log_emissions(rng, flat.n_states);
    ForwardState state = forward_init(flat, log_b);
    for (int t = 1; t <= 20; ++t) {
        log_b = random_log_emissions(rng, flat.n_states);
        forward_step_break(state, flat, log_b);
        CHECK(state.log_alpha[static_cast<std::size_t>(flat.break_state())] == kLogZero);
    }
}

TEST_CASE("sustained silence drives the argmax into the break state") {
    // Two-event break model; emissions favor silence (the break state) over
    // the pitched events by a wide margin after the first frame.
    std::mt19937_64 rng(101);
    HmmGenOptions opts;
    opts.random_init = false;
    opts.max_stop = 0.05;
    const PerformanceHmm hmm = random_perf_hmm(rng, 2, 1, TopologyVariant::Break, opts);
    const StandardHmm flat = flatten(hmm);
    std::vector<double> silence_b = {-40.0, -40.0, 0.0};
    const std::vector<double> start_b = {0.0, -5.0, -5.0};
    ForwardState state = forward_init(flat, start_b);
    int suspended_at = -1;
    int last_event = -1;
    for (int t = 1; t <= 30; ++t) {
        forward_step_break(state, flat, silence_b);
        const PositionEstimate est = estimate_position(state, flat, last_event);
        if (!est.suspended) last_event = est.event;
        if (est.suspended && suspended_at < 0) suspended_at = t;
    }
    CHECK(suspended_at > 0);
    // while suspended the estimate still reports the last pitched event
    const PositionEstimate est = estimate_position(state, flat, 0);
    CHECK(est.suspended);
    CHECK(est.event == 0);
}

TEST_CASE("argmax readout and tie breaking") {
    std::mt19937_64 rng(103);
    const PerformanceHmm hmm = random_perf_hmm(rng, 6, 1, TopologyVariant::NoBreak);
    const StandardHmm flat = flatten(hmm);
    ForwardState state;
    state.t = 3;
    state.log_alpha.assign(6, kLogZero);
    state.log_alpha[4] = -2.0;
    PositionEstimate est = estimate_position(state, flat);
    CHECK(est.event == 4);
    CHECK(est.frame == 3);
    CHECK(std::isinf(est.log_posterior_gap));

    // exact tie between events 2 and 5 resolves to event 2
    state.log_alpha.assign(6, kLogZero);
    state.log_alpha[2] = -1.0;
    state.log_alpha[5] = -1.0;
    est = estimate_position(state, flat);
    CHECK(est.event == 2);
    CHECK(est.log_posterior_gap == 0.0);

    state.log_alpha.assign(6, kLogZero);
    CHECK_THROWS_AS(estimate_position(state, flat), std::runtime_error);
}

TEST_CASE("confident three-event chain lands on the last event") {
    // Hand forward pass: one-hot transitions, emissions picking out event t
    // at frame t. After frames 0,1,2 the argmax must sit on event 2.
    PerformanceHmm hmm;
    hmm.n_events = 3;
    hmm.L = 1;
    hmm.variant = TopologyVariant::NoBreak;
    for (int i = 0; i < 3; ++i) {
        BottomHmm b;
        b.L = 1;
        b.log_a[0][0] = std::log(0.5);
        b.log_exit[0] = std::log(0.5);
        b.log_init[0] = 0.0;
        hmm.bottoms.push_back(b);
        hmm.pitches.push_back(60 + i);
    }
    hmm.log_band.assign(3, {kLogZero, kLogZero, kLogZero});
    hmm.log_band[0] = {kLogZero, 0.0, kLogZero};  // all exit mass to the next event
    hmm.log_band[1] = {kLogZero, 0.0, kLogZero};
    hmm.log_band[2] = {0.0, kLogZero, kLogZero};
    hmm.log_stop.assign(3, kLogZero);
    hmm.log_resume.assign(3, std::log(1.0 / 3.0));
    hmm.log_top_init.assign(3, kLogZero);
    hmm.log_top_init[0] = 0.0;
    const StandardHmm flat = flatten(hmm);

    const std::vector<double> b0 = {0.0, -20.0, -20.0};
    const std::vector<double> b1 = {-20.0, 0.0, -20.0};
    const std::vector<double> b2 = {-20.0, -20.0, 0.0};
    ForwardState state = forward_init(flat, b0);
    forward_step_baseline(state, flat, b1);
    forward_step_baseline(state, flat, b2);
    CHECK(estimate_position(state, flat).event == 2);
}

TEST_CASE("follow emits one estimate per frame and rejects empty streams") {
    const CqtConfig cfg;
    const PitchModelSet models = synth_model_set(cfg, 1e-4);
    Score score;
    score.tempo_bpm = 120.0;
    score.events = {{0, 60, 1.0}, {1, 64, 1.0}, {2, 67, 1.0}};
    ModelConfig mc;
    mc.variant = TopologyVariant::Break;
    const StandardHmm flat = flatten(build_performance_hmm(score, mc));
    const EmissionTable table(flat, models, -50.0);

    std::vector<FeatureFrame> frames;
    for (int i = 0; i < 3; ++i) {
        FeatureFrame f;
        f.t = i;
        f.time_s = i * 0.02;
        f.values = models.at(score.events[static_cast<std::size_t>(i)].pitch).mean;
        frames.push_back(std::move(f));
    }
    const AlignmentTrace trace = follow(flat, table, frames, Algorithm::Break);
    REQUIRE(trace.frames.size() == 3);
    for (int t = 0; t < 3; ++t) CHECK(trace.frames[static_cast<std::size_t>(t)].event == t);
    CHECK(trace.frame_total_s.size() == 3);
    CHECK(trace.first_frame[0] == 0);
    CHECK(trace.first_frame[1] == 1);
    CHECK(trace.first_frame[2] == 2);

    CHECK_THROWS_AS(follow(flat, table, std::vector<FeatureFrame>{}, Algorithm::Break),
                    std::invalid_argument);
}

TEST_CASE("kernels demand their own variant") {
    std::mt19937_64 rng(107);
    const StandardHmm nb = flatten(random_perf_hmm(rng, 4, 1, TopologyVariant::NoBreak));
    const StandardHmm bk = flatten(random_perf_hmm(rng, 4, 1, TopologyVariant::Break));
    ForwardState s1 = forward_init(nb, uniform_emissions(nb.n_states));
    ForwardState s2 = forward_init(bk, uniform_emissions(bk.n_states));
    CHECK_THROWS_AS(forward_step_break(s1, nb, uniform_emissions(nb.n_states)),
                    std::invalid_argument);
    CHECK_THROWS_AS(forward_step_nobreak(s2, bk, uniform_emissions(bk.n_states)),
                    std::invalid_argument);
}

TEST_CASE("parallel kernels are bit-identical to serial") {
    std::mt19937_64 rng(109);
    for (auto variant : {TopologyVariant::NoBreak, TopologyVariant::Break}) {
        const PerformanceHmm hmm = random_perf_hmm(rng, 40, 2, variant);
        const StandardHmm flat = flatten(hmm);
        auto log_b = random_log_emissions(rng, flat.n_states);
        ForwardState serial = forward_init(flat, log_b);
        ForwardState parallel = serial;
        for (int t = 1; t <= 20; ++t) {
            log_b = random_log_emissions(rng, flat.n_states);
            if (variant == TopologyVariant::NoBreak) {
                forward_step_nobreak(serial, flat, log_b, Exec::Serial);
                forward_step_nobreak(parallel, flat, log_b, Exec::Parallel);
            } else {
                forward_step_break(serial, flat, log_b, Exec::Serial);
                forward_step_break(parallel, flat, log_b, Exec::Parallel);
            }
            for (std::size_t s = 0; s < serial.log_alpha.size(); ++s)
                CHECK(serial.log_alpha[s] == parallel.log_alpha[s]);
        }
        // the baseline sweep too
        ForwardState bs = forward_init(flat, log_b);
        ForwardState bp = bs;
        forward_step_baseline(bs, flat, log_b, Exec::Serial);
        forward_step_baseline(bp, flat, log_b, Exec::Parallel);
        for (std::size_t s = 0; s < bs.log_alpha.size(); ++s)
            CHECK(bs.log_alpha[s] == bp.log_alpha[s]);
    }
}

TEST_CASE("exp-normalized forward variables stay a proper distribution") {
    std::mt19937_64 rng(127);
    const PerformanceHmm hmm = random_perf_hmm(rng, 12, 1, TopologyVariant::NoBreak);
    const StandardHmm flat = flatten(hmm);
    auto log_b = random_log_emissions(rng, flat.n_states);
    ForwardState state = forward_init(flat, log_b);
    for (int t = 1; t <= 40; ++t) {
        log_b = random_log_emissions(rng, flat.n_states);
        forward_step_nobreak(state, flat, log_b);
        CHECK(std::isfinite(log_sum_exp(state.log_alpha)));
    }
}
