#include <cmath>
#include <random>

#include <doctest.h>

#include "oracle.hpp"
#include "support.hpp"

#include "scofo/model.hpp"
#include "scofo/standard_hmm.hpp"

using namespace scofo;
using namespace scofo::testing;

namespace {

Score make_score(int n, double beats = 1.0) {
    Score s;
    s.tempo_bpm = 120.0;
    for (int i = 0; i < n; ++i) s.events.push_back({i, 60 + (i % 12), beats});
    return s;
}

double row_sum_linear(const StandardHmm& hmm, int src) {
    double sum = 0.0;
    for (int dst = 0; dst < hmm.n_states; ++dst) sum += std::exp(hmm.log_trans(src, dst));
    return sum;
}

}  // namespace

TEST_CASE("self-loop probability from expected duration") {
    CHECK(duration_to_self_loop(2.0) == doctest::Approx(0.5));
    CHECK(duration_to_self_loop(1.0) == 0.0);
    CHECK(duration_to_self_loop(0.4) == 0.0);
    CHECK(duration_to_self_loop(0.0) == 0.0);
    CHECK(duration_to_self_loop(10.0) == doctest::Approx(0.9));
}

TEST_CASE("self-loop/duration round trip over [0,1)") {
    for (int i = 0; i < 120; ++i) {
        const double a = i / 120.0;
        const double d = 1.0 / (1.0 - a);
        if (d <= 1.0) continue;
        CHECK(duration_to_self_loop(d) == doctest::Approx(a).epsilon(1e-12));
    }
}

TEST_CASE("build with default parameters") {
    ModelConfig cfg;
    CHECK(cfg.a_skip2 == 1e-50);
    CHECK(cfg.a_self_top == 0.0);
    CHECK(cfg.a_pause_self == 0.999);
    CHECK(cfg.a_pause_entry == 1e-100);
    CHECK(cfg.a_break_self == 0.996);

    cfg.variant = TopologyVariant::Break;
    const PerformanceHmm hmm = build_performance_hmm(make_score(5), cfg);
    CHECK(hmm.n_events == 5);
    CHECK(hmm.L == 1);
    // uniform resume: r_i = 1/5
    for (int i = 0; i < 5; ++i)
        CHECK(std::exp(hmm.log_resume[static_cast<std::size_t>(i)]) ==
              doctest::Approx(0.2).epsilon(1e-12));
    CHECK(std::exp(hmm.log_break_self) == doctest::Approx(0.996));
    // one-beat events at 120 bpm and 20 ms hop: d = 25 frames
    CHECK(std::exp(hmm.bottoms[0].log_a[0][0]) == doctest::Approx(1.0 - 1.0 / 25.0));
}

TEST_CASE("zero stop mass leaves the band row summing to one") {
    ModelConfig cfg;
    cfg.variant = TopologyVariant::NoBreak;
    cfg.log10_s = kLogZero;  // s = 0
    const PerformanceHmm hmm = build_performance_hmm(make_score(6), cfg);
    for (int j = 0; j < 6; ++j) {
        double sum = 0.0;
        for (int k = 0; k <= 2; ++k)
            sum += std::exp(hmm.log_band[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)]);
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("inconsistent masses are rejected") {
    ModelConfig cfg;
    cfg.log10_s = -0.0001;  // s just below 1
    cfg.a_self_top = 0.5;
    cfg.a_skip2 = 0.5;
    CHECK_THROWS_AS(build_performance_hmm(make_score(4), cfg), std::invalid_argument);
    ModelConfig bad;
    bad.log10_s = 0.0;  // s = 1
    CHECK_THROWS_AS(build_performance_hmm(make_score(4), bad), std::invalid_argument);
}

TEST_CASE("neighbor band is exactly {j : 0 <= i-j <= 2}") {
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            CHECK(in_nbh(j, i) == (i - j >= 0 && i - j <= 2));
}

TEST_CASE("top rows are stochastic for every variant") {
    std::mt19937_64 rng(3);
    for (auto variant : {TopologyVariant::Baseline, TopologyVariant::NoBreak,
                         TopologyVariant::Break}) {
        for (int rep = 0; rep < 40; ++rep) {
            const int n = 2 + static_cast<int>(rng() % 12);
            const PerformanceHmm hmm = random_perf_hmm(rng, n, 1, variant);
            for (int j = 0; j < n; ++j) {
                double sum = 0.0;
                for (int i = 0; i < n; ++i) sum += std::exp(hmm.log_top_trans(j, i));
                if (variant == TopologyVariant::Break)
                    sum += std::exp(hmm.log_stop[static_cast<std::size_t>(j)]);
                CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("band rows carry exactly the non-stop mass and resume sums to one") {
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 50; ++rep) {
        const int n = 2 + static_cast<int>(rng() % 10);
        const PerformanceHmm hmm = random_perf_hmm(rng, n, 1, TopologyVariant::NoBreak);
        for (int j = 0; j < n; ++j) {
            double band = 0.0;
            for (int k = 0; k <= 2; ++k)
                band += std::exp(hmm.log_band[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)]);
            const double s = std::exp(hmm.log_stop[static_cast<std::size_t>(j)]);
            CHECK(band == doctest::Approx(1.0 - s).epsilon(1e-12));
        }
        double rsum = 0.0;
        for (double r : hmm.log_resume) rsum += std::exp(r);
        CHECK(rsum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("bottom rows are stochastic including the exit mass") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 100; ++rep) {
        const int L = 1 + static_cast<int>(rng() % 2);
        const PerformanceHmm hmm =
            random_perf_hmm(rng, 3, L, TopologyVariant::NoBreak);
        for (const BottomHmm& b : hmm.bottoms)
            for (int l = 0; l < L; ++l) {
                double sum = std::exp(b.log_exit[static_cast<std::size_t>(l)]);
                for (int lp = 0; lp < L; ++lp)
                    sum += std::exp(b.log_a[static_cast<std::size_t>(l)][static_cast<std::size_t>(lp)]);
                CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
            }
        // pause state never starts an event and never returns to sustain
        if (L == 2)
            for (const BottomHmm& b : hmm.bottoms) {
                CHECK(b.log_init[1] == kLogZero);
                CHECK(b.log_a[1][0] == kLogZero);
            }
    }
}

TEST_CASE("flattened self transition with no top self-loop is the bottom self-loop") {
    ModelConfig cfg;
    cfg.variant = TopologyVariant::NoBreak;
    cfg.a_self_top = 0.0;
    cfg.log10_s = kLogZero;
    const PerformanceHmm hmm = build_performance_hmm(make_score(3), cfg);
    const StandardHmm flat = flatten(hmm);
    for (int i = 0; i < 2; ++i)
        CHECK(flat.log_trans(flat.state_index(i, 0), flat.state_index(i, 0)) ==
              doctest::Approx(hmm.bottoms[static_cast<std::size_t>(i)].log_a[0][0])
                  .epsilon(1e-12));
    // the final event has no successor; its top self-transition absorbs the
    // whole row, so the flattened self-loop is a00 + e * 1 = 1
    CHECK(flat.log_trans(flat.state_index(2, 0), flat.state_index(2, 0)) ==
          doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
}

TEST_CASE("out-of-band entries factor as exit * stop * resume * init") {
    std::mt19937_64 rng(9);
    const PerformanceHmm hmm = random_perf_hmm(rng, 8, 1, TopologyVariant::NoBreak);
    const StandardHmm flat = flatten(hmm);
    for (int j = 0; j < 8; ++j)
        for (int i = 0; i < 8; ++i) {
            if (in_nbh(j, i)) continue;
            const double expected = hmm.bottoms[static_cast<std::size_t>(j)].log_exit[0] +
                                    hmm.log_stop[static_cast<std::size_t>(j)] +
                                    hmm.log_resume[static_cast<std::size_t>(i)] +
                                    hmm.bottoms[static_cast<std::size_t>(i)].log_init[0];
            CHECK(flat.log_trans(j, i) == doctest::Approx(expected).epsilon(1e-12));
        }
}

TEST_CASE("structured accessor equals the dense expansion") {
    std::mt19937_64 rng(17);
    for (auto variant : {TopologyVariant::Baseline, TopologyVariant::NoBreak,
                         TopologyVariant::Break}) {
        for (int rep = 0; rep < 27; ++rep) {
            // sizes span the whole checked range, including N = 50
            const int n = rep < 25 ? 1 + static_cast<int>(rng() % 12) : 25 * (rep - 24);
            const int L = 1 + static_cast<int>(rng() % 2);
            const PerformanceHmm hmm = random_perf_hmm(rng, n, L, variant);
            const StandardHmm flat = flatten(hmm);
            const DenseHmm dense = materialize_dense(hmm);
            REQUIRE(flat.n_states == dense.n_states);
            for (int src = 0; src < flat.n_states; ++src)
                for (int dst = 0; dst < flat.n_states; ++dst) {
                    const double a = flat.log_trans(src, dst);
                    const double b = dense.at(src, dst);
                    CHECK(std::abs(std::exp(a) - std::exp(b)) <= 1e-12);
                    if (a != kLogZero && b != kLogZero && a > -700.0)
                        CHECK(a == doctest::Approx(b).epsilon(1e-9));
                    else
                        CHECK((a == kLogZero) == (b == kLogZero));
                }
            for (int s = 0; s < flat.n_states; ++s)
                CHECK(flat.log_init[static_cast<std::size_t>(s)] ==
                      dense.log_init[static_cast<std::size_t>(s)]);
        }
    }
}

TEST_CASE("flattened rows stay stochastic at scale N <= 50") {
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 10; ++rep) {
        const int n = 5 + static_cast<int>(rng() % 46);
        const int L = 1 + static_cast<int>(rng() % 2);
        const auto variant =
            rep % 2 == 0 ? TopologyVariant::NoBreak : TopologyVariant::Break;
        const StandardHmm flat = flatten(random_perf_hmm(rng, n, L, variant));
        for (int src = 0; src < flat.n_states; ++src)
            CHECK(row_sum_linear(flat, src) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("model config JSON honours the documented keys") {
    const ModelConfig cfg = model_config_from_json(R"({
        "hop_s": 0.01, "frame_s": 0.064, "variant": "nobreak",
        "log10_s": -42, "pause_states": true,
        "a_skip2": 1e-30, "a_self_top": 1e-10,
        "a_pause_self": 0.99, "a_pause_entry": 1e-60, "a_break_self": 0.9
    })");
    CHECK(cfg.hop_s == 0.01);
    CHECK(cfg.frame_s == 0.064);
    CHECK(cfg.variant == TopologyVariant::NoBreak);
    CHECK(cfg.log10_s == -42.0);
    CHECK(cfg.pause_states);
    CHECK(cfg.a_skip2 == 1e-30);
    CHECK(cfg.a_self_top == 1e-10);
    CHECK(cfg.a_pause_self == 0.99);
    CHECK(cfg.a_pause_entry == 1e-60);
    CHECK(cfg.a_break_self == 0.9);

    // round trip, including s = 0 spelled as null
    ModelConfig zero;
    zero.log10_s = kLogZero;
    const ModelConfig back = model_config_from_json(model_config_to_json(zero));
    CHECK(std::isinf(back.log10_s));
}

TEST_CASE("pause states double the flattened state count") {
    ModelConfig cfg;
    cfg.pause_states = true;
    cfg.variant = TopologyVariant::Break;
    const StandardHmm flat = flatten(build_performance_hmm(make_score(4), cfg));
    CHECK(flat.L == 2);
    CHECK(flat.n_states == 4 * 2 + 1);
    CHECK(flat.has_break);
    CHECK(flat.break_state() == 8);
}
