// Shared generators for the property tests and the acceptance suite.
#pragma once

#include <random>
#include <vector>

#include "scofo/model.hpp"
#include "scofo/score.hpp"
#include "scofo/standard_hmm.hpp"

namespace scofo::testing {

struct HmmGenOptions {
    bool random_init = true;   // otherwise pi_0 = 1
    double max_stop = 0.2;     // s_j drawn from [0, max_stop]
    bool zero_stop = false;    // force s_j = 0
};

// Random but valid two-level model: row-stochastic bottoms, banded rows
// with positive residual, normalized resume distribution.
inline PerformanceHmm random_perf_hmm(std::mt19937_64& rng, int n_events, int L,
                                      TopologyVariant variant,
                                      const HmmGenOptions& opts = {}) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    PerformanceHmm hmm;
    hmm.n_events = n_events;
    hmm.L = L;
    hmm.variant = variant;
    hmm.hop_s = 0.020;

    for (int i = 0; i < n_events; ++i) {
        BottomHmm b;
        b.L = L;
        const double a00 = 0.9 * uni(rng);
        if (L == 2) {
            const double a01 = (1.0 - a00) * 0.5 * uni(rng);
            const double a11 = 0.95 * uni(rng);
            b.log_a[0][0] = std::log(a00);
            b.log_a[0][1] = std::log(a01);
            b.log_a[1][0] = kLogZero;
            b.log_a[1][1] = std::log(a11);
            b.log_exit[0] = std::log(1.0 - a00 - a01);
            b.log_exit[1] = std::log(1.0 - a11);
            b.log_init[0] = 0.0;
            b.log_init[1] = kLogZero;
        } else {
            b.log_a[0][0] = std::log(a00);
            b.log_exit[0] = std::log(1.0 - a00);
            b.log_init[0] = 0.0;
        }
        hmm.bottoms.push_back(b);
        hmm.pitches.push_back(kPitchMin + static_cast<int>(uni(rng) * 87.0));
    }

    std::vector<double> stop(static_cast<std::size_t>(n_events));
    for (double& s : stop) s = opts.zero_stop ? 0.0 : opts.max_stop * uni(rng);

    hmm.log_band.assign(static_cast<std::size_t>(n_events), {kLogZero, kLogZero, kLogZero});
    for (int j = 0; j < n_events; ++j) {
        auto& row = hmm.log_band[static_cast<std::size_t>(j)];
        const double s = stop[static_cast<std::size_t>(j)];
        if (j + 1 >= n_events) {
            row[0] = std::log(1.0 - s);
            continue;
        }
        const double self = 0.2 * (1.0 - s) * uni(rng);
        const double skip2 = j + 2 < n_events ? 0.2 * (1.0 - s) * uni(rng) : 0.0;
        row[0] = std::log(self);
        row[1] = std::log(1.0 - s - self - skip2);
        if (j + 2 < n_events) row[2] = std::log(skip2);
    }

    hmm.log_stop.resize(static_cast<std::size_t>(n_events));
    for (int j = 0; j < n_events; ++j)
        hmm.log_stop[static_cast<std::size_t>(j)] =
            stop[static_cast<std::size_t>(j)] == 0.0
                ? kLogZero
                : std::log(stop[static_cast<std::size_t>(j)]);

    std::vector<double> resume(static_cast<std::size_t>(n_events));
    double rsum = 0.0;
    for (double& r : resume) {
        r = 0.05 + uni(rng);
        rsum += r;
    }
    hmm.log_resume.resize(static_cast<std::size_t>(n_events));
    for (int i = 0; i < n_events; ++i)
        hmm.log_resume[static_cast<std::size_t>(i)] =
            std::log(resume[static_cast<std::size_t>(i)] / rsum);

    hmm.log_top_init.assign(static_cast<std::size_t>(n_events), kLogZero);
    if (opts.random_init) {
        std::vector<double> init(static_cast<std::size_t>(n_events));
        double isum = 0.0;
        for (double& p : init) {
            p = 0.05 + uni(rng);
            isum += p;
        }
        for (int i = 0; i < n_events; ++i)
            hmm.log_top_init[static_cast<std::size_t>(i)] =
                std::log(init[static_cast<std::size_t>(i)] / isum);
    } else {
        hmm.log_top_init[0] = 0.0;
    }

    if (variant == TopologyVariant::Break) {
        const double a_break = 0.9 + 0.09 * uni(rng);
        hmm.log_break_self = std::log(a_break);
        hmm.log_break_exit = std::log(1.0 - a_break);
    }
    if (variant == TopologyVariant::Baseline) {
        const int n = n_events;
        hmm.log_top_dense.assign(static_cast<std::size_t>(n) * n, kLogZero);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                double banded = kLogZero;
                if (in_nbh(j, i)) banded = hmm.log_band[static_cast<std::size_t>(j)][i - j];
                hmm.log_top_dense[static_cast<std::size_t>(j) * n + i] =
                    log_add(banded, hmm.log_stop[static_cast<std::size_t>(j)] +
                                        hmm.log_resume[static_cast<std::size_t>(i)]);
            }
    }
    return hmm;
}

inline std::vector<double> random_log_emissions(std::mt19937_64& rng, int n_states) {
    std::uniform_real_distribution<double> uni(-25.0, 5.0);
    std::vector<double> log_b(static_cast<std::size_t>(n_states));
    for (double& v : log_b) v = uni(rng);
    return log_b;
}

inline Score random_score(std::mt19937_64& rng, int n_events, double rest_fraction = 0.0) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Score score;
    score.tempo_bpm = 120.0;
    int prev = -1;
    for (int i = 0; i < n_events; ++i) {
        int pitch;
        if (uni(rng) < rest_fraction && prev != kRestPitch) {
            pitch = kRestPitch;
        } else {
            pitch = 40 + static_cast<int>(uni(rng) * 50.0);
            while (pitch == prev) pitch = 40 + static_cast<int>(uni(rng) * 50.0);
        }
        prev = pitch;
        const double beats = uni(rng) < 0.5 ? 0.5 : 1.0;
        score.events.push_back({i, pitch, beats});
    }
    return score;
}

}  // namespace scofo::testing
