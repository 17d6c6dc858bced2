#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "scofo/forward.hpp"
#include "scofo/logmath.hpp"

namespace scofo {

namespace {

void check_step_args(const ForwardState& state, const StandardHmm& hmm,
                     std::span<const double> log_b) {
    if (static_cast<int>(state.log_alpha.size()) != hmm.n_states)
        throw std::invalid_argument("forward step: state size does not match model");
    if (static_cast<int>(log_b.size()) != hmm.n_states)
        throw std::invalid_argument("forward step: emission vector size does not match model");
}

// Banded neighbor contribution for one destination state: at most 3*L
// sources, read from the precomputed in-band table.
inline double banded_term(const StandardHmm& hmm, const std::vector<double>& alpha,
                          int dst) {
    const int L = hmm.L;
    const int i = dst / L;
    const int l = dst % L;
    LogSum acc;
    for (int k = 0; k <= 2; ++k) {
        const int j = i - k;
        if (j < 0) break;
        for (int lp = 0; lp < L; ++lp) {
            const double a = alpha[static_cast<std::size_t>(j * L + lp)];
            if (a == kLogZero) continue;
            acc.add(a + hmm.log_band[hmm.band_index(i, k, lp, l)]);
        }
    }
    return acc.value();
}

}  // namespace

ForwardState forward_init(const StandardHmm& hmm, std::span<const double> log_b) {
    if (static_cast<int>(log_b.size()) != hmm.n_states)
        throw std::invalid_argument("forward_init: emission vector size does not match model");
    ForwardState state;
    state.log_alpha.resize(static_cast<std::size_t>(hmm.n_states));
    for (int s = 0; s < hmm.n_states; ++s)
        state.log_alpha[static_cast<std::size_t>(s)] =
            log_b[static_cast<std::size_t>(s)] + hmm.log_init[static_cast<std::size_t>(s)];
    state.t = 0;
    return state;
}

void forward_step_baseline(ForwardState& state, const StandardHmm& hmm,
                           std::span<const double> log_b, Exec exec) {
    check_step_args(state, hmm, log_b);
    const int K = hmm.n_states;
    const std::vector<double>& alpha = state.log_alpha;
    std::vector<double> next(static_cast<std::size_t>(K));

    auto update = [&](int dst) {
        LogSum acc;
        for (int src = 0; src < K; ++src) {
            const double a = alpha[static_cast<std::size_t>(src)];
            if (a == kLogZero) continue;
            acc.add(a + hmm.log_trans(src, dst));
        }
        next[static_cast<std::size_t>(dst)] = log_b[static_cast<std::size_t>(dst)] + acc.value();
    };

    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (int dst = 0; dst < K; ++dst) update(dst);
    } else {
        for (int dst = 0; dst < K; ++dst) update(dst);
    }

    state.log_alpha = std::move(next);
    state.t += 1;
    state.cached_pool = std::numeric_limits<double>::quiet_NaN();
}

void forward_step_nobreak(ForwardState& state, const StandardHmm& hmm,
                          std::span<const double> log_b, Exec exec) {
    if (hmm.variant != TopologyVariant::NoBreak)
        throw std::invalid_argument("forward_step_nobreak: model is not the nobreak variant");
    check_step_args(state, hmm, log_b);
    const int K = hmm.n_states;
    const int L = hmm.L;
    const std::vector<double>& alpha = state.log_alpha;
    const bool parallel = exec == Exec::Parallel;

    // Pooled stop mass, shared by every destination.
    const double pool_all = blocked_log_sum_exp(
        static_cast<std::size_t>(K),
        [&](std::size_t s) { return alpha[s] + hmm.log_es[s]; }, parallel);

    std::vector<double> next(static_cast<std::size_t>(K));
    auto update = [&](int dst) {
        const int i = dst / L;
        const double banded = banded_term(hmm, alpha, dst);

        // Out-of-band mass: pool over all sources minus the in-band part.
        // The subtraction runs on the linear ratio, clamped to [0,1]: when
        // the band holds essentially all of the pool the difference
        // degrades to -inf rather than NaN.
        double out = kLogZero;
        if (pool_all != kLogZero) {
            LogSum nbh;
            for (int k = 0; k <= 2; ++k) {
                const int j = i - k;
                if (j < 0) break;
                for (int lp = 0; lp < L; ++lp) {
                    const int src = j * L + lp;
                    const double a = alpha[static_cast<std::size_t>(src)];
                    if (a == kLogZero) continue;
                    nbh.add(a + hmm.log_es[static_cast<std::size_t>(src)]);
                }
            }
            const double pool_nbh = nbh.value();
            if (pool_nbh == kLogZero) {
                out = pool_all;
            } else {
                const double ratio = std::min(std::exp(pool_nbh - pool_all), 1.0);
                out = ratio >= 1.0 ? kLogZero : pool_all + std::log1p(-ratio);
            }
        }
        next[static_cast<std::size_t>(dst)] =
            log_b[static_cast<std::size_t>(dst)] +
            log_add(banded, hmm.log_rpi[static_cast<std::size_t>(dst)] + out);
    };

    if (parallel) {
#pragma omp parallel for schedule(static)
        for (int dst = 0; dst < K; ++dst) update(dst);
    } else {
        for (int dst = 0; dst < K; ++dst) update(dst);
    }

    state.log_alpha = std::move(next);
    state.t += 1;
    state.cached_pool = pool_all;
}

void forward_step_break(ForwardState& state, const StandardHmm& hmm,
                        std::span<const double> log_b, Exec exec) {
    if (hmm.variant != TopologyVariant::Break)
        throw std::invalid_argument("forward_step_break: model is not the break variant");
    check_step_args(state, hmm, log_b);
    const int K = hmm.n_states;
    const int brk = hmm.break_state();
    const std::vector<double>& alpha = state.log_alpha;
    const bool parallel = exec == Exec::Parallel;

    // Inflow into the break state pools over every event state once.
    const double pool = blocked_log_sum_exp(
        static_cast<std::size_t>(brk),
        [&](std::size_t s) { return alpha[s] + hmm.log_es[s]; }, parallel);

    const double alpha_brk = alpha[static_cast<std::size_t>(brk)];
    std::vector<double> next(static_cast<std::size_t>(K));
    auto update = [&](int dst) {
        LogSum acc;
        acc.add(banded_term(hmm, alpha, dst));
        if (alpha_brk != kLogZero)
            acc.add(alpha_brk + hmm.log_break_exit +
                    hmm.log_rpi[static_cast<std::size_t>(dst)]);
        next[static_cast<std::size_t>(dst)] =
            log_b[static_cast<std::size_t>(dst)] + acc.value();
    };

    if (parallel) {
#pragma omp parallel for schedule(static)
        for (int dst = 0; dst < brk; ++dst) update(dst);
    } else {
        for (int dst = 0; dst < brk; ++dst) update(dst);
    }

    const double self = alpha_brk == kLogZero ? kLogZero : alpha_brk + hmm.log_break_self;
    next[static_cast<std::size_t>(brk)] =
        log_b[static_cast<std::size_t>(brk)] + log_add(pool, self);

    state.log_alpha = std::move(next);
    state.t += 1;
    state.cached_pool = pool;
}

void forward_step(ForwardState& state, const StandardHmm& hmm,
                  std::span<const double> log_b, Algorithm algorithm, Exec exec) {
    switch (algorithm) {
        case Algorithm::Baseline: forward_step_baseline(state, hmm, log_b, exec); return;
        case Algorithm::NoBreak: forward_step_nobreak(state, hmm, log_b, exec); return;
        case Algorithm::Break: forward_step_break(state, hmm, log_b, exec); return;
    }
    throw std::logic_error("unknown algorithm");
}

}  // namespace scofo
