#include "scofo/standard_hmm.hpp"

#include <algorithm>
#include <set>

namespace scofo {

StandardHmm flatten(const PerformanceHmm& hmm) {
    StandardHmm s;
    s.variant = hmm.variant;
    s.n_events = hmm.n_events;
    s.L = hmm.L;
    s.has_break = hmm.has_break();
    s.n_states = hmm.n_events * hmm.L + (s.has_break ? 1 : 0);
    s.hop_s = hmm.hop_s;

    const int n = hmm.n_events;
    const int L = hmm.L;

    s.log_init.assign(static_cast<std::size_t>(s.n_states), kLogZero);
    for (int i = 0; i < n; ++i)
        for (int l = 0; l < L; ++l)
            s.log_init[static_cast<std::size_t>(s.state_index(i, l))] =
                hmm.log_top_init[static_cast<std::size_t>(i)] +
                hmm.bottoms[static_cast<std::size_t>(i)].log_init[static_cast<std::size_t>(l)];
    // The break state is never an entry point.

    // In-band flattened entries: same-event pairs combine the bottom chain
    // with the exit -> top self -> re-entry route; cross-event pairs are
    // exit -> top -> entry.
    s.log_band.assign(static_cast<std::size_t>(n) * 3 * L * L, kLogZero);
    for (int i = 0; i < n; ++i) {
        const auto& bi = hmm.bottoms[static_cast<std::size_t>(i)];
        for (int k = 0; k <= 2; ++k) {
            const int j = i - k;
            if (j < 0) continue;
            const auto& bj = hmm.bottoms[static_cast<std::size_t>(j)];
            const double top = hmm.log_top_trans(j, i);
            for (int lp = 0; lp < L; ++lp)
                for (int l = 0; l < L; ++l) {
                    double v;
                    if (k == 0)
                        v = log_add(bi.log_a[static_cast<std::size_t>(lp)][static_cast<std::size_t>(l)],
                                    bi.log_exit[static_cast<std::size_t>(lp)] + top +
                                        bi.log_init[static_cast<std::size_t>(l)]);
                    else
                        v = bj.log_exit[static_cast<std::size_t>(lp)] + top +
                            bi.log_init[static_cast<std::size_t>(l)];
                    s.log_band[s.band_index(i, k, lp, l)] = v;
                }
        }
    }

    const int n_event_states = n * L;
    s.log_es.assign(static_cast<std::size_t>(n_event_states), kLogZero);
    s.log_rpi.assign(static_cast<std::size_t>(n_event_states), kLogZero);
    if (hmm.variant != TopologyVariant::Baseline) {
        for (int j = 0; j < n; ++j)
            for (int lp = 0; lp < L; ++lp)
                s.log_es[static_cast<std::size_t>(s.state_index(j, lp))] =
                    hmm.bottoms[static_cast<std::size_t>(j)].log_exit[static_cast<std::size_t>(lp)] +
                    hmm.log_stop[static_cast<std::size_t>(j)];
        for (int i = 0; i < n; ++i)
            for (int l = 0; l < L; ++l)
                s.log_rpi[static_cast<std::size_t>(s.state_index(i, l))] =
                    hmm.log_resume[static_cast<std::size_t>(i)] +
                    hmm.bottoms[static_cast<std::size_t>(i)].log_init[static_cast<std::size_t>(l)];
    }
    s.log_break_self = hmm.log_break_self;
    s.log_break_exit = hmm.log_break_exit;

    if (hmm.variant == TopologyVariant::Baseline) {
        const int K = s.n_states;
        s.log_dense.assign(static_cast<std::size_t>(K) * K, kLogZero);
        for (int src = 0; src < K; ++src) {
            const int j = src / L;
            const int lp = src % L;
            const auto& bj = hmm.bottoms[static_cast<std::size_t>(j)];
            for (int dst = 0; dst < K; ++dst) {
                const int i = dst / L;
                const int l = dst % L;
                const auto& bi = hmm.bottoms[static_cast<std::size_t>(i)];
                const double top = hmm.log_top_trans(j, i);
                double v;
                if (i == j)
                    v = log_add(bi.log_a[static_cast<std::size_t>(lp)][static_cast<std::size_t>(l)],
                                bi.log_exit[static_cast<std::size_t>(lp)] + top +
                                    bi.log_init[static_cast<std::size_t>(l)]);
                else
                    v = bj.log_exit[static_cast<std::size_t>(lp)] + top +
                        bi.log_init[static_cast<std::size_t>(l)];
                s.log_dense[static_cast<std::size_t>(src) * K + dst] = v;
            }
        }
    }

    // Emission slots: sorted distinct pitches; silence always present for
    // pause states, rests and the break state.
    std::set<int> pitch_set(hmm.pitches.begin(), hmm.pitches.end());
    pitch_set.insert(kRestPitch);
    s.slot_pitch.assign(pitch_set.begin(), pitch_set.end());
    auto slot_of = [&](int pitch) {
        return static_cast<int>(std::lower_bound(s.slot_pitch.begin(), s.slot_pitch.end(),
                                                 pitch) -
                                s.slot_pitch.begin());
    };
    s.silence_slot = slot_of(kRestPitch);
    s.state_slot.assign(static_cast<std::size_t>(s.n_states), s.silence_slot);
    for (int i = 0; i < n; ++i)
        for (int l = 0; l < L; ++l)
            s.state_slot[static_cast<std::size_t>(s.state_index(i, l))] =
                l == 0 ? slot_of(hmm.pitches[static_cast<std::size_t>(i)]) : s.silence_slot;
    return s;
}

}  // namespace scofo
