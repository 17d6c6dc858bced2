#pragma once

#include <vector>

#include "scofo/model.hpp"

namespace scofo {

// Flattened single-level view of a PerformanceHmm. States are (event, bottom)
// pairs laid out event-major, with the break state (if any) appended last.
//
// The transition structure is exposed through precomputed tables sized O(L*N):
// the in-band entries, the per-source exit*stop products and the per-
// destination resume*init products. log_trans() evaluates any single entry
// from those tables; the dense matrix is materialized only for the Baseline
// variant, never for NoBreak/Break.
class StandardHmm {
public:
    TopologyVariant variant = TopologyVariant::NoBreak;
    int n_events = 0;
    int L = 1;
    int n_states = 0;
    bool has_break = false;
    double hop_s = 0.020;

    std::vector<double> log_init;  // per state

    // In-band flattened transitions: index band_index(i, k, l_src, l_dst)
    // holds log a~_{(i-k,l'),(i,l)} for k = 0..2; -inf where i-k < 0.
    std::vector<double> log_band;

    std::vector<double> log_es;   // per source state: log(e^(j)_l' * s_j)
    std::vector<double> log_rpi;  // per dest state:   log(r_i * pi^(i)_l)

    double log_break_self = kLogZero;
    double log_break_exit = kLogZero;

    // Baseline variant only: full n_states x n_states log transition matrix.
    std::vector<double> log_dense;

    // Emission binding: each state points at a slot; slot_pitch maps slots to
    // pitch indices (-1 = silence, shared by rests, pause states, break).
    std::vector<int> state_slot;
    std::vector<int> slot_pitch;
    int silence_slot = -1;

    int state_index(int event, int bottom) const { return event * L + bottom; }
    int break_state() const { return has_break ? n_events * L : -1; }
    int event_of(int state) const {
        return state == break_state() ? n_events : state / L;
    }
    int bottom_of(int state) const {
        return state == break_state() ? 0 : state % L;
    }

    std::size_t band_index(int dst_event, int k, int l_src, int l_dst) const {
        return static_cast<std::size_t>(((dst_event * 3 + k) * L + l_src)) *
                   static_cast<std::size_t>(L) +
               static_cast<std::size_t>(l_dst);
    }

    // Any single flattened transition entry, in log domain.
    double log_trans(int src, int dst) const {
        if (variant == TopologyVariant::Baseline)
            return log_dense[static_cast<std::size_t>(src) * n_states + dst];
        const int brk = break_state();
        if (src == brk) {
            if (dst == brk) return log_break_self;
            return log_break_exit + log_rpi[static_cast<std::size_t>(dst)];
        }
        if (dst == brk) return log_es[static_cast<std::size_t>(src)];
        const int j = src / L;
        const int i = dst / L;
        if (in_nbh(j, i)) return log_band[band_index(i, i - j, src % L, dst % L)];
        if (variant == TopologyVariant::NoBreak)
            return log_es[static_cast<std::size_t>(src)] +
                   log_rpi[static_cast<std::size_t>(dst)];
        return kLogZero;  // Break: no direct out-of-band transitions
    }
};

// Expands a PerformanceHmm into its standard-HMM form.
StandardHmm flatten(const PerformanceHmm& hmm);

}  // namespace scofo
