#include "scofo/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace scofo {

namespace {

int fold_shift(int pitch, int shift) {
    // Shifted targets outside the pitch range try the opposite sign before
    // giving up and keeping the notated pitch.
    if (pitch_in_range(pitch + shift) && pitch + shift != kRestPitch) return pitch + shift;
    if (pitch_in_range(pitch - shift) && pitch - shift != kRestPitch) return pitch - shift;
    return pitch;
}

}  // namespace

std::vector<PerformedNote> inject_errors(const Score& score, const ErrorRates& rates,
                                         std::uint64_t seed) {
    for (double p : {rates.p_delete, rates.p_insert, rates.p_sub_semitone,
                     rates.p_sub_wholetone, rates.p_sub_perfect12})
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("inject_errors: rates must lie in [0, 1]");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    std::vector<PerformedNote> perf;
    double t = 0.0;
    for (const ScoreEvent& e : score.events) {
        const double dur = score.event_seconds(e.index);
        if (e.pitch == kRestPitch) {
            perf.push_back({e.index, kRestPitch, t, t + dur, NoteKind::Pause});
            t += dur;
            continue;
        }
        if (uni(rng) < rates.p_delete) continue;  // dropped notes take no time

        int pitch = e.pitch;
        NoteKind kind = NoteKind::Correct;
        const double u = uni(rng);
        int shift = 0;
        if (u < rates.p_sub_semitone)
            shift = 1;
        else if (u < rates.p_sub_semitone + rates.p_sub_wholetone)
            shift = 2;
        else if (u < rates.p_sub_semitone + rates.p_sub_wholetone + rates.p_sub_perfect12)
            shift = 19;
        if (shift != 0) {
            const int sign = uni(rng) < 0.5 ? 1 : -1;
            const int substituted = fold_shift(e.pitch, sign * shift);
            if (substituted != e.pitch) {
                pitch = substituted;
                kind = NoteKind::Substitution;
            }
        }
        perf.push_back({e.index, pitch, t, t + dur, kind});
        t += dur;

        if (uni(rng) < rates.p_insert) {
            // An extra note after the event: a near neighbor of the notated
            // pitch, half the event's nominal length.
            static constexpr int kInsertShifts[] = {-2, -1, 1, 2};
            const int pick = static_cast<int>(uni(rng) * 4.0) & 3;
            const int ins_pitch = fold_shift(e.pitch, kInsertShifts[pick]);
            const double ins_dur = dur * 0.5;
            perf.push_back({-1, ins_pitch, t, t + ins_dur, NoteKind::Insertion});
            t += ins_dur;
        }
    }
    return perf;
}

std::pair<std::vector<PerformedNote>, GroundTruth> inject_repeats_skips(
    const std::vector<PerformedNote>& perf, const JumpConfig& cfg, std::uint64_t seed) {
    if (!(cfg.p_jump >= 0.0 && cfg.p_jump <= 1.0))
        throw std::invalid_argument("inject_repeats_skips: p_jump must lie in [0, 1]");
    if (perf.size() < 2)
        throw std::invalid_argument("inject_repeats_skips: performance too short to host a jump");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::uniform_real_distribution<double> break_dur(cfg.min_break_s, cfg.max_break_s);

    // Resumption candidates: played notes carrying a score position.
    std::vector<int> candidates;
    for (std::size_t i = 0; i < perf.size(); ++i)
        if (perf[i].score_event >= 0) candidates.push_back(static_cast<int>(i));
    if (candidates.empty())
        throw std::invalid_argument("inject_repeats_skips: no scored notes to resume from");
    auto pick_candidate = [&]() {
        const auto idx = static_cast<std::size_t>(uni(rng) * static_cast<double>(candidates.size()));
        return candidates[std::min(idx, candidates.size() - 1)];
    };

    const int n = static_cast<int>(perf.size());
    GroundTruth truth;
    std::vector<PerformedNote> out;
    double t = 0.0;
    int pos = 0;
    int jumps_done = 0;
    int last_scored = -1;

    auto relay = [&](const PerformedNote& src) {
        PerformedNote note = src;
        const double dur = note.end_s - note.start_s;
        note.start_s = t;
        note.end_s = t + dur;
        out.push_back(note);
        t += dur;
        if (note.score_event >= 0) last_scored = note.score_event;
    };
    auto insert_break = [&](int target) {
        const double pause = break_dur(rng);
        out.push_back({-1, kRestPitch, t, t + pause, NoteKind::Break});
        t += pause;
        const int to_event = perf[static_cast<std::size_t>(target)].score_event;
        if (last_scored >= 0 && !in_nbh(last_scored, to_event))
            truth.jumps.push_back({t, last_scored, to_event});
        ++jumps_done;
    };

    while (true) {
        relay(perf[static_cast<std::size_t>(pos)]);
        if (pos + 1 >= n) break;
        if (jumps_done >= cfg.max_jumps || uni(rng) >= cfg.p_jump) {
            ++pos;
            continue;
        }
        const int target = pick_candidate();
        insert_break(target);
        pos = target;
    }

    // No genuine repeat/skip came out of the random walk: append one at the
    // end, resampling the target until it lies outside the neighbor band,
    // and play through from there.
    if (cfg.force_at_least_one && truth.jumps.empty() && jumps_done < cfg.max_jumps) {
        int target = pick_candidate();
        for (int tries = 0;
             tries < 256 && last_scored >= 0 &&
             in_nbh(last_scored, perf[static_cast<std::size_t>(target)].score_event);
             ++tries)
            target = pick_candidate();
        insert_break(target);
        for (int p = target; p < n; ++p) relay(perf[static_cast<std::size_t>(p)]);
    }
    return {std::move(out), std::move(truth)};
}

std::vector<FeatureFrame> render_features(const std::vector<PerformedNote>& perf,
                                          const PitchModelSet& models, double hop_s,
                                          std::uint64_t seed, GroundTruth& truth) {
    if (perf.empty()) throw std::invalid_argument("render_features: empty performance");
    const int dims = models.dims;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const double total = perf.back().end_s;
    const int n_frames = static_cast<int>(std::ceil(total / hop_s - 1e-9));
    truth.hop_s = hop_s;
    truth.frame_event.clear();
    truth.frame_event.reserve(static_cast<std::size_t>(n_frames));

    std::vector<FeatureFrame> frames;
    frames.reserve(static_cast<std::size_t>(n_frames));
    std::size_t ptr = 0;
    for (int t = 0; t < n_frames; ++t) {
        const double time = t * hop_s;
        while (ptr + 1 < perf.size() && perf[ptr].end_s <= time) ++ptr;
        const PerformedNote& note = perf[ptr];

        int label = note.score_event;
        if (note.kind == NoteKind::Break) label = GroundTruth::kBreakMarker;
        if (note.kind == NoteKind::Insertion) label = GroundTruth::kInsertedMarker;
        truth.frame_event.push_back(label);

        const PitchModel& m = models.at(note.played_pitch);
        FeatureFrame f;
        f.t = t;
        f.time_s = time;
        f.values.resize(static_cast<std::size_t>(dims));
        double sum = 0.0;
        for (int d = 0; d < dims; ++d) {
            const double sd = std::sqrt(m.var[static_cast<std::size_t>(d)]);
            double v = m.mean[static_cast<std::size_t>(d)];
            if (sd > 0.0) v += sd * gauss(rng);
            v = std::max(v, 0.0);  // project back onto the simplex
            f.values[static_cast<std::size_t>(d)] = v;
            sum += v;
        }
        if (sum < 1e-12)
            std::fill(f.values.begin(), f.values.end(), 1.0 / dims);
        else
            for (double& v : f.values) v /= sum;
        frames.push_back(std::move(f));
    }
    return frames;
}

std::pair<std::vector<FeatureFrame>, GroundTruth> render_features(
    const std::vector<PerformedNote>& perf, const PitchModelSet& models,
    double hop_s, std::uint64_t seed) {
    GroundTruth truth;
    std::vector<FeatureFrame> frames = render_features(perf, models, hop_s, seed, truth);
    return {std::move(frames), std::move(truth)};
}

std::vector<float> render_audio(const std::vector<PerformedNote>& perf,
                                std::uint64_t seed, int sample_rate) {
    if (perf.empty()) throw std::invalid_argument("render_audio: empty performance");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

    const double total = perf.back().end_s;
    std::vector<float> samples(
        static_cast<std::size_t>(std::lround(total * sample_rate)), 0.0f);

    const double ramp_s = 0.010;
    for (const PerformedNote& note : perf) {
        if (note.played_pitch == kRestPitch) continue;
        const std::size_t begin =
            static_cast<std::size_t>(std::lround(note.start_s * sample_rate));
        const std::size_t end = std::min(
            samples.size(), static_cast<std::size_t>(std::lround(note.end_s * sample_rate)));
        if (end <= begin) continue;

        const double f0 = midi_to_freq(note.played_pitch);
        double freqs[8];
        double amps[8];
        double phases[8];
        int n_partials = 0;
        double amp = 1.0;
        double amp_total = 0.0;
        for (int h = 1; h <= 8; ++h, amp *= 0.6) {
            const double f = f0 * h;
            if (f >= 0.45 * sample_rate) break;
            freqs[n_partials] = f;
            amps[n_partials] = amp;
            phases[n_partials] = phase(rng);
            amp_total += amp;
            ++n_partials;
        }
        if (n_partials == 0) continue;
        const double gain = 0.5 / amp_total;

        const double len_s = note.end_s - note.start_s;
        const double ramp = std::min(ramp_s, len_s / 2.0);
        for (std::size_t n = begin; n < end; ++n) {
            const double t_local = static_cast<double>(n) / sample_rate - note.start_s;
            double env = 1.0;
            if (t_local < ramp) env = t_local / ramp;
            const double tail = len_s - t_local;
            if (tail < ramp) env = std::min(env, tail / ramp);
            double v = 0.0;
            for (int p = 0; p < n_partials; ++p)
                v += amps[p] * std::sin(2.0 * std::numbers::pi * freqs[p] * t_local +
                                        phases[p]);
            samples[n] += static_cast<float>(gain * env * v);
        }
    }
    return samples;
}

}  // namespace scofo
