#include "scofo/model.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "scofo/common.hpp"

namespace scofo {

using nlohmann::json;

std::string to_string(TopologyVariant v) {
    switch (v) {
        case TopologyVariant::Baseline: return "baseline";
        case TopologyVariant::NoBreak: return "nobreak";
        case TopologyVariant::Break: return "break";
    }
    return "?";
}

TopologyVariant variant_from_string(const std::string& s) {
    if (s == "baseline") return TopologyVariant::Baseline;
    if (s == "nobreak") return TopologyVariant::NoBreak;
    if (s == "break") return TopologyVariant::Break;
    throw parse_error("unknown topology variant '" + s + "'");
}

double duration_to_self_loop(double d_frames) {
    if (d_frames <= 1.0) return 0.0;
    return 1.0 - 1.0 / d_frames;
}

ModelConfig model_config_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw parse_error(std::string("model config: ") + e.what());
    }
    ModelConfig cfg;
    if (doc.contains("hop_s")) cfg.hop_s = doc["hop_s"].get<double>();
    if (doc.contains("frame_s")) cfg.frame_s = doc["frame_s"].get<double>();
    if (doc.contains("variant"))
        cfg.variant = variant_from_string(doc["variant"].get<std::string>());
    if (doc.contains("log10_s"))
        cfg.log10_s = doc["log10_s"].is_null() ? kLogZero : doc["log10_s"].get<double>();
    if (doc.contains("pause_states")) cfg.pause_states = doc["pause_states"].get<bool>();
    if (doc.contains("a_skip2")) cfg.a_skip2 = doc["a_skip2"].get<double>();
    if (doc.contains("a_self_top")) cfg.a_self_top = doc["a_self_top"].get<double>();
    if (doc.contains("a_pause_self")) cfg.a_pause_self = doc["a_pause_self"].get<double>();
    if (doc.contains("a_pause_entry")) cfg.a_pause_entry = doc["a_pause_entry"].get<double>();
    if (doc.contains("a_break_self")) cfg.a_break_self = doc["a_break_self"].get<double>();
    return cfg;
}

std::string model_config_to_json(const ModelConfig& cfg) {
    json doc;
    doc["hop_s"] = cfg.hop_s;
    doc["frame_s"] = cfg.frame_s;
    doc["variant"] = to_string(cfg.variant);
    if (std::isinf(cfg.log10_s))
        doc["log10_s"] = nullptr;
    else
        doc["log10_s"] = cfg.log10_s;
    doc["pause_states"] = cfg.pause_states;
    doc["a_skip2"] = cfg.a_skip2;
    doc["a_self_top"] = cfg.a_self_top;
    doc["a_pause_self"] = cfg.a_pause_self;
    doc["a_pause_entry"] = cfg.a_pause_entry;
    doc["a_break_self"] = cfg.a_break_self;
    return doc.dump(2);
}

double PerformanceHmm::log_top_trans(int j, int i) const {
    if (variant == TopologyVariant::Baseline)
        return log_top_dense[static_cast<std::size_t>(j) * n_events + i];
    double banded = kLogZero;
    if (in_nbh(j, i)) banded = log_band[static_cast<std::size_t>(j)][i - j];
    if (variant == TopologyVariant::NoBreak)
        return log_add(banded, log_stop[static_cast<std::size_t>(j)] +
                                   log_resume[static_cast<std::size_t>(i)]);
    return banded;  // Break: repeat/skip mass routes via the break state
}

namespace {

BottomHmm make_bottom(double self_loop, const ModelConfig& cfg) {
    BottomHmm b;
    if (cfg.pause_states) {
        b.L = 2;
        const double a00 = self_loop;
        const double a01 = cfg.a_pause_entry;
        const double e0 = 1.0 - a00 - a01;
        if (e0 <= 0.0)
            throw std::invalid_argument("pause entry leaves no exit mass for an event");
        const double a11 = cfg.a_pause_self;
        b.log_a[0][0] = std::log(a00);
        b.log_a[0][1] = std::log(a01);
        b.log_a[1][0] = kLogZero;  // pauses never return to the sustain state
        b.log_a[1][1] = std::log(a11);
        b.log_exit[0] = std::log(e0);
        b.log_exit[1] = std::log(1.0 - a11);
        b.log_init[0] = 0.0;
        b.log_init[1] = kLogZero;
    } else {
        b.L = 1;
        b.log_a[0][0] = std::log(self_loop);
        b.log_exit[0] = std::log(1.0 - self_loop);
        b.log_init[0] = 0.0;
    }
    return b;
}

}  // namespace

PerformanceHmm build_performance_hmm(const Score& score, const ModelConfig& cfg) {
    const int n = score.size();
    if (n < 1) throw std::invalid_argument("score has no events");

    const double s_linear = std::isinf(cfg.log10_s) ? 0.0 : std::pow(10.0, cfg.log10_s);
    if (s_linear >= 1.0) throw std::invalid_argument("stop probability s must be < 1");
    const double log_s = std::isinf(cfg.log10_s) ? kLogZero : cfg.log10_s * std::log(10.0);

    PerformanceHmm hmm;
    hmm.n_events = n;
    hmm.variant = cfg.variant;
    hmm.L = cfg.pause_states ? 2 : 1;
    hmm.hop_s = cfg.hop_s;
    hmm.log_skip2 = std::log(cfg.a_skip2);
    hmm.log_self_top = std::log(cfg.a_self_top);

    hmm.bottoms.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double d_frames = score.event_seconds(i) / cfg.hop_s;
        hmm.bottoms.push_back(make_bottom(duration_to_self_loop(d_frames), cfg));
        hmm.pitches.push_back(score.events[static_cast<std::size_t>(i)].pitch);
    }

    // Band rows: j -> j carries the insertion mass, j -> j+2 the deletion
    // mass, and j -> j+1 absorbs the residual 1 - s - a_jj - a_jj+2. Rows
    // whose targets run off the end fold the missing mass into the last
    // in-band slot (j+1, or j itself for the final event).
    hmm.log_band.assign(static_cast<std::size_t>(n),
                        {kLogZero, kLogZero, kLogZero});
    for (int j = 0; j < n; ++j) {
        auto& row = hmm.log_band[static_cast<std::size_t>(j)];
        if (j + 1 >= n) {
            row[0] = std::log(1.0 - s_linear);
            continue;
        }
        const double self = cfg.a_self_top;
        const double skip2 = j + 2 < n ? cfg.a_skip2 : 0.0;
        const double residual = 1.0 - s_linear - self - skip2;
        if (residual <= 0.0)
            throw std::invalid_argument(
                "top transition parameters leave no mass for j -> j+1");
        row[0] = std::log(self);
        row[1] = std::log(residual);
        if (j + 2 < n) row[2] = std::log(skip2);
    }

    hmm.log_top_init.assign(static_cast<std::size_t>(n), kLogZero);
    hmm.log_top_init[0] = 0.0;  // performances start at the first event

    hmm.log_stop.assign(static_cast<std::size_t>(n), log_s);
    hmm.log_resume.assign(static_cast<std::size_t>(n), -std::log(static_cast<double>(n)));
    if (cfg.variant == TopologyVariant::Baseline) {
        // Dense materialization exists for reference/testing use only.
        hmm.log_top_dense.assign(static_cast<std::size_t>(n) * n, kLogZero);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                double banded = kLogZero;
                if (in_nbh(j, i)) banded = hmm.log_band[static_cast<std::size_t>(j)][i - j];
                hmm.log_top_dense[static_cast<std::size_t>(j) * n + i] = log_add(
                    banded, hmm.log_stop[static_cast<std::size_t>(j)] +
                                hmm.log_resume[static_cast<std::size_t>(i)]);
            }
    }
    if (cfg.variant == TopologyVariant::Break) {
        if (!(cfg.a_break_self > 0.0 && cfg.a_break_self < 1.0))
            throw std::invalid_argument("break-state self-loop must lie in (0, 1)");
        hmm.log_break_self = std::log(cfg.a_break_self);
        hmm.log_break_exit = std::log(1.0 - cfg.a_break_self);
    }
    return hmm;
}

}  // namespace scofo
