#include "scofo/emission.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "scofo/logmath.hpp"

namespace scofo {

using nlohmann::json;

bool PitchModelSet::complete() const {
    if (static_cast<int>(models.size()) != kPitchCount) return false;
    for (const auto& m : models)
        if (static_cast<int>(m.mean.size()) != dims ||
            static_cast<int>(m.var.size()) != dims)
            return false;
    return true;
}

double MixtureWeights::linear_sum() const {
    // Neighbors first, in construction (ascending-k) order, then the
    // nominal pitch: this reproduces the 1 - T + T cancellation exactly.
    double acc = 0.0;
    double own = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
        if (support[i] == pitch)
            own = weight[i];
        else
            acc += weight[i];
    }
    return acc + own;
}

namespace {

struct Neighbor {
    int offset;
    double coeff;
};
// Ascending offsets; per-side coefficients sum to 1/2.
constexpr Neighbor kNeighbors[] = {{-19, 0.055}, {-2, 0.270}, {-1, 0.175},
                                   {+1, 0.175},  {+2, 0.270}, {+19, 0.055}};

MixtureWeights build_mixture(int pitch, double C, double log_C) {
    if (!pitch_in_range(pitch))
        throw std::invalid_argument("mixture_weights: pitch outside the model range");
    if (std::isnan(C) || C < 0.0 || C >= 1.0)
        throw std::invalid_argument("mixture_weights: C must lie in [0, 1)");

    MixtureWeights w;
    w.pitch = pitch;
    if (pitch == kRestPitch) {
        w.support = {kRestPitch};
        w.weight = {1.0};
        w.log_weight = {0.0};
        return w;
    }

    double taken = 0.0;
    std::vector<int> ks;
    std::vector<double> lin, lg;
    for (const Neighbor& nb : kNeighbors) {
        const int k = pitch + nb.offset;
        if (k < kPitchMin || k > kPitchMax) continue;  // mass folds back below
        ks.push_back(k);
        lin.push_back(nb.coeff * C);
        lg.push_back(std::log(nb.coeff) + log_C);
        taken += nb.coeff * C;
    }
    const double own = 1.0 - taken;
    // Insert the nominal pitch keeping the support ascending.
    const auto at = std::lower_bound(ks.begin(), ks.end(), pitch) - ks.begin();
    ks.insert(ks.begin() + at, pitch);
    lin.insert(lin.begin() + at, own);
    lg.insert(lg.begin() + at, std::log(own));
    w.support = std::move(ks);
    w.weight = std::move(lin);
    w.log_weight = std::move(lg);
    return w;
}

double log_gauss_const(const PitchModel& m) {
    double acc = -0.5 * static_cast<double>(m.mean.size()) *
                 std::log(2.0 * std::numbers::pi);
    for (double v : m.var) acc -= 0.5 * std::log(v);
    return acc;
}

double log_gauss_quad(const PitchModel& m, const std::vector<double>& y) {
    double q = 0.0;
    for (std::size_t d = 0; d < y.size(); ++d) {
        const double diff = y[d] - m.mean[d];
        q += diff * diff / m.var[d];
    }
    return -0.5 * q;
}

}  // namespace

MixtureWeights mixture_weights(int pitch, double C) {
    return build_mixture(pitch, C, std::log(C));
}

MixtureWeights mixture_weights_log10(int pitch, double log10_C) {
    if (log10_C >= 0.0)
        throw std::invalid_argument("mixture_weights: log10(C) must be negative");
    const double C = std::isinf(log10_C) ? 0.0 : std::pow(10.0, log10_C);
    const double log_C = std::isinf(log10_C) ? kLogZero : log10_C * std::log(10.0);
    return build_mixture(pitch, C, log_C);
}

double log_emission(const MixtureWeights& weights, const FeatureFrame& frame,
                    const PitchModelSet& models) {
    if (frame.dims() != models.dims)
        throw std::invalid_argument("log_emission: feature dimension mismatch");
    LogSum acc;
    for (std::size_t i = 0; i < weights.support.size(); ++i) {
        if (weights.log_weight[i] == kLogZero) continue;
        const PitchModel& m = models.at(weights.support[i]);
        acc.add(weights.log_weight[i] + log_gauss_const(m) +
                log_gauss_quad(m, frame.values));
    }
    return acc.value();
}

PitchModel synth_template(int pitch, const CqtConfig& cfg, double floor_value) {
    if (!pitch_in_range(pitch))
        throw std::invalid_argument("synth_template: pitch outside the model range");
    const int dims = cfg.bins();
    PitchModel m;
    m.pitch = pitch;
    m.mean.assign(static_cast<std::size_t>(dims), 0.0);
    m.var.assign(static_cast<std::size_t>(dims), floor_value);
    if (pitch == kRestPitch) {
        const double u = 1.0 / dims;
        std::fill(m.mean.begin(), m.mean.end(), u);
        return m;
    }
    const double f0 = midi_to_freq(pitch);
    double amp = 1.0;
    for (int h = 1; h <= 8; ++h, amp *= 0.6) {
        const double f = f0 * h;
        const int d = static_cast<int>(
            std::lround(cfg.bins_per_octave * std::log2(f / cfg.f_min)));
        if (d < 0 || d >= dims) continue;
        m.mean[static_cast<std::size_t>(d)] += amp;
    }
    double sum = 0.0;
    for (double v : m.mean) sum += v;
    for (double& v : m.mean) v /= sum;
    return m;
}

PitchModelSet synth_model_set(const CqtConfig& cfg, double floor_value) {
    PitchModelSet set;
    set.floor_value = floor_value;
    set.dims = cfg.bins();
    set.models.resize(static_cast<std::size_t>(kPitchCount));
    set.at(kRestPitch) = synth_template(kRestPitch, cfg, floor_value);
    for (int k = kPitchMin; k <= kPitchMax; ++k)
        set.at(k) = synth_template(k, cfg, floor_value);
    return set;
}

PitchModelSet train_pitch_models(
    std::span<const std::pair<int, FeatureFrame>> labeled, double floor_value,
    const CqtConfig& cfg) {
    if (labeled.empty())
        throw std::invalid_argument("train_pitch_models: no labeled frames");
    const int dims = labeled.front().second.dims();
    if (dims != cfg.bins())
        throw std::invalid_argument(
            "train_pitch_models: labeled frames do not match the CQT bin count");

    std::map<int, std::vector<const FeatureFrame*>> by_pitch;
    for (const auto& [pitch, frame] : labeled) {
        if (!pitch_in_range(pitch))
            throw std::invalid_argument("train_pitch_models: label outside pitch range");
        if (frame.dims() != dims)
            throw std::invalid_argument("train_pitch_models: inconsistent frame dimensions");
        by_pitch[pitch].push_back(&frame);
    }

    PitchModelSet set = synth_model_set(cfg, floor_value);
    for (const auto& [pitch, frames] : by_pitch) {
        PitchModel m;
        m.pitch = pitch;
        m.mean.assign(static_cast<std::size_t>(dims), 0.0);
        m.var.assign(static_cast<std::size_t>(dims), 0.0);
        const double n = static_cast<double>(frames.size());
        for (const FeatureFrame* f : frames)
            for (int d = 0; d < dims; ++d)
                m.mean[static_cast<std::size_t>(d)] += f->values[static_cast<std::size_t>(d)];
        for (double& v : m.mean) v /= n;
        if (frames.size() >= 2) {
            for (const FeatureFrame* f : frames)
                for (int d = 0; d < dims; ++d) {
                    const double diff =
                        f->values[static_cast<std::size_t>(d)] - m.mean[static_cast<std::size_t>(d)];
                    m.var[static_cast<std::size_t>(d)] += diff * diff;
                }
            for (double& v : m.var) v /= (n - 1.0);
        }
        for (double& v : m.var) v = std::max(v, floor_value);
        set.at(pitch) = std::move(m);
    }
    return set;
}

std::string models_to_json(const PitchModelSet& set) {
    json doc;
    doc["F"] = set.floor_value;
    doc["D"] = set.dims;
    json models = json::object();
    for (const PitchModel& m : set.models)
        models[std::to_string(m.pitch)] = {{"mean", m.mean}, {"var", m.var}};
    doc["models"] = std::move(models);
    return doc.dump();
}

PitchModelSet models_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw parse_error(std::string("model file: ") + e.what());
    }
    PitchModelSet set;
    set.floor_value = doc.at("F").get<double>();
    set.dims = doc.at("D").get<int>();
    set.models.resize(static_cast<std::size_t>(kPitchCount));
    for (const auto& [key, value] : doc.at("models").items()) {
        const int pitch = std::stoi(key);
        if (!pitch_in_range(pitch))
            throw parse_error("model file: pitch " + key + " outside the model range");
        PitchModel m;
        m.pitch = pitch;
        m.mean = value.at("mean").get<std::vector<double>>();
        m.var = value.at("var").get<std::vector<double>>();
        if (static_cast<int>(m.mean.size()) != set.dims ||
            static_cast<int>(m.var.size()) != set.dims)
            throw parse_error("model file: pitch " + key + " has wrong dimensionality");
        set.at(pitch) = std::move(m);
    }
    if (!set.complete()) throw parse_error("model file: incomplete pitch coverage");
    return set;
}

void save_models(const std::filesystem::path& path, const PitchModelSet& set) {
    std::ofstream out(path);
    if (!out) throw parse_error("cannot write model file " + path.string());
    out << models_to_json(set) << '\n';
}

PitchModelSet load_models(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open model file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return models_from_json(buf.str());
}

EmissionTable::EmissionTable(const StandardHmm& hmm, const PitchModelSet& models,
                             double log10_C) {
    if (!models.complete())
        throw std::invalid_argument("EmissionTable: incomplete pitch model set");
    dims_ = models.dims;

    std::map<int, int> gauss_index;
    auto ensure_gauss = [&](int pitch) {
        auto it = gauss_index.find(pitch);
        if (it != gauss_index.end()) return it->second;
        const PitchModel& m = models.at(pitch);
        Gauss g;
        g.pitch = pitch;
        g.log_const = log_gauss_const(m);
        g.mean = m.mean;
        g.inv_var.resize(m.var.size());
        for (std::size_t d = 0; d < m.var.size(); ++d) g.inv_var[d] = 1.0 / m.var[d];
        const int idx = static_cast<int>(gaussians_.size());
        gaussians_.push_back(std::move(g));
        gauss_index[pitch] = idx;
        return idx;
    };

    mixtures_.reserve(hmm.slot_pitch.size());
    slot_gauss_.reserve(hmm.slot_pitch.size());
    for (int pitch : hmm.slot_pitch) {
        MixtureWeights w = mixture_weights_log10(pitch, log10_C);
        std::vector<int> gs;
        gs.reserve(w.support.size());
        for (int k : w.support) gs.push_back(ensure_gauss(k));
        mixtures_.push_back(std::move(w));
        slot_gauss_.push_back(std::move(gs));
    }
}

std::vector<double> EmissionTable::eval_slots(const FeatureFrame& frame) const {
    if (frame.dims() != dims_)
        throw std::invalid_argument("emission: feature dimension mismatch (frame " +
                                    std::to_string(frame.dims()) + ", models " +
                                    std::to_string(dims_) + ")");
    std::vector<double> gauss_val(gaussians_.size());
    for (std::size_t g = 0; g < gaussians_.size(); ++g) {
        const Gauss& gm = gaussians_[g];
        double q = 0.0;
        for (int d = 0; d < dims_; ++d) {
            const double diff = frame.values[static_cast<std::size_t>(d)] -
                                gm.mean[static_cast<std::size_t>(d)];
            q += diff * diff * gm.inv_var[static_cast<std::size_t>(d)];
        }
        gauss_val[g] = gm.log_const - 0.5 * q;
    }
    std::vector<double> out(mixtures_.size());
    for (std::size_t slot = 0; slot < mixtures_.size(); ++slot) {
        const MixtureWeights& w = mixtures_[slot];
        LogSum acc;
        for (std::size_t i = 0; i < w.support.size(); ++i) {
            if (w.log_weight[i] == kLogZero) continue;
            acc.add(w.log_weight[i] +
                    gauss_val[static_cast<std::size_t>(slot_gauss_[slot][i])]);
        }
        out[slot] = acc.value();
    }
    return out;
}

void EmissionTable::eval_states(const FeatureFrame& frame, const StandardHmm& hmm,
                                std::vector<double>& out) const {
    const std::vector<double> slots = eval_slots(frame);
    out.resize(static_cast<std::size_t>(hmm.n_states));
    for (int s = 0; s < hmm.n_states; ++s)
        out[static_cast<std::size_t>(s)] =
            slots[static_cast<std::size_t>(hmm.state_slot[static_cast<std::size_t>(s)])];
}

}  // namespace scofo
