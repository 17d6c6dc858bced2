#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scofo/cqt.hpp"
#include "scofo/standard_hmm.hpp"

namespace scofo {

// Diagonal Gaussian over normalized CQT vectors for one pitch.
struct PitchModel {
    int pitch = kRestPitch;
    std::vector<double> mean;
    std::vector<double> var;
};

// One model per pitch in {21..108} u {-1}, plus the variance floor they
// were trained with.
struct PitchModelSet {
    double floor_value = 1e-4;
    int dims = 0;
    std::vector<PitchModel> models;  // index 0 = silence, 1.. = kPitchMin..

    static int slot_of(int pitch) { return pitch == kRestPitch ? 0 : pitch - kPitchMin + 1; }
    const PitchModel& at(int pitch) const { return models[static_cast<std::size_t>(slot_of(pitch))]; }
    PitchModel& at(int pitch) { return models[static_cast<std::size_t>(slot_of(pitch))]; }
    bool complete() const;
};

// Sparse pitch-error mixture for one score event. Neighbor weights follow
// the semitone/whole-tone/perfect-12th error profile; neighbors that fall
// outside the pitch range fold their mass back into the nominal pitch, and
// the construction keeps the linear weights summing to exactly one.
struct MixtureWeights {
    int pitch = kRestPitch;
    std::vector<int> support;         // ascending pitch index
    std::vector<double> weight;       // linear
    std::vector<double> log_weight;   // exact log-domain weights

    double linear_sum() const;
};

MixtureWeights mixture_weights(int pitch, double C);
// Same mixture with C supplied as log10 so sub-underflow error
// probabilities keep exact log weights.
MixtureWeights mixture_weights_log10(int pitch, double log10_C);

// log sum_k w_k N(y | mu_k, diag var_k) over the sparse support.
double log_emission(const MixtureWeights& weights, const FeatureFrame& frame,
                    const PitchModelSet& models);

// Per-pitch sample means and floored diagonal variances. Pitches without
// labeled frames fall back to the synthetic template.
PitchModelSet train_pitch_models(
    std::span<const std::pair<int, FeatureFrame>> labeled, double floor_value,
    const CqtConfig& cfg);

// Harmonic-comb stand-in for trained data: geometrically decaying mass on
// the bins nearest the fundamental and its first 8 partials; uniform for
// silence. Variance is the floor everywhere.
PitchModel synth_template(int pitch, const CqtConfig& cfg, double floor_value);
PitchModelSet synth_model_set(const CqtConfig& cfg, double floor_value = 1e-4);

std::string models_to_json(const PitchModelSet& set);
PitchModelSet models_from_json(const std::string& text);
void save_models(const std::filesystem::path& path, const PitchModelSet& set);
PitchModelSet load_models(const std::filesystem::path& path);

// Per-frame emission evaluator bound to a flattened model: one mixture per
// emission slot, Gaussians shared across slots and computed once per frame.
// Pure and reentrant after construction.
class EmissionTable {
public:
    EmissionTable(const StandardHmm& hmm, const PitchModelSet& models,
                  double log10_C);

    int dims() const { return dims_; }
    int slots() const { return static_cast<int>(mixtures_.size()); }

    // Fills log b~ per state. Throws std::invalid_argument on a dimension
    // mismatch between the frame and the trained models.
    void eval_states(const FeatureFrame& frame, const StandardHmm& hmm,
                     std::vector<double>& out) const;
    std::vector<double> eval_slots(const FeatureFrame& frame) const;

private:
    struct Gauss {
        int pitch;
        double log_const;
        std::vector<double> mean;
        std::vector<double> inv_var;
    };
    int dims_ = 0;
    std::vector<Gauss> gaussians_;             // deduplicated across slots
    std::vector<MixtureWeights> mixtures_;     // per slot
    std::vector<std::vector<int>> slot_gauss_; // per slot, indices into gaussians_
};

}  // namespace scofo
