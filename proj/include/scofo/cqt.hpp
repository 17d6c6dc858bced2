#pragma once

#include <complex>
#include <span>
#include <vector>

#include "scofo/common.hpp"

namespace scofo {

struct CqtConfig {
    double sample_rate = 16000.0;
    double frame_s = 0.128;
    double hop_s = 0.020;
    double f_min = 55.0;
    double f_max = 7040.0;
    int bins_per_octave = 12;
    double quality = 16.0;

    int bins() const;  // 85 for the defaults (55..7040 Hz semitone grid)
    int frame_samples() const { return static_cast<int>(frame_s * sample_rate + 0.5); }
    int hop_samples() const { return static_cast<int>(hop_s * sample_rate + 0.5); }
    double bin_freq(int d) const;
    void validate() const;  // throws std::invalid_argument
};

// One observation: normalized constant-Q magnitudes for a 20 ms hop.
struct FeatureFrame {
    std::vector<double> values;
    int t = 0;
    double time_s = 0.0;

    int dims() const { return static_cast<int>(values.size()); }
};

// Divides by the entry sum; near-zero frames fall back to the uniform
// vector so downstream likelihoods stay finite.
FeatureFrame normalize(FeatureFrame frame);

// Per-bin constant-Q kernels: complex exponential at f_min * 2^(d/12),
// Hann-windowed over min(frame, ceil(Q * sr / f_d)) samples, centered in
// the frame and truncated to the frame for the low bins.
class CqtAnalyzer {
public:
    explicit CqtAnalyzer(CqtConfig cfg = {});

    const CqtConfig& config() const { return cfg_; }

    // Unnormalized magnitudes of one frame. samples.size() must equal
    // cfg.frame_samples().
    FeatureFrame frame(std::span<const float> samples, int t = 0,
                       Exec exec = Exec::Serial) const;

private:
    CqtConfig cfg_;
    struct Kernel {
        int start = 0;
        std::vector<std::complex<double>> taps;
    };
    std::vector<Kernel> kernels_;
};

// Slices a mono stream into hops, zero-padding the trailing partial frames,
// and emits normalized feature frames in increasing t. Throws parse_error
// if the stream's sample rate differs from the analyzer's.
std::vector<FeatureFrame> stream_frames(std::span<const float> samples,
                                        double sample_rate,
                                        const CqtAnalyzer& analyzer,
                                        Exec exec = Exec::Serial);

}  // namespace scofo
