#include "scofo/cqt.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace scofo {

int CqtConfig::bins() const {
    return static_cast<int>(std::lround(bins_per_octave * std::log2(f_max / f_min))) + 1;
}

double CqtConfig::bin_freq(int d) const {
    return f_min * std::pow(2.0, static_cast<double>(d) / bins_per_octave);
}

void CqtConfig::validate() const {
    if (!(sample_rate > 0)) throw std::invalid_argument("cqt: sample_rate must be positive");
    if (!(hop_s > 0) || !(frame_s > 0) || hop_s > frame_s)
        throw std::invalid_argument("cqt: need 0 < hop_s <= frame_s");
    if (!(f_min > 0) || f_max <= f_min)
        throw std::invalid_argument("cqt: need 0 < f_min < f_max");
    if (f_max >= sample_rate / 2)
        throw std::invalid_argument("cqt: f_max must be below Nyquist");
    if (!(quality > 0)) throw std::invalid_argument("cqt: quality must be positive");
    const int d = bins();
    const double top = bin_freq(d - 1);
    if (std::abs(top - f_max) > 1e-6 * f_max)
        throw std::invalid_argument("cqt: f_max must sit on the semitone grid above f_min");
}

FeatureFrame normalize(FeatureFrame frame) {
    double sum = 0.0;
    for (double v : frame.values) sum += v;
    if (sum < 1e-12) {
        const double u = 1.0 / static_cast<double>(frame.values.size());
        for (double& v : frame.values) v = u;
    } else {
        for (double& v : frame.values) v /= sum;
    }
    return frame;
}

CqtAnalyzer::CqtAnalyzer(CqtConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    const int frame_len = cfg_.frame_samples();
    const int d_total = cfg_.bins();
    kernels_.resize(static_cast<std::size_t>(d_total));
    for (int d = 0; d < d_total; ++d) {
        const double f = cfg_.bin_freq(d);
        int n_taps = static_cast<int>(std::ceil(cfg_.quality * cfg_.sample_rate / f));
        n_taps = std::min(n_taps, frame_len);  // low bins truncate to the frame
        n_taps = std::max(n_taps, 2);
        Kernel& k = kernels_[static_cast<std::size_t>(d)];
        k.start = (frame_len - n_taps) / 2;
        k.taps.resize(static_cast<std::size_t>(n_taps));
        double wsum = 0.0;
        const double omega = 2.0 * std::numbers::pi * f / cfg_.sample_rate;
        for (int n = 0; n < n_taps; ++n) {
            const double w =
                0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / (n_taps - 1));
            wsum += w;
            k.taps[static_cast<std::size_t>(n)] =
                std::polar(w, -omega * static_cast<double>(n));
        }
        for (auto& tap : k.taps) tap /= wsum;
    }
}

FeatureFrame CqtAnalyzer::frame(std::span<const float> samples, int t, Exec exec) const {
    const int frame_len = cfg_.frame_samples();
    if (static_cast<int>(samples.size()) != frame_len)
        throw std::invalid_argument("cqt_frame: expected " + std::to_string(frame_len) +
                                    " samples, got " + std::to_string(samples.size()));
    FeatureFrame out;
    out.t = t;
    out.time_s = t * cfg_.hop_s;
    out.values.resize(kernels_.size());

    auto bin = [&](int d) {
        const Kernel& k = kernels_[static_cast<std::size_t>(d)];
        double re = 0.0, im = 0.0;
        const float* x = samples.data() + k.start;
        const std::size_t n_taps = k.taps.size();
        for (std::size_t n = 0; n < n_taps; ++n) {
            const double v = static_cast<double>(x[n]);
            re += v * k.taps[n].real();
            im += v * k.taps[n].imag();
        }
        out.values[static_cast<std::size_t>(d)] = std::hypot(re, im);
    };

    const int d_total = static_cast<int>(kernels_.size());
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (int d = 0; d < d_total; ++d) bin(d);
    } else {
        for (int d = 0; d < d_total; ++d) bin(d);
    }
    return out;
}

std::vector<FeatureFrame> stream_frames(std::span<const float> samples,
                                        double sample_rate,
                                        const CqtAnalyzer& analyzer, Exec exec) {
    const CqtConfig& cfg = analyzer.config();
    if (std::abs(sample_rate - cfg.sample_rate) > 1e-9)
        throw parse_error("sample-rate mismatch: stream at " + std::to_string(sample_rate) +
                          " Hz, analyzer expects " + std::to_string(cfg.sample_rate));
    const std::size_t hop = static_cast<std::size_t>(cfg.hop_samples());
    const std::size_t frame_len = static_cast<std::size_t>(cfg.frame_samples());
    const std::size_t n = samples.size();
    const std::size_t n_frames = n == 0 ? 0 : (n + hop - 1) / hop;

    std::vector<FeatureFrame> frames;
    frames.reserve(n_frames);
    std::vector<float> window(frame_len);
    for (std::size_t t = 0; t < n_frames; ++t) {
        const std::size_t begin = t * hop;
        const std::size_t avail = begin < n ? std::min(frame_len, n - begin) : 0;
        std::copy(samples.begin() + static_cast<std::ptrdiff_t>(begin),
                  samples.begin() + static_cast<std::ptrdiff_t>(begin + avail),
                  window.begin());
        std::fill(window.begin() + static_cast<std::ptrdiff_t>(avail), window.end(), 0.0f);
        frames.push_back(normalize(analyzer.frame(window, static_cast<int>(t), exec)));
    }
    return frames;
}

}  // namespace scofo
