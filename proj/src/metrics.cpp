#include "scofo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace scofo {

PprResult ppr(const AlignmentTrace& trace, const GroundTruth& truth, double delta_ms) {
    if (trace.frames.size() != truth.frame_event.size())
        throw std::invalid_argument("ppr: trace and truth cover different timelines");
    const double hop = truth.hop_s;
    const double delta_s = delta_ms / 1000.0;
    const int n_frames = static_cast<int>(truth.frame_event.size());

    PprResult result;
    result.delta_ms = delta_ms;
    for (int t = 0; t < n_frames; ++t) {
        const int event = truth.frame_event[static_cast<std::size_t>(t)];
        if (event < 0) continue;
        if (t > 0 && truth.frame_event[static_cast<std::size_t>(t - 1)] == event) continue;

        // Onset of `event` at t*hop: detected iff the first frame reporting
        // it at or after the window start still falls inside the window.
        const double onset = t * hop;
        const int scan_from = std::max(
            0, static_cast<int>(std::ceil((onset - delta_s) / hop - 1e-9)));
        bool detected = false;
        for (int u = scan_from; u < n_frames; ++u) {
            const double time = u * hop;
            if (time > onset + delta_s + 1e-12) break;
            if (trace.frames[static_cast<std::size_t>(u)].event == event) {
                detected = true;
                break;
            }
        }
        ++result.total;
        if (detected) ++result.detected;
    }
    result.rate = result.total == 0
                      ? 1.0
                      : static_cast<double>(result.detected) / result.total;
    result.per_piece = {result.rate};
    return result;
}

PprResult ppr_mean(std::span<const PprResult> pieces, double delta_ms) {
    PprResult out;
    out.delta_ms = delta_ms;
    if (pieces.empty()) return out;
    double sum = 0.0;
    for (const PprResult& p : pieces) {
        sum += p.rate;
        out.per_piece.push_back(p.rate);
        out.detected += p.detected;
        out.total += p.total;
    }
    out.rate = sum / static_cast<double>(pieces.size());
    return out;
}

RepeatSkipReport repeat_skip_report(const AlignmentTrace& trace,
                                    const GroundTruth& truth) {
    if (trace.frames.size() != truth.frame_event.size())
        throw std::invalid_argument(
            "repeat_skip_report: trace and truth cover different timelines");
    const double hop = truth.hop_s;
    const int n_frames = static_cast<int>(truth.frame_event.size());

    RepeatSkipReport report;
    report.total = static_cast<int>(truth.jumps.size());
    for (std::size_t k = 0; k < truth.jumps.size(); ++k) {
        const double resume = truth.jumps[k].time_s;
        const double next = k + 1 < truth.jumps.size()
                                ? truth.jumps[k + 1].time_s
                                : std::numeric_limits<double>::infinity();
        const int from = std::max(0, static_cast<int>(std::ceil(resume / hop - 1e-9)));
        for (int t = from; t < n_frames; ++t) {
            const double time = t * hop;
            if (time >= next) break;
            const int event = truth.frame_event[static_cast<std::size_t>(t)];
            if (event < 0) continue;
            if (trace.frames[static_cast<std::size_t>(t)].event == event) {
                ++report.detected;
                report.following_times_s.push_back(time - resume);
                break;
            }
        }
    }
    return report;
}

double median(std::vector<double> xs) {
    if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(xs.begin(), xs.end());
    const std::size_t mid = xs.size() / 2;
    if (xs.size() % 2 == 1) return xs[mid];
    return 0.5 * (xs[mid - 1] + xs[mid]);
}

}  // namespace scofo
