#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scofo/forward.hpp"

namespace scofo {

// One measurement cell: mean per-frame processing time for (N, algorithm,
// execution mode), averaged over at least 100 frames. Total time covers
// emission + forward update + readout; kernel time covers the forward
// update alone, which is what the complexity claim is about.
struct BenchRow {
    int n_events = 0;
    std::string algorithm;
    std::string mode;  // "serial" | "parallel"
    int threads = 1;
    int frames = 0;
    double mean_frame_s = 0.0;
    double stderr_s = 0.0;
    double kernel_mean_s = 0.0;
    double kernel_stderr_s = 0.0;
};

struct BenchConfig {
    std::vector<int> n_list = {10, 100, 1000, 10000};
    std::vector<Algorithm> algorithms = {Algorithm::Baseline, Algorithm::NoBreak,
                                         Algorithm::Break};
    std::vector<Exec> modes = {Exec::Serial};
    int frames = 100;
    bool pause_states = false;
    double log10_s = -100.0;
    std::uint64_t seed = 1;
};

struct SlopeKey {
    std::string algorithm;
    std::string mode;
    auto operator<=>(const SlopeKey&) const = default;
};

struct BenchResult {
    std::vector<BenchRow> rows;
    // Fitted log-log slopes of mean time vs N, per (algorithm, mode).
    std::vector<std::pair<SlopeKey, double>> slope_total;
    std::vector<std::pair<SlopeKey, double>> slope_kernel;

    double slope(const std::vector<std::pair<SlopeKey, double>>& table,
                 const std::string& algorithm, const std::string& mode) const;
};

// Random synthetic score per N, synthetic pitch models, and a 2 s random
// signal run through the CQT front end as input. Measurements run one cell
// at a time on the calling thread.
BenchResult run_bench(const BenchConfig& cfg);

// Least-squares slope of log(y) against log(x).
double fit_loglog_slope(std::span<const double> x, std::span<const double> y);

std::string bench_csv(const BenchResult& result);

}  // namespace scofo
