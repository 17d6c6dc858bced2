#include "scofo/bench.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include <omp.h>

#include "scofo/cqt.hpp"
#include "scofo/model.hpp"

namespace scofo {

double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_loglog_slope: need at least two points");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double BenchResult::slope(const std::vector<std::pair<SlopeKey, double>>& table,
                          const std::string& algorithm, const std::string& mode) const {
    for (const auto& [key, value] : table)
        if (key.algorithm == algorithm && key.mode == mode) return value;
    throw std::invalid_argument("bench: no slope for " + algorithm + "/" + mode);
}

namespace {

Score random_score(int n_events, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pitch(kPitchMin, kPitchMax);
    Score score;
    score.tempo_bpm = 120.0;
    int prev = -1;
    for (int i = 0; i < n_events; ++i) {
        int p = pitch(rng);
        while (p == prev) p = pitch(rng);
        prev = p;
        score.events.push_back({i, p, 0.5});
    }
    return score;
}

struct Stats {
    double mean = 0.0;
    double stderr_mean = 0.0;
};

Stats stats_of(std::span<const double> xs) {
    Stats s;
    if (xs.empty()) return s;
    for (double v : xs) s.mean += v;
    s.mean /= static_cast<double>(xs.size());
    if (xs.size() < 2) return s;
    double var = 0.0;
    for (double v : xs) var += (v - s.mean) * (v - s.mean);
    var /= static_cast<double>(xs.size() - 1);
    s.stderr_mean = std::sqrt(var / static_cast<double>(xs.size()));
    return s;
}

}  // namespace

BenchResult run_bench(const BenchConfig& cfg) {
    if (cfg.frames < 1) throw std::invalid_argument("bench: need at least one frame");

    CqtAnalyzer analyzer;
    PitchModelSet models = synth_model_set(analyzer.config(), 1e-4);

    // Two seconds of random signal through the CQT front end: 100 frames at
    // the default hop.
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<float> amp(-1.0f, 1.0f);
    std::vector<float> signal(static_cast<std::size_t>(2.0 * analyzer.config().sample_rate));
    for (float& v : signal) v = amp(rng);
    std::vector<FeatureFrame> frames =
        stream_frames(signal, analyzer.config().sample_rate, analyzer);
    const std::size_t base = frames.size();
    while (static_cast<int>(frames.size()) < cfg.frames) {
        FeatureFrame f = frames[frames.size() % base];
        f.t = static_cast<int>(frames.size());
        f.time_s = f.t * analyzer.config().hop_s;
        frames.push_back(std::move(f));
    }
    frames.resize(static_cast<std::size_t>(cfg.frames));

    BenchResult result;
    for (int n : cfg.n_list) {
        const Score score = random_score(n, cfg.seed + static_cast<std::uint64_t>(n));

        ModelConfig mc;
        mc.pause_states = cfg.pause_states;
        mc.log10_s = cfg.log10_s;

        mc.variant = TopologyVariant::NoBreak;
        const StandardHmm nobreak = flatten(build_performance_hmm(score, mc));
        mc.variant = TopologyVariant::Break;
        const StandardHmm brk = flatten(build_performance_hmm(score, mc));
        const EmissionTable emis_nobreak(nobreak, models, -50.0);
        const EmissionTable emis_break(brk, models, -50.0);

        for (Algorithm alg : cfg.algorithms) {
            const bool use_break = alg == Algorithm::Break;
            const StandardHmm& hmm = use_break ? brk : nobreak;
            const EmissionTable& emis = use_break ? emis_break : emis_nobreak;
            for (Exec mode : cfg.modes) {
                Follower follower(hmm, emis, alg, mode);
                for (const FeatureFrame& f : frames) follower.push(f);
                const AlignmentTrace& trace = follower.trace();
                const Stats total = stats_of(trace.frame_total_s);
                const Stats kernel = stats_of(trace.frame_kernel_s);
                BenchRow row;
                row.n_events = n;
                row.algorithm = to_string(alg);
                row.mode = mode == Exec::Parallel ? "parallel" : "serial";
                row.threads = mode == Exec::Parallel ? omp_get_max_threads() : 1;
                row.frames = cfg.frames;
                row.mean_frame_s = total.mean;
                row.stderr_s = total.stderr_mean;
                row.kernel_mean_s = kernel.mean;
                row.kernel_stderr_s = kernel.stderr_mean;
                result.rows.push_back(std::move(row));
            }
        }
    }

    if (cfg.n_list.size() >= 2) {
        for (Algorithm alg : cfg.algorithms)
            for (Exec mode : cfg.modes) {
                const std::string alg_name = to_string(alg);
                const std::string mode_name = mode == Exec::Parallel ? "parallel" : "serial";
                std::vector<double> ns, totals, kernels;
                for (const BenchRow& row : result.rows)
                    if (row.algorithm == alg_name && row.mode == mode_name) {
                        ns.push_back(static_cast<double>(row.n_events));
                        totals.push_back(row.mean_frame_s);
                        kernels.push_back(row.kernel_mean_s);
                    }
                result.slope_total.push_back(
                    {{alg_name, mode_name}, fit_loglog_slope(ns, totals)});
                result.slope_kernel.push_back(
                    {{alg_name, mode_name}, fit_loglog_slope(ns, kernels)});
            }
    }
    return result;
}

std::string bench_csv(const BenchResult& result) {
    std::ostringstream out;
    out << "# machine: omp_max_threads=" << omp_get_max_threads()
        << " omp_num_procs=" << omp_get_num_procs()
#if defined(__VERSION__)
        << " compiler=" << __VERSION__
#endif
        << "\n";
    out << "n_events,algorithm,mode,threads,frames,mean_frame_s,stderr_s,"
           "kernel_mean_s,kernel_stderr_s,slope_total,slope_kernel\n";
    out.precision(9);
    for (const BenchRow& row : result.rows) {
        double st = std::numeric_limits<double>::quiet_NaN();
        double sk = std::numeric_limits<double>::quiet_NaN();
        for (const auto& [key, value] : result.slope_total)
            if (key.algorithm == row.algorithm && key.mode == row.mode) st = value;
        for (const auto& [key, value] : result.slope_kernel)
            if (key.algorithm == row.algorithm && key.mode == row.mode) sk = value;
        out << row.n_events << ',' << row.algorithm << ',' << row.mode << ','
            << row.threads << ',' << row.frames << ',' << row.mean_frame_s << ','
            << row.stderr_s << ',' << row.kernel_mean_s << ',' << row.kernel_stderr_s
            << ',' << st << ',' << sk << '\n';
    }
    return out.str();
}

}  // namespace scofo
