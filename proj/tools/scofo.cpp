// scofo - monophonic score following over feature streams, files, or stdin,
// plus the simulation / training / benchmarking tools around it.
//
// Exit codes: 0 ok, 1 usage, 2 input parse/IO error, 3 runtime error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include "scofo/bench.hpp"
#include "scofo/forward.hpp"
#include "scofo/io.hpp"
#include "scofo/metrics.hpp"
#include "scofo/model.hpp"
#include "scofo/simulate.hpp"
#include "scofo/wav.hpp"

namespace {

using namespace scofo;
namespace fs = std::filesystem;

// Sub-underflow probabilities are only accepted as log10 values; plain
// doubles would silently parse to 0.0. "-inf" selects exactly zero.
double parse_log10(const std::string& text, const std::string& flag) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw CLI::ValidationError(flag, "expected a number or -inf, got '" + text + "'");
    }
}

struct RunConfig {
    ModelConfig model;
    std::string algorithm = "break";
    std::string log10_s_text = "-100";
    double log10_C = -50.0;
    double floor_value = 1e-4;
    double delta_ms = 300.0;
    double hop_ms = 20.0;
    double frame_ms = 128.0;
    bool pause_states = false;
    std::uint64_t seed = 1;
    int threads = 0;
    bool parallel = false;
    std::string config_path;

    Exec exec() const { return parallel ? Exec::Parallel : Exec::Serial; }

    void finalize() {
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw parse_error("cannot open config " + config_path);
            std::stringstream buf;
            buf << in.rdbuf();
            model = model_config_from_json(buf.str());
        }
        model.hop_s = hop_ms / 1000.0;
        model.frame_s = frame_ms / 1000.0;
        model.log10_s = parse_log10(log10_s_text, "--log10-s");
        model.pause_states = pause_states;
        const Algorithm alg = algorithm_from_string(algorithm);
        model.variant = alg == Algorithm::Break  ? TopologyVariant::Break
                        : alg == Algorithm::NoBreak ? TopologyVariant::NoBreak
                                                    : TopologyVariant::NoBreak;
        if (threads > 0) omp_set_num_threads(threads);
    }

    CqtConfig cqt() const {
        CqtConfig cfg;
        cfg.hop_s = hop_ms / 1000.0;
        cfg.frame_s = frame_ms / 1000.0;
        return cfg;
    }
};

void add_shared_flags(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--algorithm", cfg.algorithm, "baseline | nobreak | break")
        ->check(CLI::IsMember({"baseline", "nobreak", "break"}));
    cmd->add_option("--log10-s", cfg.log10_s_text,
                    "stop probability s as log10 (-inf for exactly 0)");
    cmd->add_option("--pitch-error-log10-C", cfg.log10_C,
                    "pitch-error probability C as log10");
    cmd->add_option("--floor", cfg.floor_value, "variance flooring value F");
    cmd->add_option("--delta-ms", cfg.delta_ms, "onset tolerance for PPR reports");
    cmd->add_flag("--pause-states", cfg.pause_states,
                  "add a silence-emitting pause state per event (L = 2)");
    cmd->add_option("--seed", cfg.seed, "RNG seed");
    cmd->add_option("--hop-ms", cfg.hop_ms, "hop size in milliseconds");
    cmd->add_option("--frame-ms", cfg.frame_ms, "analysis frame in milliseconds");
    cmd->add_option("--config", cfg.config_path, "model config JSON (flags override)");
    cmd->add_option("--threads", cfg.threads, "OpenMP thread count (0 = library default)");
    cmd->add_flag("--parallel", cfg.parallel, "run the OpenMP kernels");
}

PitchModelSet resolve_models(const std::string& model_path, const RunConfig& cfg) {
    if (!model_path.empty()) return load_models(model_path);
    return synth_model_set(cfg.cqt(), cfg.floor_value);
}

int cmd_align(const std::string& score_path, const std::string& feature_path,
              const std::string& audio_path, bool use_stdin,
              const std::string& model_path, const std::string& truth_path,
              const std::string& out_path, RunConfig& cfg) {
    cfg.finalize();
    const Score score = load_score(score_path);
    const PitchModelSet models = resolve_models(model_path, cfg);
    const StandardHmm hmm = flatten(build_performance_hmm(score, cfg.model));
    const EmissionTable emissions(hmm, models, cfg.log10_C);
    const Algorithm alg = algorithm_from_string(cfg.algorithm);

    if (use_stdin) {
        // JSONL feature frames in, JSONL estimates out, one line per frame.
        Follower follower(hmm, emissions, alg, cfg.exec());
        std::string line;
        int t = 0;
        while (std::getline(std::cin, line)) {
            if (line.empty()) continue;
            const FeatureFrame frame = feature_frame_from_json_line(line, t++);
            const PositionEstimate est = follower.push(frame);
            nlohmann::json out;
            out["t"] = est.frame;
            out["time_s"] = est.frame * hmm.hop_s;
            out["event"] = est.event;
            out["bottom"] = est.bottom;
            out["suspended"] = est.suspended;
            std::cout << out.dump() << std::endl;
        }
        if (!out_path.empty()) save_trace_jsonl(out_path, follower.trace());
        return 0;
    }

    std::vector<FeatureFrame> frames;
    if (!feature_path.empty()) {
        frames = load_features(feature_path);
    } else if (!audio_path.empty()) {
        const WavData wav = read_wav(audio_path);
        const CqtAnalyzer analyzer(cfg.cqt());
        frames = stream_frames(wav.samples, wav.sample_rate, analyzer, cfg.exec());
    } else {
        throw CLI::ValidationError("align", "need --features, --audio, or --stdin");
    }
    if (frames.empty()) throw parse_error("no feature frames in input");

    const AlignmentTrace trace = follow(hmm, emissions, frames, alg, cfg.exec());
    if (!out_path.empty()) save_trace_jsonl(out_path, trace);

    double mean_s = 0.0;
    for (double v : trace.frame_total_s) mean_s += v;
    mean_s /= static_cast<double>(trace.frame_total_s.size());
    std::cout << "frames: " << trace.frames.size() << "\n"
              << "final event: " << trace.frames.back().event << " / " << score.size() - 1
              << "\n"
              << "mean frame time: " << mean_s * 1000.0 << " ms\n";
    if (!truth_path.empty()) {
        const GroundTruth truth = load_truth_jsonl(truth_path, hmm.hop_s);
        const PprResult r = ppr(trace, truth, cfg.delta_ms);
        std::cout << "ppr(delta=" << cfg.delta_ms << " ms): " << r.rate << " ("
                  << r.detected << "/" << r.total << " onsets)\n";
        const RepeatSkipReport rs = repeat_skip_report(trace, truth);
        if (rs.total > 0)
            std::cout << "repeats/skips detected: " << rs.detected << "/" << rs.total
                      << ", median following time: "
                      << median(rs.following_times_s) << " s\n";
    }
    return 0;
}

int cmd_simulate(const std::string& score_path, const std::string& out_dir,
                 const std::string& model_path, double p_jump, bool errors_on,
                 bool jumps_on, int max_jumps, bool write_audio, RunConfig& cfg) {
    cfg.finalize();
    const Score score = load_score(score_path);
    const PitchModelSet models = resolve_models(model_path, cfg);

    const ErrorRates rates = errors_on ? ErrorRates{} : ErrorRates::none();
    std::cout << "error rates: delete=" << rates.p_delete << " insert=" << rates.p_insert
              << " sub(semitone)=" << rates.p_sub_semitone
              << " sub(wholetone)=" << rates.p_sub_wholetone
              << " sub(perfect12)=" << rates.p_sub_perfect12 << "\n";

    std::vector<PerformedNote> perf = inject_errors(score, rates, cfg.seed);
    GroundTruth truth;
    if (jumps_on) {
        JumpConfig jc;
        jc.p_jump = p_jump;
        jc.max_jumps = max_jumps;
        auto [jumped, t] = inject_repeats_skips(perf, jc, cfg.seed + 1);
        perf = std::move(jumped);
        truth = std::move(t);
        std::cout << "repeats/skips: " << truth.jumps.size() << "\n";
    }
    const std::vector<FeatureFrame> frames =
        render_features(perf, models, cfg.model.hop_s, cfg.seed + 2, truth);

    fs::create_directories(out_dir);
    save_performance(fs::path(out_dir) / "performance.json", perf, rates, cfg.seed);
    save_features(fs::path(out_dir) / "features.jsonl", frames);
    save_truth_jsonl(fs::path(out_dir) / "truth.jsonl", truth);
    if (write_audio) {
        const auto samples = render_audio(perf, cfg.seed + 3);
        write_wav(fs::path(out_dir) / "audio.wav", samples, 16000);
    }
    std::cout << "wrote " << frames.size() << " frames to " << out_dir << "\n";
    return 0;
}

int cmd_bench(const std::string& n_list_text, const std::string& algorithms,
              const std::string& mode, int frames, const std::string& out_path,
              RunConfig& cfg) {
    cfg.finalize();
    BenchConfig bc;
    bc.frames = frames;
    bc.pause_states = cfg.pause_states;
    bc.log10_s = cfg.model.log10_s;
    bc.seed = cfg.seed;

    bc.n_list.clear();
    std::stringstream ss(n_list_text);
    std::string cell;
    while (std::getline(ss, cell, ','))
        if (!cell.empty()) bc.n_list.push_back(std::stoi(cell));
    if (bc.n_list.empty()) throw CLI::ValidationError("--n-list", "no event counts given");

    bc.algorithms.clear();
    if (algorithms == "all") {
        bc.algorithms = {Algorithm::Baseline, Algorithm::NoBreak, Algorithm::Break};
    } else {
        std::stringstream as(algorithms);
        while (std::getline(as, cell, ','))
            if (!cell.empty()) bc.algorithms.push_back(algorithm_from_string(cell));
    }

    bc.modes.clear();
    if (mode == "serial" || mode == "both") bc.modes.push_back(Exec::Serial);
    if (mode == "parallel" || mode == "both") bc.modes.push_back(Exec::Parallel);
    if (bc.modes.empty())
        throw CLI::ValidationError("--mode", "expected serial, parallel, or both");

    const BenchResult result = run_bench(bc);
    const std::string csv = bench_csv(result);
    if (out_path.empty()) {
        std::cout << csv;
    } else {
        std::ofstream out(out_path);
        if (!out) throw parse_error("cannot write " + out_path);
        out << csv;
        std::cout << "wrote " << out_path << "\n";
    }
    for (const auto& [key, slope] : result.slope_kernel)
        std::cout << "slope(kernel) " << key.algorithm << "/" << key.mode << ": " << slope
                  << "\n";
    return 0;
}

int cmd_train(const std::string& data_path, const std::string& out_path, RunConfig& cfg) {
    cfg.finalize();
    const auto labeled = load_labeled_features(data_path);
    const PitchModelSet set = train_pitch_models(labeled, cfg.floor_value, cfg.cqt());
    save_models(out_path, set);
    std::cout << "trained on " << labeled.size() << " frames, wrote " << out_path << "\n";
    return 0;
}

int cmd_synthmodel(const std::string& out_path, RunConfig& cfg) {
    cfg.finalize();
    save_models(out_path, synth_model_set(cfg.cqt(), cfg.floor_value));
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"monophonic audio-to-score follower"};
    app.require_subcommand(1);

    RunConfig cfg;

    // align
    std::string score_path, feature_path, audio_path, model_path, truth_path;
    std::string out_path = "trace.jsonl";
    bool use_stdin = false;
    CLI::App* align = app.add_subcommand("align", "align features or audio to a score");
    align->add_option("--score", score_path, "score JSON")->required();
    align->add_option("--features", feature_path, "feature dump (.jsonl or .csv)");
    align->add_option("--audio", audio_path, "16 kHz mono 16-bit WAV");
    align->add_flag("--stdin", use_stdin, "stream JSONL feature frames from stdin");
    align->add_option("--model", model_path, "pitch model JSON (default: synthetic)");
    align->add_option("--truth", truth_path, "ground truth JSONL for a PPR summary");
    align->add_option("--out", out_path, "trace JSONL output");
    add_shared_flags(align, cfg);

    // simulate
    std::string sim_out_dir = "sim";
    double p_jump = 0.1;
    std::string errors_text = "on";
    std::string jumps_text = "on";
    int max_jumps = 4;
    bool write_audio = false;
    CLI::App* simulate = app.add_subcommand("simulate", "synthesize an errorful performance");
    simulate->add_option("--score", score_path, "score JSON")->required();
    simulate->add_option("--out-dir", sim_out_dir, "output directory");
    simulate->add_option("--model", model_path, "pitch model JSON (default: synthetic)");
    simulate->add_option("--p-jump", p_jump, "repeat/skip probability per boundary");
    simulate->add_option("--errors", errors_text, "on | off")
        ->check(CLI::IsMember({"on", "off"}));
    simulate->add_option("--jumps", jumps_text, "on | off")
        ->check(CLI::IsMember({"on", "off"}));
    simulate->add_option("--max-jumps", max_jumps, "cap on injected repeats/skips");
    simulate->add_flag("--audio", write_audio, "also render audio.wav");
    add_shared_flags(simulate, cfg);

    // bench
    std::string n_list = "10,100,1000,10000";
    std::string algorithms = "all";
    std::string mode = "serial";
    int frames = 100;
    std::string bench_out;
    CLI::App* bench = app.add_subcommand("bench", "per-frame processing time vs score size");
    bench->add_option("--n-list", n_list, "comma-separated event counts");
    bench->add_option("--algorithms", algorithms, "all or comma-separated subset");
    bench->add_option("--mode", mode, "serial | parallel | both")
        ->check(CLI::IsMember({"serial", "parallel", "both"}));
    bench->add_option("--frames", frames, "frames per measurement (>= 100 for reports)");
    bench->add_option("--out", bench_out, "CSV output path (default: stdout)");
    add_shared_flags(bench, cfg);

    // train / synthmodel
    std::string data_path;
    std::string model_out = "model.json";
    CLI::App* train = app.add_subcommand("train", "fit pitch models from labeled frames");
    train->add_option("--data", data_path, "labeled JSONL {pitch, values}")->required();
    train->add_option("--out", model_out, "model JSON output");
    add_shared_flags(train, cfg);

    CLI::App* synthmodel =
        app.add_subcommand("synthmodel", "write the synthetic template model set");
    synthmodel->add_option("--out", model_out, "model JSON output");
    add_shared_flags(synthmodel, cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (app.got_subcommand(align))
            return cmd_align(score_path, feature_path, audio_path, use_stdin, model_path,
                             truth_path, out_path, cfg);
        if (app.got_subcommand(simulate))
            return cmd_simulate(score_path, sim_out_dir, model_path, p_jump,
                                errors_text == "on", jumps_text == "on", max_jumps,
                                write_audio, cfg);
        if (app.got_subcommand(bench))
            return cmd_bench(n_list, algorithms, mode, frames, bench_out, cfg);
        if (app.got_subcommand(train)) return cmd_train(data_path, model_out, cfg);
        if (app.got_subcommand(synthmodel)) return cmd_synthmodel(model_out, cfg);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}
