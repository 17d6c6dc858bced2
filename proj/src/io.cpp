#include "scofo/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "scofo/common.hpp"

namespace scofo {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw parse_error("cannot write " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open " + path.string());
    return in;
}

json parse_line(const std::string& line, const std::filesystem::path& path, int lineno) {
    try {
        return json::parse(line);
    } catch (const json::parse_error& e) {
        throw parse_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
}

std::string kind_name(NoteKind kind) {
    switch (kind) {
        case NoteKind::Correct: return "correct";
        case NoteKind::Substitution: return "substitution";
        case NoteKind::Insertion: return "insertion";
        case NoteKind::Pause: return "pause";
        case NoteKind::Break: return "break";
    }
    return "?";
}

NoteKind kind_from_name(const std::string& s) {
    if (s == "correct") return NoteKind::Correct;
    if (s == "substitution") return NoteKind::Substitution;
    if (s == "insertion") return NoteKind::Insertion;
    if (s == "pause") return NoteKind::Pause;
    if (s == "break") return NoteKind::Break;
    throw parse_error("unknown note kind '" + s + "'");
}

}  // namespace

void save_trace_jsonl(const std::filesystem::path& path, const AlignmentTrace& trace) {
    std::ofstream out = open_out(path);
    for (const PositionEstimate& est : trace.frames) {
        json line;
        line["t"] = est.frame;
        line["time_s"] = trace.frame_time(est.frame);
        line["event"] = est.event;
        line["bottom"] = est.bottom;
        if (std::isfinite(est.log_posterior_gap))
            line["gap"] = est.log_posterior_gap;
        else
            line["gap"] = nullptr;
        line["suspended"] = est.suspended;
        out << line.dump() << '\n';
    }
}

AlignmentTrace load_trace_jsonl(const std::filesystem::path& path, double hop_s) {
    std::ifstream in = open_in(path);
    AlignmentTrace trace;
    trace.hop_s = hop_s;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const json doc = parse_line(line, path, lineno);
        PositionEstimate est;
        est.frame = doc.at("t").get<int>();
        est.event = doc.at("event").get<int>();
        est.bottom = doc.value("bottom", 0);
        est.suspended = doc.value("suspended", false);
        if (doc.contains("gap") && !doc["gap"].is_null())
            est.log_posterior_gap = doc["gap"].get<double>();
        else
            est.log_posterior_gap = std::numeric_limits<double>::infinity();
        trace.frames.push_back(est);
    }
    return trace;
}

void save_truth_jsonl(const std::filesystem::path& path, const GroundTruth& truth) {
    std::ofstream out = open_out(path);
    json header;
    header["jumps"] = json::array();
    for (const Jump& j : truth.jumps)
        header["jumps"].push_back(
            {{"time_s", j.time_s}, {"from", j.from_event}, {"to", j.to_event}});
    out << header.dump() << '\n';
    for (std::size_t t = 0; t < truth.frame_event.size(); ++t)
        out << json{{"t", t}, {"event", truth.frame_event[t]}}.dump() << '\n';
}

GroundTruth load_truth_jsonl(const std::filesystem::path& path, double hop_s) {
    std::ifstream in = open_in(path);
    GroundTruth truth;
    truth.hop_s = hop_s;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const json doc = parse_line(line, path, lineno);
        if (doc.contains("jumps")) {
            for (const auto& j : doc["jumps"])
                truth.jumps.push_back({j.at("time_s").get<double>(),
                                       j.at("from").get<int>(), j.at("to").get<int>()});
            continue;
        }
        truth.frame_event.push_back(doc.at("event").get<int>());
    }
    return truth;
}

void save_features(const std::filesystem::path& path,
                   const std::vector<FeatureFrame>& frames) {
    std::ofstream out = open_out(path);
    if (path.extension() == ".csv") {
        out << "t,time_s";
        const int dims = frames.empty() ? 0 : frames.front().dims();
        for (int d = 0; d < dims; ++d) out << ",v" << d;
        out << '\n';
        out.precision(17);
        for (const FeatureFrame& f : frames) {
            out << f.t << ',' << f.time_s;
            for (double v : f.values) out << ',' << v;
            out << '\n';
        }
        return;
    }
    for (const FeatureFrame& f : frames) {
        json line;
        line["t"] = f.t;
        line["time_s"] = f.time_s;
        line["values"] = f.values;
        out << line.dump() << '\n';
    }
}

FeatureFrame feature_frame_from_json_line(const std::string& line, int fallback_t) {
    json doc;
    try {
        doc = json::parse(line);
    } catch (const json::parse_error& e) {
        throw parse_error(std::string("feature line: ") + e.what());
    }
    FeatureFrame f;
    f.t = doc.value("t", fallback_t);
    f.values = doc.at("values").get<std::vector<double>>();
    f.time_s = doc.value("time_s", 0.0);
    return f;
}

std::vector<FeatureFrame> load_features(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    std::vector<FeatureFrame> frames;
    std::string line;
    int lineno = 0;
    if (path.extension() == ".csv") {
        while (std::getline(in, line)) {
            ++lineno;
            if (lineno == 1 || line.empty()) continue;  // header
            FeatureFrame f;
            std::stringstream row(line);
            std::string cell;
            int col = 0;
            while (std::getline(row, cell, ',')) {
                try {
                    if (col == 0)
                        f.t = std::stoi(cell);
                    else if (col == 1)
                        f.time_s = std::stod(cell);
                    else
                        f.values.push_back(std::stod(cell));
                } catch (const std::exception&) {
                    throw parse_error(path.string() + ":" + std::to_string(lineno) +
                                      ": bad numeric cell '" + cell + "'");
                }
                ++col;
            }
            frames.push_back(std::move(f));
        }
        return frames;
    }
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            frames.push_back(
                feature_frame_from_json_line(line, static_cast<int>(frames.size())));
        } catch (const parse_error& e) {
            throw parse_error(path.string() + ":" + std::to_string(lineno) + ": " +
                              e.what());
        }
    }
    return frames;
}

void save_performance(const std::filesystem::path& path,
                      const std::vector<PerformedNote>& perf,
                      const ErrorRates& rates, std::uint64_t seed) {
    json doc;
    doc["seed"] = seed;
    doc["rates"] = {{"delete", rates.p_delete},
                    {"insert", rates.p_insert},
                    {"sub_semitone", rates.p_sub_semitone},
                    {"sub_wholetone", rates.p_sub_wholetone},
                    {"sub_perfect12", rates.p_sub_perfect12}};
    doc["notes"] = json::array();
    for (const PerformedNote& n : perf)
        doc["notes"].push_back({{"score_event", n.score_event},
                                {"pitch", n.played_pitch},
                                {"start_s", n.start_s},
                                {"end_s", n.end_s},
                                {"kind", kind_name(n.kind)}});
    std::ofstream out = open_out(path);
    out << doc.dump(2) << '\n';
}

std::vector<PerformedNote> load_performance(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    std::stringstream buf;
    buf << in.rdbuf();
    json doc;
    try {
        doc = json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw parse_error(path.string() + ": " + e.what());
    }
    std::vector<PerformedNote> perf;
    for (const auto& n : doc.at("notes"))
        perf.push_back({n.at("score_event").get<int>(), n.at("pitch").get<int>(),
                        n.at("start_s").get<double>(), n.at("end_s").get<double>(),
                        kind_from_name(n.at("kind").get<std::string>())});
    return perf;
}

std::vector<std::pair<int, FeatureFrame>> load_labeled_features(
    const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    std::vector<std::pair<int, FeatureFrame>> labeled;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const json doc = parse_line(line, path, lineno);
        int pitch;
        const auto& p = doc.at("pitch");
        if (p.is_string())
            pitch = p.get<std::string>() == "rest" ? kRestPitch
                                                   : parse_pitch_name(p.get<std::string>());
        else
            pitch = p.get<int>();
        FeatureFrame f;
        f.t = static_cast<int>(labeled.size());
        f.values = doc.at("values").get<std::vector<double>>();
        labeled.emplace_back(pitch, std::move(f));
    }
    return labeled;
}

void save_labeled_features(const std::filesystem::path& path,
                           std::span<const std::pair<int, FeatureFrame>> labeled) {
    std::ofstream out = open_out(path);
    for (const auto& [pitch, frame] : labeled) {
        json line;
        line["pitch"] = pitch;
        line["values"] = frame.values;
        out << line.dump() << '\n';
    }
}

}  // namespace scofo
