#include "scofo/score.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace scofo {

using nlohmann::json;

int parse_pitch_name(const std::string& name) {
    static constexpr int kBase[] = {9, 11, 0, 2, 4, 5, 7};  // A..G
    if (name.empty()) throw parse_error("empty pitch name");
    const char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
    if (letter < 'A' || letter > 'G')
        throw parse_error("unknown pitch name '" + name + "'");
    int semitone = kBase[letter - 'A'];
    std::size_t pos = 1;
    while (pos < name.size() && (name[pos] == '#' || name[pos] == 'b')) {
        semitone += name[pos] == '#' ? 1 : -1;
        ++pos;
    }
    if (pos >= name.size())
        throw parse_error("pitch name '" + name + "' is missing an octave");
    int octave = 0;
    try {
        std::size_t used = 0;
        octave = std::stoi(name.substr(pos), &used);
        if (pos + used != name.size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
        throw parse_error("bad octave in pitch name '" + name + "'");
    }
    const int midi = (octave + 1) * 12 + semitone;
    if (midi < kPitchMin || midi > kPitchMax)
        throw parse_error("pitch '" + name + "' is outside A0..C8");
    return midi;
}

std::string pitch_name(int k) {
    if (k == kRestPitch) return "rest";
    static const char* kNames[] = {"C",  "C#", "D",  "D#", "E",  "F",
                                   "F#", "G",  "G#", "A",  "A#", "B"};
    const int octave = k / 12 - 1;
    return std::string(kNames[k % 12]) + std::to_string(octave);
}

double Score::total_seconds() const {
    double total = 0.0;
    for (const auto& e : events) total += e.beats * 60.0 / tempo_bpm;
    return total;
}

namespace {

int parse_pitch_field(const json& value, int index) {
    const std::string where = "event " + std::to_string(index);
    if (value.is_number_integer()) {
        const int k = value.get<int>();
        if (!pitch_in_range(k))
            throw parse_error(where + ": pitch " + std::to_string(k) +
                              " is outside {21..108} u {-1}");
        return k;
    }
    if (value.is_string()) {
        const std::string s = value.get<std::string>();
        if (s == "rest") return kRestPitch;
        try {
            return parse_pitch_name(s);
        } catch (const parse_error& e) {
            throw parse_error(where + ": " + e.what());
        }
    }
    throw parse_error(where + ": pitch must be a MIDI integer, a name, or \"rest\"");
}

}  // namespace

Score parse_score(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw parse_error(std::string("score: ") + e.what());
    }
    Score score;
    if (!doc.contains("tempo_bpm") || !doc["tempo_bpm"].is_number())
        throw parse_error("score: missing numeric tempo_bpm");
    score.tempo_bpm = doc["tempo_bpm"].get<double>();
    if (!(score.tempo_bpm > 0)) throw parse_error("score: tempo_bpm must be positive");
    if (!doc.contains("events") || !doc["events"].is_array())
        throw parse_error("score: missing events array");
    const auto& events = doc["events"];
    if (events.empty()) throw parse_error("empty score");
    int index = 0;
    for (const auto& ev : events) {
        ScoreEvent e;
        e.index = index;
        e.pitch = parse_pitch_field(ev.at("pitch"), index);
        if (!ev.contains("beats") || !ev["beats"].is_number())
            throw parse_error("event " + std::to_string(index) + ": missing numeric beats");
        e.beats = ev["beats"].get<double>();
        if (!(e.beats > 0))
            throw parse_error("event " + std::to_string(index) +
                              ": note value must be positive");
        score.events.push_back(e);
        ++index;
    }
    return score;
}

Score load_score(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open score file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_score(buf.str());
}

std::string score_to_json(const Score& score) {
    json doc;
    doc["tempo_bpm"] = score.tempo_bpm;
    doc["events"] = json::array();
    for (const auto& e : score.events)
        doc["events"].push_back({{"pitch", e.pitch}, {"beats", e.beats}});
    return doc.dump(2);
}

}  // namespace scofo
