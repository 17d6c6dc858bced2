#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "scofo/common.hpp"

namespace scofo {

// One musical event: a note (MIDI pitch 21..108) or a rest (pitch -1),
// lasting note_value beats at the score tempo.
struct ScoreEvent {
    int index = 0;
    int pitch = kRestPitch;
    double beats = 1.0;
};

struct Score {
    std::vector<ScoreEvent> events;
    double tempo_bpm = 120.0;

    int size() const { return static_cast<int>(events.size()); }
    double event_seconds(int i) const {
        return events[static_cast<std::size_t>(i)].beats * 60.0 / tempo_bpm;
    }
    double total_seconds() const;
};

// Parses the JSON score format:
//   { "tempo_bpm": 120, "events": [ { "pitch": "C4"|60|"rest", "beats": 1.0 }, ... ] }
// Throws parse_error with a location for malformed input, unknown pitch
// names, non-positive note values, and empty event lists.
Score parse_score(const std::string& text);
Score load_score(const std::filesystem::path& path);
std::string score_to_json(const Score& score);

}  // namespace scofo
