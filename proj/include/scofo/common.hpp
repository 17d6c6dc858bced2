#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace scofo {

// Raised for malformed input files (scores, models, feature dumps, WAV).
struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Execution policy for the data-parallel kernels. Serial is the reference
// path; Parallel runs the same arithmetic over OpenMP worker threads and
// produces bit-identical results for any thread count.
enum class Exec { Serial, Parallel };

// Pitch set: MIDI notes A0..C8 plus -1 for silence/rest.
inline constexpr int kRestPitch = -1;
inline constexpr int kPitchMin = 21;
inline constexpr int kPitchMax = 108;
inline constexpr int kPitchCount = kPitchMax - kPitchMin + 2;  // notes + rest

inline bool pitch_in_range(int k) {
    return k == kRestPitch || (k >= kPitchMin && k <= kPitchMax);
}

inline double midi_to_freq(int k) {
    return 440.0 * std::pow(2.0, (k - 69) / 12.0);
}

// "C4" -> 60, with #/b accidentals. Throws parse_error on anything else.
int parse_pitch_name(const std::string& name);
std::string pitch_name(int k);

}  // namespace scofo
