#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace scofo {

struct WavData {
    std::vector<float> samples;  // mono, [-1, 1]
    int sample_rate = 16000;
};

// 16-bit PCM mono only; anything else is rejected with parse_error.
WavData read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, std::span<const float> samples,
               int sample_rate);

}  // namespace scofo
