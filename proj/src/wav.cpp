#include "scofo/wav.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "scofo/common.hpp"

namespace scofo {

namespace {

std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) |
           (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::string& out, std::uint16_t v) {
    for (int i = 0; i < 2; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

}  // namespace

WavData read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open WAV file " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    if (bytes.size() < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
        throw parse_error(path.string() + ": not a RIFF/WAVE file");

    WavData wav;
    bool have_fmt = false;
    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const char* id = bytes.data() + pos;
        const std::uint32_t size = read_u32(p + pos + 4);
        const std::size_t body = pos + 8;
        if (body + size > bytes.size()) throw parse_error(path.string() + ": truncated chunk");
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (size < 16) throw parse_error(path.string() + ": short fmt chunk");
            const std::uint16_t format = read_u16(p + body);
            const std::uint16_t channels = read_u16(p + body + 2);
            const std::uint32_t rate = read_u32(p + body + 4);
            const std::uint16_t bits = read_u16(p + body + 14);
            if (format != 1 || bits != 16)
                throw parse_error(path.string() + ": only 16-bit PCM is supported");
            if (channels != 1)
                throw parse_error(path.string() + ": only mono input is supported");
            wav.sample_rate = static_cast<int>(rate);
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            if (!have_fmt) throw parse_error(path.string() + ": data before fmt chunk");
            const std::size_t n = size / 2;
            wav.samples.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                const std::int16_t s = static_cast<std::int16_t>(
                    read_u16(p + body + 2 * i));
                wav.samples[i] = static_cast<float>(s) / 32768.0f;
            }
            return wav;
        }
        pos = body + size + (size & 1);
    }
    throw parse_error(path.string() + ": no data chunk");
}

void write_wav(const std::filesystem::path& path, std::span<const float> samples,
               int sample_rate) {
    std::string out;
    const std::uint32_t data_bytes = static_cast<std::uint32_t>(samples.size() * 2);
    out.reserve(44 + data_bytes);
    out += "RIFF";
    put_u32(out, 36 + data_bytes);
    out += "WAVEfmt ";
    put_u32(out, 16);
    put_u16(out, 1);  // PCM
    put_u16(out, 1);  // mono
    put_u32(out, static_cast<std::uint32_t>(sample_rate));
    put_u32(out, static_cast<std::uint32_t>(sample_rate * 2));
    put_u16(out, 2);
    put_u16(out, 16);
    out += "data";
    put_u32(out, data_bytes);
    for (float v : samples) {
        const float clamped = std::min(1.0f, std::max(-1.0f, v));
        const auto s = static_cast<std::int16_t>(std::lround(clamped * 32767.0f));
        put_u16(out, static_cast<std::uint16_t>(s));
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw parse_error("cannot write WAV file " + path.string());
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

}  // namespace scofo
