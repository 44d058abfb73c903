#include "core/wav.hpp"

#include "core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

namespace opf::wav {

namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatIeeeFloat = 3;

uint16_t read_u16(const uint8_t* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

uint32_t read_u32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

struct FmtInfo {
    uint16_t format = 0;
    uint16_t channels = 0;
    uint32_t sample_rate = 0;
    uint16_t bits_per_sample = 0;
};

double decode_sample(const uint8_t* p, uint16_t bits, uint16_t format) {
    if (format == kFormatIeeeFloat) {
        float v;
        std::memcpy(&v, p, sizeof v);
        return std::clamp(static_cast<double>(v), -1.0, 1.0);
    }
    switch (bits) {
    case 8:
        // 8-bit WAV is unsigned with midpoint 128
        return (static_cast<double>(p[0]) - 128.0) / 128.0;
    case 16:
        return static_cast<double>(static_cast<int16_t>(read_u16(p))) / 32768.0;
    case 24: {
        int32_t v = static_cast<int32_t>(p[0]) | (static_cast<int32_t>(p[1]) << 8) |
                    (static_cast<int32_t>(p[2]) << 16);
        if (v & 0x800000) v |= ~0xFFFFFF; // sign-extend
        return static_cast<double>(v) / 8388608.0;
    }
    case 32:
        return static_cast<double>(static_cast<int32_t>(read_u32(p))) / 2147483648.0;
    default:
        raise(Errc::unsupported_format, "unsupported PCM bit depth " + std::to_string(bits));
    }
}

} // namespace

audio::AudioClip decode(std::span<const uint8_t> bytes) {
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        raise(Errc::decode, "not a RIFF/WAVE container");

    FmtInfo fmt;
    bool have_fmt = false;
    std::span<const uint8_t> data;
    bool have_data = false;

    size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
        uint32_t size = read_u32(bytes.data() + pos + 4);
        pos += 8;
        if (size > bytes.size() - pos)
            raise(Errc::decode, "chunk size exceeds container");

        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (size < 16) raise(Errc::decode, "fmt chunk too small");
            const uint8_t* p = bytes.data() + pos;
            fmt.format = read_u16(p);
            fmt.channels = read_u16(p + 2);
            fmt.sample_rate = read_u32(p + 4);
            fmt.bits_per_sample = read_u16(p + 14);
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            data = bytes.subspan(pos, size);
            have_data = true;
        }
        pos += size + (size & 1); // chunks are word-aligned

        if (have_fmt && have_data) break;
    }

    if (!have_fmt) raise(Errc::decode, "missing fmt chunk");
    if (!have_data) raise(Errc::decode, "missing data chunk");

    if (fmt.format != kFormatPcm && fmt.format != kFormatIeeeFloat)
        raise(Errc::unsupported_format, "unsupported codec tag " + std::to_string(fmt.format) +
                                            " (only PCM and IEEE float)");
    if (fmt.format == kFormatIeeeFloat && fmt.bits_per_sample != 32)
        raise(Errc::unsupported_format, "IEEE float must be 32-bit");
    if (fmt.format == kFormatPcm && fmt.bits_per_sample != 8 && fmt.bits_per_sample != 16 &&
        fmt.bits_per_sample != 24 && fmt.bits_per_sample != 32)
        raise(Errc::unsupported_format, "unsupported PCM bit depth " + std::to_string(fmt.bits_per_sample));
    if (fmt.channels != 1 && fmt.channels != 2)
        raise(Errc::unsupported_format, "unsupported channel count " + std::to_string(fmt.channels));
    if (fmt.sample_rate == 0) raise(Errc::decode, "sample rate is zero");

    const size_t bytes_per_sample = fmt.bits_per_sample / 8;
    const size_t frame_bytes = bytes_per_sample * fmt.channels;
    const size_t frames = data.size() / frame_bytes;
    if (frames == 0) raise(Errc::empty_audio, "data chunk holds zero frames");

    audio::AudioClip clip;
    clip.sample_rate = fmt.sample_rate;
    clip.samples.resize(frames);
    for (size_t f = 0; f < frames; ++f) {
        const uint8_t* p = data.data() + f * frame_bytes;
        double acc = 0.0;
        for (uint16_t ch = 0; ch < fmt.channels; ++ch)
            acc += decode_sample(p + ch * bytes_per_sample, fmt.bits_per_sample, fmt.format);
        clip.samples[f] = acc / fmt.channels;
    }
    return clip;
}

audio::AudioClip decode_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::io, "cannot open " + path.string());
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode(bytes);
}

std::vector<uint8_t> encode(const audio::AudioClip& clip, SampleFormat format) {
    if (clip.samples.empty()) raise(Errc::empty_audio, "clip has no samples");
    if (clip.sample_rate == 0) raise(Errc::invalid_argument, "sample_rate must be positive");

    const uint16_t bits = format == SampleFormat::pcm16 ? 16 : 32;
    const uint16_t tag = format == SampleFormat::pcm16 ? kFormatPcm : kFormatIeeeFloat;
    const uint32_t data_size = static_cast<uint32_t>(clip.samples.size() * bits / 8);

    std::vector<uint8_t> out;
    out.reserve(44 + data_size);
    auto put_u16 = [&](uint16_t v) {
        out.push_back(static_cast<uint8_t>(v & 0xFF));
        out.push_back(static_cast<uint8_t>(v >> 8));
    };
    auto put_u32 = [&](uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xFF));
    };
    auto put_tag = [&](const char* s) { out.insert(out.end(), s, s + 4); };

    put_tag("RIFF");
    put_u32(36 + data_size);
    put_tag("WAVE");
    put_tag("fmt ");
    put_u32(16);
    put_u16(tag);
    put_u16(1); // mono
    put_u32(clip.sample_rate);
    put_u32(clip.sample_rate * bits / 8);
    put_u16(bits / 8);
    put_u16(bits);
    put_tag("data");
    put_u32(data_size);

    for (double s : clip.samples) {
        const double v = std::clamp(s, -1.0, 1.0);
        if (format == SampleFormat::pcm16) {
            put_u16(static_cast<uint16_t>(static_cast<int16_t>(std::lround(v * 32767.0))));
        } else {
            float f = static_cast<float>(v);
            uint32_t raw;
            std::memcpy(&raw, &f, sizeof raw);
            put_u32(raw);
        }
    }
    return out;
}

void write_file(const std::filesystem::path& path, const audio::AudioClip& clip, SampleFormat format) {
    auto bytes = encode(clip, format);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(Errc::io, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) raise(Errc::io, "short write to " + path.string());
}

} // namespace opf::wav
