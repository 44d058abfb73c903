#include <doctest.h>

#include "core/errors.hpp"
#include "core/wav.hpp"
#include "support/oracles.hpp"

#include <cstring>
#include <functional>
#include <optional>
#include <random>

using namespace opf;
using namespace opf::audio;

namespace {

void put_u32(std::vector<uint8_t>& v, uint32_t x) {
    v.push_back(static_cast<uint8_t>(x & 0xFF));
    v.push_back(static_cast<uint8_t>((x >> 8) & 0xFF));
    v.push_back(static_cast<uint8_t>((x >> 16) & 0xFF));
    v.push_back(static_cast<uint8_t>((x >> 24) & 0xFF));
}

void put_u16(std::vector<uint8_t>& v, uint16_t x) {
    v.push_back(static_cast<uint8_t>(x & 0xFF));
    v.push_back(static_cast<uint8_t>((x >> 8) & 0xFF));
}

void put_tag(std::vector<uint8_t>& v, const char* tag) {
    v.insert(v.end(), tag, tag + 4);
}

// Hand-assembled RIFF container for decoder edge cases.
std::vector<uint8_t> build_wav(uint16_t codec, uint16_t channels, uint32_t rate,
                               uint16_t bits, const std::vector<uint8_t>& data,
                               bool extra_chunk = false) {
    std::vector<uint8_t> fmt;
    put_u16(fmt, codec);
    put_u16(fmt, channels);
    put_u32(fmt, rate);
    put_u32(fmt, rate * channels * bits / 8);
    put_u16(fmt, static_cast<uint16_t>(channels * bits / 8));
    put_u16(fmt, bits);

    std::vector<uint8_t> body;
    put_tag(body, "WAVE");
    if (extra_chunk) {
        put_tag(body, "LIST");
        put_u32(body, 5);
        for (int i = 0; i < 5; ++i) body.push_back(0x55);
        body.push_back(0x00); // odd-size chunk pad
    }
    put_tag(body, "fmt ");
    put_u32(body, static_cast<uint32_t>(fmt.size()));
    body.insert(body.end(), fmt.begin(), fmt.end());
    put_tag(body, "data");
    put_u32(body, static_cast<uint32_t>(data.size()));
    body.insert(body.end(), data.begin(), data.end());

    std::vector<uint8_t> out;
    put_tag(out, "RIFF");
    put_u32(out, static_cast<uint32_t>(body.size()));
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

std::optional<Errc> code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

} // namespace

TEST_CASE("decode scales 16-bit mono to full-scale fractions") {
    std::vector<uint8_t> data;
    put_u16(data, 16384);
    auto clip = wav::decode(build_wav(1, 1, 44100, 16, data));
    REQUIRE(clip.samples.size() == 1);
    CHECK(clip.samples[0] == 0.5);
    CHECK(clip.sample_rate == 44100);
}

TEST_CASE("decode averages stereo frames") {
    std::vector<uint8_t> data;
    put_u16(data, static_cast<uint16_t>(static_cast<int16_t>(0.2 * 32768)));
    put_u16(data, static_cast<uint16_t>(static_cast<int16_t>(0.6 * 32768)));
    auto clip = wav::decode(build_wav(1, 2, 48000, 16, data));
    REQUIRE(clip.samples.size() == 1);
    CHECK(clip.samples[0] == doctest::Approx(0.4).epsilon(1e-4));
}

TEST_CASE("decode handles 8-bit offset samples") {
    auto clip = wav::decode(build_wav(1, 1, 8000, 8, {128, 255, 0}));
    REQUIRE(clip.samples.size() == 3);
    CHECK(clip.samples[0] == 0.0);
    CHECK(clip.samples[1] == doctest::Approx(127.0 / 128.0));
    CHECK(clip.samples[2] == -1.0);
}

TEST_CASE("decode handles 24-bit samples with sign extension") {
    std::vector<uint8_t> data{0x00, 0x00, 0x40,  // +0.5
                              0x00, 0x00, 0xC0}; // -0.5
    auto clip = wav::decode(build_wav(1, 1, 44100, 24, data));
    REQUIRE(clip.samples.size() == 2);
    CHECK(clip.samples[0] == 0.5);
    CHECK(clip.samples[1] == -0.5);
}

TEST_CASE("decode handles 32-bit integer samples") {
    std::vector<uint8_t> data;
    put_u32(data, 0x40000000u); // 2^30 / 2^31 = 0.5
    auto clip = wav::decode(build_wav(1, 1, 44100, 32, data));
    REQUIRE(clip.samples.size() == 1);
    CHECK(clip.samples[0] == 0.5);
}

TEST_CASE("decode handles 32-bit float samples and clamps them") {
    std::vector<uint8_t> data(8);
    float a = 0.25f, b = 1.75f;
    std::memcpy(data.data(), &a, 4);
    std::memcpy(data.data() + 4, &b, 4);
    auto clip = wav::decode(build_wav(3, 1, 22050, 32, data));
    REQUIRE(clip.samples.size() == 2);
    CHECK(clip.samples[0] == 0.25);
    CHECK(clip.samples[1] == 1.0);
}

TEST_CASE("decode skips unknown odd-sized chunks") {
    std::vector<uint8_t> data;
    put_u16(data, 16384);
    auto clip = wav::decode(build_wav(1, 1, 44100, 16, data, true));
    REQUIRE(clip.samples.size() == 1);
    CHECK(clip.samples[0] == 0.5);
}

TEST_CASE("decode error taxonomy") {
    std::vector<uint8_t> onesample;
    put_u16(onesample, 100);

    SUBCASE("not a RIFF container") {
        std::vector<uint8_t> junk{'J', 'U', 'N', 'K', 0, 0, 0, 0, 'W', 'A', 'V', 'E'};
        CHECK(code_of([&] { wav::decode(junk); }) == Errc::decode);
    }
    SUBCASE("compressed codec is unsupported") {
        CHECK(code_of([&] { wav::decode(build_wav(2, 1, 44100, 16, onesample)); }) ==
              Errc::unsupported_format);
    }
    SUBCASE("extensible codec is unsupported") {
        CHECK(code_of([&] { wav::decode(build_wav(0xFFFE, 1, 44100, 16, onesample)); }) ==
              Errc::unsupported_format);
    }
    SUBCASE("three channels are unsupported") {
        std::vector<uint8_t> three;
        put_u16(three, 1);
        put_u16(three, 2);
        put_u16(three, 3);
        CHECK(code_of([&] { wav::decode(build_wav(1, 3, 44100, 16, three)); }) ==
              Errc::unsupported_format);
    }
    SUBCASE("zero data frames") {
        CHECK(code_of([&] { wav::decode(build_wav(1, 1, 44100, 16, {})); }) == Errc::empty_audio);
    }
    SUBCASE("zero sample rate") {
        CHECK(code_of([&] { wav::decode(build_wav(1, 1, 0, 16, onesample)); }) == Errc::decode);
    }
    SUBCASE("chunk size exceeding the container") {
        auto bytes = build_wav(1, 1, 44100, 16, onesample);
        bytes[16] = 0xFF; // inflate fmt chunk size
        bytes[17] = 0xFF;
        CHECK(code_of([&] { wav::decode(bytes); }) == Errc::decode);
    }
    SUBCASE("truncated header") {
        std::vector<uint8_t> tiny{'R', 'I', 'F', 'F'};
        CHECK(code_of([&] { wav::decode(tiny); }) == Errc::decode);
    }
}

TEST_CASE("encode rejects degenerate clips") {
    AudioClip clip;
    clip.sample_rate = 44100;
    CHECK(code_of([&] { wav::encode(clip); }) == Errc::empty_audio);
    clip.samples = {0.1};
    clip.sample_rate = 0;
    CHECK(code_of([&] { wav::encode(clip); }) == Errc::invalid_argument);
}

TEST_CASE("pcm16 round trip is within quantization error") {
    AudioClip clip;
    clip.sample_rate = 44100;
    clip.samples = testkit::make_tone(440.0, 44100, 0.05);
    auto back = wav::decode(wav::encode(clip, wav::SampleFormat::pcm16));
    REQUIRE(back.samples.size() == clip.samples.size());
    CHECK(back.sample_rate == 44100);
    // encode scales by 32767, decode by 32768: error <= (|x| + 0.5) / 32768
    for (size_t i = 0; i < back.samples.size(); ++i)
        CHECK(std::abs(back.samples[i] - clip.samples[i]) <= 1.5 / 32768.0);
}

TEST_CASE("float32 round trip is within float precision") {
    AudioClip clip;
    clip.sample_rate = 22050;
    clip.samples = testkit::make_tone(220.0, 22050, 0.05);
    auto back = wav::decode(wav::encode(clip, wav::SampleFormat::float32));
    REQUIRE(back.samples.size() == clip.samples.size());
    for (size_t i = 0; i < back.samples.size(); ++i)
        CHECK(std::abs(back.samples[i] - clip.samples[i]) < 1e-7);
}

TEST_CASE("file round trip and io errors") {
    testkit::TempDir dir("wavio");
    AudioClip clip;
    clip.sample_rate = 8000;
    clip.samples = {-0.5, 0.0, 0.5};
    wav::write_file(dir.str("t.wav"), clip);
    auto back = wav::decode_file(dir.str("t.wav"));
    REQUIRE(back.samples.size() == 3);
    CHECK(back.sample_rate == 8000);
    CHECK(code_of([&] { wav::decode_file(dir.str("missing.wav")); }) == Errc::io);
}
