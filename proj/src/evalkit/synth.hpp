#pragma once

#include "core/audio.hpp"
#include "core/vision.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace opf::evalkit {

// Additive-synthesis stand-in for an engine recording: a harmonic stack over
// a fundamental, with per-clip detuning and broadband noise.
struct EngineProfile {
    std::string name;
    double fundamental_hz = 100.0;
    std::vector<double> harmonic_amplitudes;
    double noise_level = 0.0; // relative to unit amplitude, in [0, 1)
    double jitter = 0.0;      // relative detuning drawn once per clip
};

struct ColorProfile {
    std::string name;
    std::array<uint8_t, 3> rgb{0, 0, 0};
    double noise_stddev = 0.0; // per channel
};

// sin(2*pi*turns) via range folding and a fixed-order polynomial, evaluated
// without libm so the synthesizer produces the same bytes on every IEEE-754
// platform. Absolute error under 1e-9.
double sin_turns(double turns);

audio::AudioClip synth_engine_sound(const EngineProfile& profile, double duration_s,
                                    uint32_t sample_rate, uint64_t seed);

vision::MaskedImage synth_vehicle_image(const ColorProfile& color, uint32_t width, uint32_t height,
                                        uint64_t seed);

// The built-in evaluation fleet: six engine voicings spread across the low
// spectrum, and four body colors of which three sit close together.
const std::vector<EngineProfile>& default_engine_profiles();
const std::vector<ColorProfile>& default_color_profiles();

} // namespace opf::evalkit
