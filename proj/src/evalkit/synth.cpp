#include "evalkit/synth.hpp"

#include "core/errors.hpp"
#include "core/prng.hpp"

#include <algorithm>
#include <cmath>

namespace opf::evalkit {

double sin_turns(double turns) {
    double t = turns - std::floor(turns); // [0, 1)
    double sign = 1.0;
    if (t >= 0.5) {
        t -= 0.5;
        sign = -1.0;
    }
    if (t > 0.25)
        t = 0.5 - t;
    // sin(x) for x = 2*pi*t in [0, pi/2], Taylor through x^13; the truncation
    // error at pi/2 is below 3e-10.
    double x = 6.283185307179586476925286766559 * t;
    double x2 = x * x;
    double p = 1.0 / 6227020800.0; // 1/13!
    p = p * x2 - 1.0 / 39916800.0;
    p = p * x2 + 1.0 / 362880.0;
    p = p * x2 - 1.0 / 5040.0;
    p = p * x2 + 1.0 / 120.0;
    p = p * x2 - 1.0 / 6.0;
    p = p * x2 + 1.0;
    return sign * p * x;
}

audio::AudioClip synth_engine_sound(const EngineProfile& profile, double duration_s,
                                    uint32_t sample_rate, uint64_t seed) {
    if (!(duration_s > 0.0))
        raise(Errc::invalid_argument, "duration must be positive");
    if (sample_rate == 0)
        raise(Errc::invalid_argument, "sample_rate must be positive");
    if (!(profile.fundamental_hz > 0.0))
        raise(Errc::invalid_argument, "fundamental must be positive");
    bool any = std::any_of(profile.harmonic_amplitudes.begin(), profile.harmonic_amplitudes.end(),
                           [](double a) { return a > 0.0; });
    if (!any)
        raise(Errc::invalid_argument, "profile needs at least one positive harmonic amplitude");
    if (profile.noise_level < 0.0 || profile.noise_level >= 1.0)
        raise(Errc::invalid_argument, "noise_level must be in [0, 1)");

    size_t n = static_cast<size_t>(std::llround(duration_s * sample_rate));
    if (n == 0)
        raise(Errc::invalid_argument, "duration too short for one sample");

    Xorshift64Star rng(seed);
    double detune = 1.0 + profile.jitter * rng.next_bipolar();

    audio::AudioClip clip;
    clip.sample_rate = sample_rate;
    clip.samples.assign(n, 0.0);

    for (size_t k = 0; k < profile.harmonic_amplitudes.size(); ++k) {
        double amp = profile.harmonic_amplitudes[k];
        if (amp == 0.0)
            continue;
        double freq = profile.fundamental_hz * static_cast<double>(k + 1) * detune;
        double step = freq / sample_rate; // turns per sample
        double phase = rng.next_unit();
        for (size_t i = 0; i < n; ++i) {
            clip.samples[i] += amp * sin_turns(phase);
            phase += step;
        }
    }
    if (profile.noise_level > 0.0) {
        for (size_t i = 0; i < n; ++i)
            clip.samples[i] += profile.noise_level * rng.next_gaussian();
    }

    double peak = 0.0;
    for (double s : clip.samples)
        peak = std::max(peak, std::abs(s));
    if (peak > 0.0) {
        double gain = 0.95 / peak;
        for (double& s : clip.samples)
            s *= gain;
    }
    return clip;
}

vision::MaskedImage synth_vehicle_image(const ColorProfile& color, uint32_t width, uint32_t height,
                                        uint64_t seed) {
    if (width < 8 || height < 8)
        raise(Errc::invalid_argument, "image dimensions must be at least 8x8");
    if (color.noise_stddev < 0.0)
        raise(Errc::invalid_argument, "noise_stddev must be non-negative");

    vision::MaskedImage img;
    img.width = width;
    img.height = height;
    img.pixels.assign(static_cast<size_t>(width) * height * 3, 0);
    img.mask.assign(static_cast<size_t>(width) * height, 0);

    Xorshift64Star rng(seed);
    double cx = (width - 1) / 2.0;
    double cy = (height - 1) / 2.0;
    double rx = 0.42 * width;
    double ry = 0.30 * height;

    for (uint32_t y = 0; y < height; ++y) {
        for (uint32_t x = 0; x < width; ++x) {
            double dx = (x - cx) / rx;
            double dy = (y - cy) / ry;
            if (dx * dx + dy * dy > 1.0)
                continue;
            size_t pi = static_cast<size_t>(y) * width + x;
            img.mask[pi] = 255;
            for (int c = 0; c < 3; ++c) {
                double v = color.rgb[static_cast<size_t>(c)];
                if (color.noise_stddev > 0.0)
                    v += color.noise_stddev * rng.next_gaussian();
                long q = std::lround(v);
                img.pixels[pi * 3 + static_cast<size_t>(c)] =
                    static_cast<uint8_t>(std::clamp(q, 0l, 255l));
            }
        }
    }
    return img;
}

namespace {

// Harmonic stacks are rescaled to a common total amplitude so noise_level
// means the same broadband fraction in every profile; the fleet then spaces
// the profiles by raising both the stack's center and the noise floor
// together, which keeps the resulting signature means monotone.
EngineProfile scaled(std::string name, double f0, std::vector<double> amps, double noise,
                     double jitter) {
    double sum = 0.0;
    for (double a : amps)
        sum += a;
    for (double& a : amps)
        a *= 3.0 / sum;
    return {std::move(name), f0, std::move(amps), noise, jitter};
}

} // namespace

const std::vector<EngineProfile>& default_engine_profiles() {
    static const std::vector<EngineProfile> fleet = {
        scaled("idle-4cyl", 80.0, {1.0, 0.6, 0.35, 0.2, 0.1}, 0.002, 0.003),
        scaled("idle-6cyl", 95.0, {1.0, 0.8, 0.5, 0.3, 0.18, 0.1}, 0.008, 0.003),
        scaled("diesel-van", 110.0, {0.7, 1.0, 0.75, 0.5, 0.3}, 0.016, 0.004),
        scaled("sport-coupe", 130.0, {0.5, 0.8, 1.0, 0.8, 0.55, 0.35}, 0.028, 0.003),
        scaled("ev-fan", 155.0, {0.3, 0.5, 0.8, 1.0, 0.9, 0.7}, 0.045, 0.002),
        scaled("scooter", 185.0, {1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4}, 0.07, 0.004),
    };
    return fleet;
}

const std::vector<ColorProfile>& default_color_profiles() {
    static const std::vector<ColorProfile> fleet = {
        {"pearl-white", {210, 210, 205}, 8.0},
        {"silver", {185, 188, 194}, 8.0},
        {"slate-gray", {165, 170, 178}, 8.0},
        {"crimson", {160, 35, 45}, 8.0},
    };
    return fleet;
}

} // namespace opf::evalkit
