#include "core/audio.hpp"

#include "core/errors.hpp"
#include "core/fft.hpp"

#include <cmath>
#include <numeric>

namespace opf::audio {

Window window_from_name(const std::string& name) {
    if (name == "rectangular") return Window::rectangular;
    if (name == "hann") return Window::hann;
    raise(Errc::parse, "unknown window '" + name + "' (expected rectangular or hann)");
}

const char* window_name(Window w) {
    return w == Window::hann ? "hann" : "rectangular";
}

std::vector<std::vector<double>> frame_signal(const AudioClip& clip, const SignatureParams& params) {
    const size_t n = clip.samples.size();
    const size_t frame = params.frame_size;
    const size_t hop = params.hop_size;

    if (frame < 2 || !is_power_of_two(frame))
        raise(Errc::invalid_argument, "frame_size must be a power of two >= 2");
    if (hop == 0 || hop > frame)
        raise(Errc::invalid_argument, "hop_size must satisfy 0 < hop_size <= frame_size");
    if (n < frame)
        raise(Errc::too_short, "clip of " + std::to_string(n) + " samples is shorter than one frame (" +
                                   std::to_string(frame) + ")");

    std::vector<double> window(frame, 1.0);
    if (params.window == Window::hann) {
        // periodic Hann: w[i] = 0.5 * (1 - cos(2*pi*i/N))
        for (size_t i = 0; i < frame; ++i)
            window[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(frame)));
    }

    const size_t count = (n - frame) / hop + 1;
    std::vector<std::vector<double>> frames;
    frames.reserve(count);
    for (size_t f = 0; f < count; ++f) {
        std::vector<double> out(frame);
        const double* src = clip.samples.data() + f * hop;
        for (size_t i = 0; i < frame; ++i) out[i] = src[i] * window[i];
        frames.push_back(std::move(out));
    }
    return frames;
}

FrameSpectrum magnitude_spectrum(std::span<const double> frame, uint32_t sample_rate) {
    if (sample_rate == 0) raise(Errc::invalid_argument, "sample_rate must be positive");

    FrameSpectrum spec;
    spec.magnitudes = real_fft_magnitudes(frame);
    spec.bin_frequencies.resize(spec.magnitudes.size());
    const double df = static_cast<double>(sample_rate) / static_cast<double>(frame.size());
    for (size_t k = 0; k < spec.bin_frequencies.size(); ++k)
        spec.bin_frequencies[k] = static_cast<double>(k) * df;
    return spec;
}

std::optional<double> spectral_centroid(const FrameSpectrum& spectrum) {
    const size_t bins = spectrum.magnitudes.size();
    if (bins == 0 || bins != spectrum.bin_frequencies.size())
        raise(Errc::invalid_argument, "spectrum magnitudes and bin_frequencies must have equal non-zero length");

    double num = 0.0;
    double den = 0.0;
    for (size_t k = 0; k < bins; ++k) {
        num += spectrum.bin_frequencies[k] * spectrum.magnitudes[k];
        den += spectrum.magnitudes[k];
    }

    // frame length N = 2 * (bins - 1); silence floor scales with N
    const double frame_len = 2.0 * static_cast<double>(bins - 1);
    if (den < kSilenceFloorPerBin * frame_len) return std::nullopt;
    return num / den;
}

AudioSignature audio_signature(const AudioClip& clip, const SignatureParams& params) {
    AudioSignature sig;
    sig.params = params;

    for (const auto& frame : frame_signal(clip, params)) {
        auto spec = magnitude_spectrum(frame, clip.sample_rate);
        if (auto c = spectral_centroid(spec)) sig.frame_centroids.push_back(*c);
    }
    if (sig.frame_centroids.empty())
        raise(Errc::all_silent, "no voiced frames in clip");

    sig.mean_centroid = std::accumulate(sig.frame_centroids.begin(), sig.frame_centroids.end(), 0.0) /
                        static_cast<double>(sig.frame_centroids.size());
    return sig;
}

double audio_distance(const AudioSignature& a, const AudioSignature& b) {
    return std::abs(a.mean_centroid - b.mean_centroid);
}

} // namespace opf::audio
