#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace opf::audio {

// Decoded mono sample stream. Samples are normalized to [-1, 1].
struct AudioClip {
    std::vector<double> samples;
    uint32_t sample_rate = 0;
};

enum class Window { rectangular, hann };

Window window_from_name(const std::string& name);
const char* window_name(Window w);

struct SignatureParams {
    uint32_t frame_size = 2048;
    uint32_t hop_size = 512;
    Window window = Window::hann;
};

// One-sided magnitude spectrum of a frame of length N: bins 0..N/2 with
// bin_frequencies[n] = n * sample_rate / N.
struct FrameSpectrum {
    std::vector<double> magnitudes;
    std::vector<double> bin_frequencies;
};

// Per-frame spectral centroids of a recording plus their mean, the scalar
// identity feature compared by audio_distance.
struct AudioSignature {
    std::vector<double> frame_centroids;
    double mean_centroid = 0.0;
    SignatureParams params;
};

// A frame is skipped as silent when the magnitude sum falls below
// kSilenceFloorPerBin times the frame length.
inline constexpr double kSilenceFloorPerBin = 1e-6;

// Splits the clip into floor((len - frame_size) / hop_size) + 1 windowed
// frames; the trailing partial frame is dropped.
std::vector<std::vector<double>> frame_signal(const AudioClip& clip, const SignatureParams& params);

FrameSpectrum magnitude_spectrum(std::span<const double> frame, uint32_t sample_rate);

// Magnitude-weighted mean frequency (the spectrum's center of mass), or
// nullopt for a silent frame.
std::optional<double> spectral_centroid(const FrameSpectrum& spectrum);

AudioSignature audio_signature(const AudioClip& clip, const SignatureParams& params);

// Distance between two signatures: absolute difference of mean centroids, Hz.
double audio_distance(const AudioSignature& a, const AudioSignature& b);

} // namespace opf::audio
