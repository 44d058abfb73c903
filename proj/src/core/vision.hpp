#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace opf::vision {

// Background-removed vehicle image: RGB pixels plus a foreground mask.
struct MaskedImage {
    uint32_t width = 0;
    uint32_t height = 0;
    std::vector<uint8_t> pixels; // row-major RGB triples
    std::vector<uint8_t> mask;   // row-major, nonzero = foreground

    size_t pixel_count() const { return static_cast<size_t>(width) * height; }
};

// Normalized joint RGB color distribution over B^3 bins, flattened as
// r_bin * B^2 + g_bin * B + b_bin.
struct ColorHistogram {
    uint32_t bins_per_channel = 0;
    std::vector<double> values;
};

inline size_t flatten_bin(uint32_t r_bin, uint32_t g_bin, uint32_t b_bin, uint32_t bins) {
    return (static_cast<size_t>(r_bin) * bins + g_bin) * bins + b_bin;
}

inline std::array<uint32_t, 3> unflatten_bin(size_t index, uint32_t bins) {
    const uint32_t b = static_cast<uint32_t>(index % bins);
    const uint32_t g = static_cast<uint32_t>((index / bins) % bins);
    const uint32_t r = static_cast<uint32_t>(index / (static_cast<size_t>(bins) * bins));
    return {r, g, b};
}

// Assembles a MaskedImage from a P6 image and an optional same-dimension P5
// mask (value > 0 means foreground). Absent mask marks every pixel foreground.
MaskedImage load_image(std::span<const uint8_t> image_bytes,
                       std::optional<std::span<const uint8_t>> mask_bytes);

// File variant; when mask_path is empty, "<image-stem>.mask.pgm" beside the
// image is used if it exists.
MaskedImage load_image_file(const std::filesystem::path& image_path,
                            const std::filesystem::path& mask_path = {});

ColorHistogram color_histogram(const MaskedImage& img, uint32_t bins_per_channel);

// Overlap of two normalized histograms, in [0, 1]; 1 iff identical.
double bhattacharyya_coefficient(const ColorHistogram& p, const ColorHistogram& q);

// -ln(BC), clamped so disjoint histograms stay finite at -ln(1e-12).
double bhattacharyya_distance(const ColorHistogram& p, const ColorHistogram& q);

inline constexpr double kBhattacharyyaEpsilon = 1e-12;

} // namespace opf::vision
