#include "core/vision.hpp"

#include "core/errors.hpp"
#include "core/netpbm.hpp"

#include <cmath>

namespace opf::vision {

namespace {

MaskedImage assemble(netpbm::RgbImage img, std::optional<netpbm::GrayImage> mask) {
    MaskedImage out;
    out.width = img.width;
    out.height = img.height;
    out.pixels = std::move(img.pixels);

    if (mask) {
        if (mask->width != out.width || mask->height != out.height)
            raise(Errc::dimension_mismatch,
                  "mask is " + std::to_string(mask->width) + "x" + std::to_string(mask->height) +
                      " but image is " + std::to_string(out.width) + "x" + std::to_string(out.height));
        out.mask = std::move(mask->pixels);
        bool any = false;
        for (uint8_t m : out.mask)
            if (m) { any = true; break; }
        if (!any) raise(Errc::empty_foreground, "mask removes every pixel");
    } else {
        out.mask.assign(out.pixel_count(), 255);
    }
    return out;
}

} // namespace

MaskedImage load_image(std::span<const uint8_t> image_bytes,
                       std::optional<std::span<const uint8_t>> mask_bytes) {
    auto img = netpbm::read_ppm(image_bytes);
    std::optional<netpbm::GrayImage> mask;
    if (mask_bytes) mask = netpbm::read_pgm(*mask_bytes);
    return assemble(std::move(img), std::move(mask));
}

MaskedImage load_image_file(const std::filesystem::path& image_path,
                            const std::filesystem::path& mask_path) {
    auto img = netpbm::read_ppm_file(image_path);

    std::filesystem::path effective_mask = mask_path;
    if (effective_mask.empty()) {
        std::filesystem::path sidecar = image_path;
        sidecar.replace_extension();
        sidecar += ".mask.pgm";
        std::error_code ec;
        if (std::filesystem::exists(sidecar, ec)) effective_mask = sidecar;
    }

    std::optional<netpbm::GrayImage> mask;
    if (!effective_mask.empty()) mask = netpbm::read_pgm_file(effective_mask);
    return assemble(std::move(img), std::move(mask));
}

ColorHistogram color_histogram(const MaskedImage& img, uint32_t bins_per_channel) {
    if (bins_per_channel < 2 || bins_per_channel > 64)
        raise(Errc::invalid_argument, "bins_per_channel must be in [2, 64]");
    if (img.pixels.size() != img.pixel_count() * 3 || img.mask.size() != img.pixel_count())
        raise(Errc::invalid_argument, "image buffers do not match dimensions");

    ColorHistogram hist;
    hist.bins_per_channel = bins_per_channel;
    hist.values.assign(static_cast<size_t>(bins_per_channel) * bins_per_channel * bins_per_channel, 0.0);

    size_t foreground = 0;
    for (size_t i = 0; i < img.pixel_count(); ++i) {
        if (!img.mask[i]) continue;
        ++foreground;
        const uint8_t* px = img.pixels.data() + i * 3;
        const uint32_t r = px[0] * bins_per_channel / 256;
        const uint32_t g = px[1] * bins_per_channel / 256;
        const uint32_t b = px[2] * bins_per_channel / 256;
        hist.values[flatten_bin(r, g, b, bins_per_channel)] += 1.0;
    }
    if (foreground == 0) raise(Errc::empty_foreground, "no foreground pixels");

    for (double& v : hist.values) v /= static_cast<double>(foreground);
    return hist;
}

namespace {

void check_compatible(const ColorHistogram& p, const ColorHistogram& q) {
    if (p.bins_per_channel == 0 || q.bins_per_channel == 0 || p.values.size() != q.values.size() ||
        p.bins_per_channel != q.bins_per_channel)
        raise(Errc::incompatible_histogram,
              "histograms use " + std::to_string(p.bins_per_channel) + " and " +
                  std::to_string(q.bins_per_channel) + " bins per channel");
}

} // namespace

double bhattacharyya_coefficient(const ColorHistogram& p, const ColorHistogram& q) {
    check_compatible(p, q);
    double bc = 0.0;
    for (size_t i = 0; i < p.values.size(); ++i) bc += std::sqrt(p.values[i] * q.values[i]);
    if (bc > 1.0) bc = 1.0; // rounding can overshoot the Cauchy-Schwarz bound
    return bc;
}

double bhattacharyya_distance(const ColorHistogram& p, const ColorHistogram& q) {
    const double bc = bhattacharyya_coefficient(p, q);
    return -std::log(std::max(bc, kBhattacharyyaEpsilon));
}

} // namespace opf::vision
