#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace opf::netpbm {

// Raw binary netpbm rasters with maxval 255: P6 (RGB) and P5 (grayscale).

struct RgbImage {
    uint32_t width = 0;
    uint32_t height = 0;
    std::vector<uint8_t> pixels; // row-major RGB triples, 3 * width * height bytes
};

struct GrayImage {
    uint32_t width = 0;
    uint32_t height = 0;
    std::vector<uint8_t> pixels; // row-major, width * height bytes
};

RgbImage read_ppm(std::span<const uint8_t> bytes);
GrayImage read_pgm(std::span<const uint8_t> bytes);

RgbImage read_ppm_file(const std::filesystem::path& path);
GrayImage read_pgm_file(const std::filesystem::path& path);

std::vector<uint8_t> encode_ppm(const RgbImage& img);
std::vector<uint8_t> encode_pgm(const GrayImage& img);

void write_ppm_file(const std::filesystem::path& path, const RgbImage& img);
void write_pgm_file(const std::filesystem::path& path, const GrayImage& img);

} // namespace opf::netpbm
