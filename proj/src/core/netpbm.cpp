#include "core/netpbm.hpp"

#include "core/errors.hpp"

#include <cctype>
#include <fstream>
#include <string>

namespace opf::netpbm {

namespace {

class HeaderReader {
public:
    explicit HeaderReader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

    // reads the next whitespace-delimited token, skipping '#' comments
    std::string token() {
        skip_space_and_comments();
        std::string t;
        while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_]))
            t.push_back(static_cast<char>(bytes_[pos_++]));
        if (t.empty()) raise(Errc::decode, "truncated netpbm header");
        return t;
    }

    uint32_t number() {
        const std::string t = token();
        uint32_t v = 0;
        for (char c : t) {
            if (!std::isdigit(static_cast<unsigned char>(c)))
                raise(Errc::decode, "malformed number '" + t + "' in netpbm header");
            v = v * 10 + static_cast<uint32_t>(c - '0');
            if (v > 1000000) raise(Errc::decode, "netpbm dimension out of range");
        }
        return v;
    }

    // consumes the single whitespace byte separating header from raster
    std::span<const uint8_t> raster() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
            raise(Errc::decode, "missing raster separator in netpbm header");
        ++pos_;
        return bytes_.subspan(pos_);
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const uint8_t> bytes_;
    size_t pos_ = 0;
};

void check_header(HeaderReader& r, std::span<const uint8_t> bytes, const char* magic) {
    if (bytes.size() < 2) raise(Errc::decode, "file too small for a netpbm header");
    const std::string m = r.token();
    if (m != magic)
        raise(Errc::decode, "bad netpbm magic '" + m + "' (expected " + magic + ")");
}

} // namespace

RgbImage read_ppm(std::span<const uint8_t> bytes) {
    HeaderReader r(bytes);
    check_header(r, bytes, "P6");
    RgbImage img;
    img.width = r.number();
    img.height = r.number();
    const uint32_t maxval = r.number();
    if (img.width == 0 || img.height == 0) raise(Errc::decode, "zero image dimension");
    if (maxval != 255) raise(Errc::unsupported_format, "only maxval 255 PPM is supported");

    auto raster = r.raster();
    const size_t need = static_cast<size_t>(img.width) * img.height * 3;
    if (raster.size() < need) raise(Errc::decode, "PPM raster truncated");
    img.pixels.assign(raster.begin(), raster.begin() + static_cast<ptrdiff_t>(need));
    return img;
}

GrayImage read_pgm(std::span<const uint8_t> bytes) {
    HeaderReader r(bytes);
    check_header(r, bytes, "P5");
    GrayImage img;
    img.width = r.number();
    img.height = r.number();
    const uint32_t maxval = r.number();
    if (img.width == 0 || img.height == 0) raise(Errc::decode, "zero image dimension");
    if (maxval != 255) raise(Errc::unsupported_format, "only maxval 255 PGM is supported");

    auto raster = r.raster();
    const size_t need = static_cast<size_t>(img.width) * img.height;
    if (raster.size() < need) raise(Errc::decode, "PGM raster truncated");
    img.pixels.assign(raster.begin(), raster.begin() + static_cast<ptrdiff_t>(need));
    return img;
}

namespace {

std::vector<uint8_t> read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Errc::io, "cannot open " + path.string());
    return std::vector<uint8_t>((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_all(const std::filesystem::path& path, std::span<const uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(Errc::io, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) raise(Errc::io, "short write to " + path.string());
}

} // namespace

RgbImage read_ppm_file(const std::filesystem::path& path) {
    auto bytes = read_all(path);
    return read_ppm(bytes);
}

GrayImage read_pgm_file(const std::filesystem::path& path) {
    auto bytes = read_all(path);
    return read_pgm(bytes);
}

std::vector<uint8_t> encode_ppm(const RgbImage& img) {
    if (img.pixels.size() != static_cast<size_t>(img.width) * img.height * 3)
        raise(Errc::invalid_argument, "PPM pixel buffer does not match dimensions");
    std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

std::vector<uint8_t> encode_pgm(const GrayImage& img) {
    if (img.pixels.size() != static_cast<size_t>(img.width) * img.height)
        raise(Errc::invalid_argument, "PGM pixel buffer does not match dimensions");
    std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    std::vector<uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

void write_ppm_file(const std::filesystem::path& path, const RgbImage& img) {
    auto bytes = encode_ppm(img);
    write_all(path, bytes);
}

void write_pgm_file(const std::filesystem::path& path, const GrayImage& img) {
    auto bytes = encode_pgm(img);
    write_all(path, bytes);
}

} // namespace opf::netpbm
