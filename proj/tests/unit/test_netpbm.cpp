#include <doctest.h>

#include "core/errors.hpp"
#include "core/netpbm.hpp"
#include "support/oracles.hpp"

#include <functional>
#include <optional>
#include <string>

using namespace opf;
using namespace opf::netpbm;

namespace {

std::vector<uint8_t> bytes_of(const std::string& s) {
    return std::vector<uint8_t>(s.begin(), s.end());
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

TEST_CASE("read_ppm parses a minimal P6") {
    std::string raw = "P6\n2 1\n255\n";
    raw += {'\xFF', '\x00', '\x00', '\x00', '\x00', '\xFF'};
    auto img = read_ppm(bytes_of(raw));
    CHECK(img.width == 2);
    CHECK(img.height == 1);
    REQUIRE(img.pixels.size() == 6);
    CHECK(img.pixels[0] == 255);
    CHECK(img.pixels[5] == 255);
}

TEST_CASE("read_ppm accepts comments and mixed whitespace in the header") {
    std::string raw = "P6 # format\n# a comment line\n 2\t1 # dims\n255\n";
    raw += std::string(6, '\x10');
    auto img = read_ppm(bytes_of(raw));
    CHECK(img.width == 2);
    CHECK(img.height == 1);
    CHECK(img.pixels[0] == 0x10);
}

TEST_CASE("read_ppm consumes exactly one separator byte before the raster") {
    // raster beginning with whitespace-valued bytes must survive
    std::string raw = "P6\n1 1\n255\n";
    raw += {'\x0A', '\x20', '\x0A'};
    auto img = read_ppm(bytes_of(raw));
    REQUIRE(img.pixels.size() == 3);
    CHECK(img.pixels[0] == 0x0A);
    CHECK(img.pixels[1] == 0x20);
    CHECK(img.pixels[2] == 0x0A);
}

TEST_CASE("read_pgm parses a minimal P5") {
    std::string raw = "P5\n3 1\n255\n";
    raw += {'\x00', '\x7F', '\xFF'};
    auto img = read_pgm(bytes_of(raw));
    CHECK(img.width == 3);
    CHECK(img.height == 1);
    REQUIRE(img.pixels.size() == 3);
    CHECK(img.pixels[1] == 0x7F);
}

TEST_CASE("netpbm decode error taxonomy") {
    SUBCASE("wrong magic") {
        CHECK(code_of([&] { read_ppm(bytes_of("P5\n1 1\n255\nx")); }) == Errc::decode);
        CHECK(code_of([&] { read_pgm(bytes_of("P6\n1 1\n255\nxxx")); }) == Errc::decode);
    }
    SUBCASE("truncated header") {
        CHECK(code_of([&] { read_ppm(bytes_of("P6\n2")); }) == Errc::decode);
    }
    SUBCASE("malformed number") {
        CHECK(code_of([&] { read_ppm(bytes_of("P6\nab 1\n255\nxxx")); }) == Errc::decode);
    }
    SUBCASE("zero dimension") {
        CHECK(code_of([&] { read_ppm(bytes_of("P6\n0 1\n255\n")); }) == Errc::decode);
    }
    SUBCASE("oversize dimension") {
        CHECK(code_of([&] { read_ppm(bytes_of("P6\n2000000 1\n255\n")); }) == Errc::decode);
    }
    SUBCASE("unsupported maxval") {
        CHECK(code_of([&] { read_ppm(bytes_of("P6\n1 1\n65535\nxxxxxx")); }) ==
              Errc::unsupported_format);
    }
    SUBCASE("truncated raster") {
        CHECK(code_of([&] { read_ppm(bytes_of("P6\n2 2\n255\nxxx")); }) == Errc::decode);
    }
}

TEST_CASE("trailing bytes after the raster are tolerated") {
    std::string raw = "P5\n1 1\n255\nX garbage";
    auto img = read_pgm(bytes_of(raw));
    CHECK(img.pixels[0] == 'X');
}

TEST_CASE("encode_ppm round trip") {
    RgbImage img;
    img.width = 2;
    img.height = 2;
    img.pixels = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    auto back = read_ppm(encode_ppm(img));
    CHECK(back.width == 2);
    CHECK(back.height == 2);
    CHECK(back.pixels == img.pixels);
}

TEST_CASE("encode_pgm round trip and header shape") {
    GrayImage img;
    img.width = 3;
    img.height = 1;
    img.pixels = {9, 8, 7};
    auto bytes = encode_pgm(img);
    std::string head(bytes.begin(), bytes.begin() + 9);
    CHECK(head == "P5\n3 1\n25");
    auto back = read_pgm(bytes);
    CHECK(back.pixels == img.pixels);
}

TEST_CASE("encode validates buffer sizes") {
    RgbImage img;
    img.width = 2;
    img.height = 1;
    img.pixels = {1, 2, 3};
    CHECK(code_of([&] { encode_ppm(img); }) == Errc::invalid_argument);
    GrayImage g;
    g.width = 2;
    g.height = 1;
    g.pixels = {1};
    CHECK(code_of([&] { encode_pgm(g); }) == Errc::invalid_argument);
}

TEST_CASE("netpbm file io") {
    testkit::TempDir dir("netpbm");
    RgbImage img;
    img.width = 1;
    img.height = 2;
    img.pixels = {10, 20, 30, 40, 50, 60};
    write_ppm_file(dir.str("a.ppm"), img);
    auto back = read_ppm_file(dir.str("a.ppm"));
    CHECK(back.pixels == img.pixels);
    CHECK(code_of([&] { read_ppm_file(dir.str("nope.ppm")); }) == Errc::io);
    CHECK(code_of([&] { read_pgm_file(dir.str("nope.pgm")); }) == Errc::io);
}
