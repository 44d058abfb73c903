#include <doctest.h>

#include "core/errors.hpp"
#include "core/fft.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <complex>
#include <random>

using namespace opf;

TEST_CASE("is_power_of_two") {
    CHECK(is_power_of_two(1));
    CHECK(is_power_of_two(2));
    CHECK(is_power_of_two(2048));
    CHECK_FALSE(is_power_of_two(0));
    CHECK_FALSE(is_power_of_two(3));
    CHECK_FALSE(is_power_of_two(2047));
}

TEST_CASE("fft_radix2 rejects non-power-of-two lengths") {
    std::vector<std::complex<double>> data(6);
    CHECK_THROWS_AS(fft_radix2(data), Error);
    try {
        fft_radix2(data);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::invalid_argument);
    }
}

TEST_CASE("real_fft_magnitudes zero frame") {
    std::vector<double> frame(8, 0.0);
    auto mags = real_fft_magnitudes(frame);
    REQUIRE(mags.size() == 5);
    for (double m : mags)
        CHECK(m == 0.0);
}

TEST_CASE("real_fft_magnitudes full-cycle cosine concentrates at bin 1") {
    std::vector<double> frame(8);
    for (size_t i = 0; i < 8; ++i)
        frame[i] = std::cos(2.0 * M_PI * static_cast<double>(i) / 8.0);
    auto mags = real_fft_magnitudes(frame);
    REQUIRE(mags.size() == 5);
    CHECK(mags[1] == doctest::Approx(4.0).epsilon(1e-12));
    for (size_t k : {0u, 2u, 3u, 4u})
        CHECK(std::abs(mags[k]) < 1e-9);
}

TEST_CASE("real_fft_magnitudes impulse gives a flat spectrum") {
    std::vector<double> frame(8, 0.0);
    frame[0] = 1.0;
    auto mags = real_fft_magnitudes(frame);
    REQUIRE(mags.size() == 5);
    for (double m : mags)
        CHECK(m == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("real_fft_magnitudes rejects bad frame lengths") {
    std::vector<double> one{1.0};
    CHECK_THROWS_AS(real_fft_magnitudes(one), Error);
    std::vector<double> twelve(12, 0.0);
    CHECK_THROWS_AS(real_fft_magnitudes(twelve), Error);
}

TEST_CASE("real_fft_magnitudes matches a quadratic DFT on random frames") {
    std::mt19937_64 rng(991);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (size_t len : {8u, 16u, 64u, 256u}) {
        std::vector<double> frame(len);
        for (auto& s : frame)
            s = dist(rng);
        auto fast = real_fft_magnitudes(frame);
        auto slow = testkit::dft_magnitudes(frame);
        REQUIRE(fast.size() == slow.size());
        for (size_t k = 0; k < fast.size(); ++k)
            CHECK(fast[k] == doctest::Approx(slow[k]).epsilon(1e-9));
    }
}
