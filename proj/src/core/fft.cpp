#include "core/fft.hpp"

#include "core/errors.hpp"

#include <cmath>

namespace opf {

bool is_power_of_two(size_t n) {
    return n != 0 && (n & (n - 1)) == 0;
}

void fft_radix2(std::vector<std::complex<double>>& data) {
    const size_t n = data.size();
    if (!is_power_of_two(n))
        raise(Errc::invalid_argument, "fft length must be a power of two");
    if (n == 1) return;

    // bit-reversal permutation
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }

    for (size_t len = 2; len <= n; len <<= 1) {
        const double angle = -2.0 * M_PI / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(angle), std::sin(angle));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = data[i + k];
                std::complex<double> v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

std::vector<double> real_fft_magnitudes(std::span<const double> frame) {
    const size_t n = frame.size();
    if (!is_power_of_two(n) || n < 2)
        raise(Errc::invalid_argument, "frame length must be a power of two >= 2");

    std::vector<std::complex<double>> buf(frame.begin(), frame.end());
    fft_radix2(buf);

    std::vector<double> mags(n / 2 + 1);
    for (size_t k = 0; k <= n / 2; ++k) mags[k] = std::abs(buf[k]);
    return mags;
}

} // namespace opf
