#pragma once

#include <complex>
#include <span>
#include <vector>

namespace opf {

bool is_power_of_two(size_t n);

// In-place iterative radix-2 FFT. data.size() must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& data);

// Magnitudes |X(k)| for k = 0..N/2 of a real frame of power-of-two length.
std::vector<double> real_fft_magnitudes(std::span<const double> frame);

} // namespace opf
