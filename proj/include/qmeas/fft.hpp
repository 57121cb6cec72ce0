#pragma once

#include <complex>
#include <span>
#include <vector>

namespace qmeas {

using cdouble = std::complex<double>;

// In-place radix-2 FFT, forward = sum_j x_j e^{-2pi i jk/n}. n must be a
// power of two. The inverse carries the 1/n factor.
void fft(std::span<cdouble> data, bool inverse);

// Strided transform over `count` points starting at data[offset], step
// `stride` (used for the second axis of 2-D grids).
void fft_strided(std::vector<cdouble>& data, std::size_t offset,
                 std::size_t stride, std::size_t count, bool inverse);

bool is_power_of_two(std::size_t n);

// Angular wavenumber of FFT bin j on a periodic grid of n points, length L:
// 2*pi*j/L for j < n/2, negative alias above.
double fft_wavenumber(std::size_t j, std::size_t n, double length);

} // namespace qmeas
