#include "qmeas/fft.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace qmeas {

namespace {

constexpr double kTwoPi = 6.283185307179586476925287;

// e^{-2 pi i j / n} for j < n/2, cached per size
const std::vector<cdouble>& twiddle_table(std::size_t n) {
    static thread_local std::unordered_map<std::size_t, std::vector<cdouble>> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    std::vector<cdouble> table(n / 2);
    for (std::size_t j = 0; j < n / 2; ++j) {
        const double ang = -kTwoPi * static_cast<double>(j) / static_cast<double>(n);
        table[j] = cdouble(std::cos(ang), std::sin(ang));
    }
    return cache.emplace(n, std::move(table)).first->second;
}

} // namespace

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft(std::span<cdouble> data, bool inverse) {
    const std::size_t n = data.size();
    if (n <= 1) return;
    if (!is_power_of_two(n)) throw std::invalid_argument("fft: size not a power of two");

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }

    const auto& table = twiddle_table(n);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t stride = n / len;
        for (std::size_t i = 0; i < n; i += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                const cdouble tw = table[k * stride];
                const cdouble w = inverse ? std::conj(tw) : tw;
                cdouble u = data[i + k];
                cdouble v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
            }
        }
    }

    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& z : data) z *= inv;
    }
}

void fft_strided(std::vector<cdouble>& data, std::size_t offset,
                 std::size_t stride, std::size_t count, bool inverse) {
    static thread_local std::vector<cdouble> scratch;
    scratch.resize(count);
    for (std::size_t i = 0; i < count; ++i) scratch[i] = data[offset + i * stride];
    fft(std::span<cdouble>(scratch.data(), scratch.size()), inverse);
    for (std::size_t i = 0; i < count; ++i) data[offset + i * stride] = scratch[i];
}

double fft_wavenumber(std::size_t j, std::size_t n, double length) {
    const double step = kTwoPi / length;
    const auto half = n / 2;
    if (j < half) return step * static_cast<double>(j);
    return step * (static_cast<double>(j) - static_cast<double>(n));
}

} // namespace qmeas
