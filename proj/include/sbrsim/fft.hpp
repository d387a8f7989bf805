// fft.hpp — discrete Fourier transforms used by the range-Doppler processing chain.
//
// Power-of-two sizes run an iterative radix-2 transform; every other size is handled by
// Bluestein's chirp-z algorithm, so callers may pick arbitrary pad lengths. Forward
// transforms use the e^{-i 2 pi k n / N} kernel and are unscaled; inverse transforms
// scale by 1/N so that inverse(forward(x)) == x.
#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace sbr {

using Complex = std::complex<double>;

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

namespace detail {

// In-place radix-2 transform, unscaled. sign = -1 forward, +1 backward.
inline void radix2_unscaled(Complex* a, std::size_t n, double sign) {
    if (n < 2) return;
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
        const Complex wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            Complex w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const Complex u = a[i + k];
                const Complex v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

// Bluestein chirp-z: arbitrary-length unscaled DFT via one power-of-two convolution.
inline void bluestein_unscaled(Complex* a, std::size_t n, double sign) {
    std::size_t m = 1;
    while (m < 2 * n - 1) m <<= 1;

    // w[k] = exp(sign * i * pi * k^2 / n); k^2 is reduced mod 2n to keep the angle exact.
    std::vector<Complex> w(n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::uint64_t k2 = (static_cast<std::uint64_t>(k) * k) % (2 * n);
        const double ang = sign * std::numbers::pi * static_cast<double>(k2) / static_cast<double>(n);
        w[k] = {std::cos(ang), std::sin(ang)};
    }

    std::vector<Complex> x(m), y(m);
    for (std::size_t k = 0; k < n; ++k) x[k] = a[k] * w[k];
    y[0] = std::conj(w[0]);
    for (std::size_t k = 1; k < n; ++k) y[k] = y[m - k] = std::conj(w[k]);

    radix2_unscaled(x.data(), m, -1.0);
    radix2_unscaled(y.data(), m, -1.0);
    for (std::size_t k = 0; k < m; ++k) x[k] *= y[k];
    radix2_unscaled(x.data(), m, 1.0);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * inv_m * w[k];
}

} // namespace detail

// One-dimensional transform over a contiguous buffer of length n.
inline void fft(Complex* a, std::size_t n, bool inverse) {
    if (n == 0) return;
    const double sign = inverse ? 1.0 : -1.0;
    if (is_power_of_two(n)) {
        detail::radix2_unscaled(a, n, sign);
    } else {
        detail::bluestein_unscaled(a, n, sign);
    }
    if (inverse) {
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t k = 0; k < n; ++k) a[k] *= inv_n;
    }
}

inline void fft(std::vector<Complex>& a, bool inverse) { fft(a.data(), a.size(), inverse); }

// Row-major 2-D transform: every row, then every column.
inline void fft_2d(std::vector<Complex>& data, std::size_t rows, std::size_t cols, bool inverse) {
    if (data.size() != rows * cols) throw std::invalid_argument("fft_2d: size != rows * cols");
    if (rows == 0 || cols == 0) return;
    for (std::size_t r = 0; r < rows; ++r) fft(data.data() + r * cols, cols, inverse);
    std::vector<Complex> column(rows);
    for (std::size_t c = 0; c < cols; ++c) {
        for (std::size_t r = 0; r < rows; ++r) column[r] = data[r * cols + c];
        fft(column.data(), rows, inverse);
        for (std::size_t r = 0; r < rows; ++r) data[r * cols + c] = column[r];
    }
}

// Rotates rows so the zero bin lands in the middle (row rows/2); matches the usual
// fftshift convention for both parities.
inline void fftshift_axis0(std::vector<Complex>& data, std::size_t rows, std::size_t cols) {
    if (data.size() != rows * cols) throw std::invalid_argument("fftshift_axis0: size != rows * cols");
    if (rows < 2) return;
    const std::size_t middle = rows - rows / 2;
    std::rotate(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(middle * cols), data.end());
}

} // namespace sbr
