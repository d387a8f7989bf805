// signal.hpp — FMCW chirp-sequence IF synthesis and range-Doppler processing.
//
// The IF model is complex-valued: sample(j, n) = sum_i amp_i * exp(i*2*pi*(mu*t_n*tau_i(j)
// + f_c*tau_i(j))) with t_n = n*T_c/n_samples and mu = B/T_c. Each path contributes a
// geometric phasor sequence over fast time, and paths are summed in ascending order, so a
// subset of paths synthesizes to exactly the same per-path terms as the full set — signal
// decomposition stays additive to rounding error.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sbrsim/fft.hpp"
#include "sbrsim/util.hpp"

namespace sbr {

struct RadarParams {
    double f_c = 77e9;  // carrier frequency, Hz
    double B = 1e9;     // sweep bandwidth, Hz
    double T_c = 1e-4;  // chirp duration, s
    double T_d = 1e-4;  // chirp repetition interval, s (>= T_c)
    std::size_t n_samples = 256; // fast-time samples per chirp
    std::size_t n_chirps = 128;  // slow-time chirps

    static constexpr double c = 299792458.0; // propagation speed, m/s

    std::vector<std::string> validate() const {
        std::vector<std::string> errors;
        if (!(f_c > 0.0)) errors.push_back("radar: f_c must be > 0");
        if (!(B > 0.0)) errors.push_back("radar: B must be > 0");
        if (!(T_c > 0.0)) errors.push_back("radar: T_c must be > 0");
        if (!(T_d >= T_c)) errors.push_back("radar: T_d must be >= T_c");
        if (n_samples < 1) errors.push_back("radar: n_samples must be >= 1");
        if (n_chirps < 1) errors.push_back("radar: n_chirps must be >= 1");
        return errors;
    }

    void require_valid() const {
        const auto errors = validate();
        if (errors.empty()) return;
        std::ostringstream msg;
        msg << "invalid radar parameters:";
        for (const auto& e : errors) msg << ' ' << e << ';';
        throw std::invalid_argument(msg.str());
    }
};

// Round-trip delay of a path of total length d meters.
inline double delay_of(double d) {
    if (d < 0.0) throw std::invalid_argument("delay_of: negative path length");
    return d / RadarParams::c;
}

// Frequency slope mu = B / T_c. B == 0 degenerates to CW and is allowed here.
inline double chirp_slope(const RadarParams& params) {
    if (!(params.T_c > 0.0)) throw std::invalid_argument("chirp_slope: T_c must be > 0");
    return params.B / params.T_c;
}

// Row-major matrix of path lengths, one row per chirp.
struct LengthMatrix {
    std::size_t n_chirps = 0;
    std::size_t n_paths = 0;
    std::vector<double> data; // [chirp][path]

    LengthMatrix() = default;
    LengthMatrix(std::size_t chirps, std::size_t paths)
        : n_chirps(chirps), n_paths(paths), data(chirps * paths, 0.0) {}

    double& at(std::size_t j, std::size_t i) { return data[j * n_paths + i]; }
    double at(std::size_t j, std::size_t i) const { return data[j * n_paths + i]; }
    const double* row(std::size_t j) const { return data.data() + j * n_paths; }
};

// Row-major fast-time x slow-time sample block, one row per chirp.
struct ChirpMatrix {
    std::size_t n_chirps = 0;
    std::size_t n_samples = 0;
    std::vector<Complex> data; // [chirp][sample]

    ChirpMatrix() = default;
    ChirpMatrix(std::size_t chirps, std::size_t samples)
        : n_chirps(chirps), n_samples(samples), data(chirps * samples, Complex{}) {}

    Complex& at(std::size_t j, std::size_t n) { return data[j * n_samples + n]; }
    Complex at(std::size_t j, std::size_t n) const { return data[j * n_samples + n]; }
    Complex* row(std::size_t j) { return data.data() + j * n_samples; }
    const Complex* row(std::size_t j) const { return data.data() + j * n_samples; }
};

namespace detail {

// Adds every path's IF contribution for one chirp into out[0..n_samples). For path i the
// fast-time samples form a geometric phasor sequence: start = amp*exp(i*2*pi*f_c*tau),
// ratio = exp(i*2*pi*mu*tau*T_c/n_samples). Paths accumulate in ascending index order.
inline void synthesize_row(Complex* out, std::size_t n_samples, const double* lengths,
                           const double* amplitudes, std::size_t n_paths, double f_c, double mu,
                           double T_c) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t i = 0; i < n_paths; ++i) {
        const double tau = delay_of(lengths[i]);
        const double phase0 = two_pi * f_c * tau;
        const double dphase = two_pi * mu * tau * T_c / static_cast<double>(n_samples);
        Complex cur = amplitudes[i] * Complex{std::cos(phase0), std::sin(phase0)};
        const Complex step{std::cos(dphase), std::sin(dphase)};
        for (std::size_t n = 0; n < n_samples; ++n) {
            out[n] += cur;
            cur *= step;
        }
    }
}

} // namespace detail

// Synthesizes the IF chirp matrix from per-chirp path lengths and per-path amplitudes.
inline ChirpMatrix synthesize_if(const LengthMatrix& lengths, const std::vector<double>& amplitudes,
                                 const RadarParams& params, int threads = 1) {
    params.require_valid();
    if (lengths.n_chirps != params.n_chirps) {
        throw std::invalid_argument("synthesize_if: length matrix chirp count != params.n_chirps");
    }
    if (lengths.n_paths != amplitudes.size()) {
        throw std::invalid_argument("synthesize_if: amplitude count != length matrix path count");
    }
    if (lengths.data.size() != lengths.n_chirps * lengths.n_paths) {
        throw std::invalid_argument("synthesize_if: length matrix storage mismatch");
    }
    for (const double d : lengths.data) {
        if (!std::isfinite(d)) throw std::invalid_argument("synthesize_if: non-finite path length");
    }
    for (const double a : amplitudes) {
        if (!std::isfinite(a)) throw std::invalid_argument("synthesize_if: non-finite amplitude");
    }

    ChirpMatrix out(params.n_chirps, params.n_samples);
    const double mu = chirp_slope(params);
    parallel_for_chunks(params.n_chirps, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            detail::synthesize_row(out.row(j), params.n_samples, lengths.row(j), amplitudes.data(),
                                   lengths.n_paths, params.f_c, mu, params.T_c);
        }
    });
    return out;
}

// Adds complex white Gaussian noise, one independent stream per chirp row; stddev is the
// per-quadrature standard deviation. stddev <= 0 leaves the matrix untouched.
inline void add_noise(ChirpMatrix& chirps, double stddev, std::uint64_t seed) {
    if (!(stddev > 0.0)) return;
    for (std::size_t j = 0; j < chirps.n_chirps; ++j) {
        RayRng rng(seed, j);
        Complex* row = chirps.row(j);
        for (std::size_t n = 0; n < chirps.n_samples; ++n) {
            row[n] += Complex{stddev * rng.next_gaussian(), stddev * rng.next_gaussian()};
        }
    }
}

enum class Window { none, hann };

// Periodic Hann taps w[n] = 0.5*(1 - cos(2*pi*n/N)); Window::none yields all ones.
inline std::vector<double> make_window(Window window, std::size_t n) {
    std::vector<double> taps(n, 1.0);
    if (window == Window::hann && n > 1) {
        constexpr double two_pi = 2.0 * std::numbers::pi;
        for (std::size_t k = 0; k < n; ++k) {
            taps[k] = 0.5 * (1.0 - std::cos(two_pi * static_cast<double>(k) / static_cast<double>(n)));
        }
    }
    return taps;
}

// 2-D spectrum of a chirp matrix. Rows are Doppler bins with zero Doppler centered at row
// n_doppler/2; columns are range bins starting at zero range. dB values are 20*log10(|S|)
// normalized so the peak sits at 0 dB, floored at -400 dB.
struct RangeDopplerMap {
    std::size_t n_doppler = 0;
    std::size_t n_range = 0;
    std::vector<Complex> spectrum; // [doppler][range]
    double range_bin_meters = 0.0; // one-way range per column for monostatic two-way paths
    double doppler_bin_hz = 0.0;
    double doppler_bin_mps = 0.0;  // radial velocity per row, positive = receding

    Complex at(std::size_t d, std::size_t r) const { return spectrum[d * n_range + r]; }
    std::size_t zero_doppler_row() const { return n_doppler / 2; }

    double peak_magnitude() const {
        double peak = 0.0;
        for (const Complex& s : spectrum) peak = std::max(peak, std::abs(s));
        return peak;
    }

    std::vector<double> magnitude_db() const {
        constexpr double floor_db = -400.0;
        const double peak = peak_magnitude();
        std::vector<double> db(spectrum.size(), floor_db);
        if (peak <= 0.0) return db;
        for (std::size_t k = 0; k < spectrum.size(); ++k) {
            const double mag = std::abs(spectrum[k]);
            db[k] = mag > 0.0 ? std::max(floor_db, 20.0 * std::log10(mag / peak)) : floor_db;
        }
        return db;
    }
};

// Windows (per axis), zero-pads both axes by zero_pad_factor, runs the forward 2-D DFT and
// centers the Doppler axis.
inline RangeDopplerMap range_doppler(const ChirpMatrix& chirps, const RadarParams& params,
                                     Window window_fast = Window::hann,
                                     Window window_slow = Window::hann,
                                     std::size_t zero_pad_factor = 2) {
    if (zero_pad_factor < 1) throw std::invalid_argument("range_doppler: zero_pad_factor must be >= 1");
    if (chirps.data.size() != chirps.n_chirps * chirps.n_samples || chirps.n_chirps == 0 ||
        chirps.n_samples == 0) {
        throw std::invalid_argument("range_doppler: malformed chirp matrix");
    }

    const std::size_t rows = chirps.n_chirps * zero_pad_factor;
    const std::size_t cols = chirps.n_samples * zero_pad_factor;
    const std::vector<double> w_fast = make_window(window_fast, chirps.n_samples);
    const std::vector<double> w_slow = make_window(window_slow, chirps.n_chirps);

    std::vector<Complex> grid(rows * cols, Complex{});
    for (std::size_t j = 0; j < chirps.n_chirps; ++j) {
        const Complex* src = chirps.row(j);
        Complex* dst = grid.data() + j * cols;
        for (std::size_t n = 0; n < chirps.n_samples; ++n) dst[n] = src[n] * (w_slow[j] * w_fast[n]);
    }
    fft_2d(grid, rows, cols, false);
    fftshift_axis0(grid, rows, cols);

    RangeDopplerMap map;
    map.n_doppler = rows;
    map.n_range = cols;
    map.spectrum = std::move(grid);
    map.range_bin_meters = RadarParams::c / (2.0 * params.B * static_cast<double>(zero_pad_factor));
    map.doppler_bin_hz = 1.0 / (params.T_d * static_cast<double>(rows));
    map.doppler_bin_mps = map.doppler_bin_hz * RadarParams::c / (2.0 * params.f_c);
    return map;
}

} // namespace sbr
