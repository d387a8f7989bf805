#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

using Catch::Matchers::ContainsSubstring;
using sbr::Complex;

namespace {

sbr::RadarParams small_params(std::size_t n_samples, std::size_t n_chirps) {
    sbr::RadarParams p;
    p.n_samples = n_samples;
    p.n_chirps = n_chirps;
    return p;
}

} // namespace

TEST_CASE("round-trip delay conversion") {
    REQUIRE(sbr::delay_of(0.0) == 0.0);
    REQUIRE(sbr::delay_of(sbr::RadarParams::c) == 1.0);
    REQUIRE(sbr::delay_of(30.0) == testsup::kDelay30m); // frozen reference value, bitwise
    REQUIRE_THROWS_AS(sbr::delay_of(-1.0), std::invalid_argument);
}

TEST_CASE("chirp slope") {
    sbr::RadarParams p;
    REQUIRE(sbr::chirp_slope(p) == Catch::Approx(1e13).epsilon(1e-15));
    p.B = 0.0;
    REQUIRE(sbr::chirp_slope(p) == 0.0);
    p.T_c = 0.0;
    REQUIRE_THROWS_AS(sbr::chirp_slope(p), std::invalid_argument);
}

TEST_CASE("radar parameter validation reports every violation") {
    sbr::RadarParams p;
    p.f_c = -1.0;
    p.B = -1.0;
    p.T_c = -1.0;
    p.T_d = -2.0; // < T_c
    p.n_samples = 0;
    p.n_chirps = 0;
    const auto errors = p.validate();
    REQUIRE(errors.size() == 6);
    auto has = [&](const char* text) {
        return std::any_of(errors.begin(), errors.end(), [&](const std::string& e) {
            return e.find(text) != std::string::npos;
        });
    };
    REQUIRE(has("f_c must be > 0"));
    REQUIRE(has("B must be > 0"));
    REQUIRE(has("T_c must be > 0"));
    REQUIRE(has("T_d must be >= T_c"));
    REQUIRE(has("n_samples must be >= 1"));
    REQUIRE(has("n_chirps must be >= 1"));
    REQUIRE_THROWS_WITH(p.require_valid(), ContainsSubstring("invalid radar parameters"));

    const sbr::RadarParams good;
    REQUIRE(good.validate().empty());
}

TEST_CASE("no paths synthesize to silence") {
    const auto p = small_params(32, 4);
    const sbr::LengthMatrix lengths(p.n_chirps, 0);
    const auto chirps = sbr::synthesize_if(lengths, {}, p);
    REQUIRE(chirps.n_chirps == 4);
    REQUIRE(chirps.n_samples == 32);
    for (const auto& s : chirps.data) REQUIRE(s == Complex{});
}

TEST_CASE("a single static path matches the direct per-sample evaluation") {
    const auto p = small_params(64, 4);
    sbr::LengthMatrix lengths(p.n_chirps, 1);
    for (std::size_t j = 0; j < p.n_chirps; ++j) lengths.at(j, 0) = 30.0;
    const auto chirps = sbr::synthesize_if(lengths, {0.5}, p);

    for (std::size_t j = 0; j < p.n_chirps; ++j) {
        for (std::size_t n = 0; n < p.n_samples; ++n) {
            const Complex expected = testsup::direct_if_sample(0.5, 30.0, p, n);
            REQUIRE(std::abs(chirps.at(j, n) - expected) < 1e-10);
        }
    }
    // identical per-chirp geometry must give identical rows
    for (std::size_t n = 0; n < p.n_samples; ++n) {
        REQUIRE(chirps.at(0, n) == chirps.at(3, n));
    }
}

TEST_CASE("the beat frequency of a 15 m target lands in the expected fast-time bin") {
    const auto p = small_params(256, 1);
    sbr::LengthMatrix lengths(1, 1);
    lengths.at(0, 0) = 30.0; // two-way length for a 15 m monostatic target
    const auto chirps = sbr::synthesize_if(lengths, {1.0}, p);

    std::vector<Complex> row(chirps.row(0), chirps.row(0) + p.n_samples);
    const auto spectrum = testsup::naive_dft(row);
    std::size_t best = 0;
    for (std::size_t k = 1; k < spectrum.size(); ++k) {
        if (std::abs(spectrum[k]) > std::abs(spectrum[best])) best = k;
    }
    // continuous-bin prediction: (B/T_c)*(30/c)*T_c = 100.07
    REQUIRE(best == 100);
}

TEST_CASE("synthesis is additive over path subsets") {
    const auto p = small_params(64, 8);
    std::mt19937_64 gen(2025);
    std::uniform_real_distribution<double> len_dist(5.0, 50.0);
    std::uniform_real_distribution<double> amp_dist(0.2, 1.0);

    const std::size_t n_paths = 10, split = 4;
    sbr::LengthMatrix full(p.n_chirps, n_paths);
    std::vector<double> amps(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) {
        amps[i] = amp_dist(gen);
        const double base = len_dist(gen);
        for (std::size_t j = 0; j < p.n_chirps; ++j) full.at(j, i) = base + 0.001 * j;
    }
    sbr::LengthMatrix head(p.n_chirps, split), tail(p.n_chirps, n_paths - split);
    for (std::size_t j = 0; j < p.n_chirps; ++j) {
        for (std::size_t i = 0; i < split; ++i) head.at(j, i) = full.at(j, i);
        for (std::size_t i = split; i < n_paths; ++i) tail.at(j, i - split) = full.at(j, i);
    }
    const std::vector<double> head_amps(amps.begin(), amps.begin() + split);
    const std::vector<double> tail_amps(amps.begin() + split, amps.end());

    const auto all = sbr::synthesize_if(full, amps, p);
    const auto a = sbr::synthesize_if(head, head_amps, p);
    const auto b = sbr::synthesize_if(tail, tail_amps, p);

    std::vector<Complex> sum(all.data.size());
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] = a.data[k] + b.data[k];
    REQUIRE(testsup::frobenius_diff(all.data, sum) < 1e-12 * testsup::frobenius(all.data));
}

TEST_CASE("synthesis validates its inputs") {
    const auto p = small_params(16, 4);
    SECTION("chirp count mismatch") {
        const sbr::LengthMatrix lengths(3, 1);
        REQUIRE_THROWS_WITH(sbr::synthesize_if(lengths, {1.0}, p),
                            ContainsSubstring("chirp count"));
    }
    SECTION("amplitude count mismatch") {
        const sbr::LengthMatrix lengths(4, 2);
        REQUIRE_THROWS_WITH(sbr::synthesize_if(lengths, {1.0}, p),
                            ContainsSubstring("amplitude count"));
    }
    SECTION("corrupted storage") {
        sbr::LengthMatrix lengths(4, 1);
        lengths.data.pop_back();
        REQUIRE_THROWS_WITH(sbr::synthesize_if(lengths, {1.0}, p), ContainsSubstring("storage"));
    }
    SECTION("non-finite length") {
        sbr::LengthMatrix lengths(4, 1);
        lengths.at(2, 0) = std::numeric_limits<double>::quiet_NaN();
        REQUIRE_THROWS_WITH(sbr::synthesize_if(lengths, {1.0}, p),
                            ContainsSubstring("non-finite path length"));
    }
    SECTION("non-finite amplitude") {
        sbr::LengthMatrix lengths(4, 1);
        for (std::size_t j = 0; j < 4; ++j) lengths.at(j, 0) = 10.0;
        REQUIRE_THROWS_WITH(
            sbr::synthesize_if(lengths, {std::numeric_limits<double>::infinity()}, p),
            ContainsSubstring("non-finite amplitude"));
    }
    SECTION("invalid radar parameters") {
        auto bad = p;
        bad.n_samples = 0;
        const sbr::LengthMatrix lengths(4, 0);
        REQUIRE_THROWS_WITH(sbr::synthesize_if(lengths, {}, bad),
                            ContainsSubstring("invalid radar parameters"));
    }
}

TEST_CASE("the worker count does not change synthesized samples") {
    const auto p = small_params(128, 16);
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> len_dist(5.0, 80.0);
    sbr::LengthMatrix lengths(p.n_chirps, 6);
    std::vector<double> amps(6, 0.3);
    for (auto& d : lengths.data) d = len_dist(gen);

    const auto serial = sbr::synthesize_if(lengths, amps, p, 1);
    const auto parallel = sbr::synthesize_if(lengths, amps, p, 4);
    REQUIRE(serial.data == parallel.data);
}

TEST_CASE("a static target sits on the zero-Doppler row") {
    const auto p = small_params(64, 16);
    sbr::LengthMatrix lengths(p.n_chirps, 1);
    for (std::size_t j = 0; j < p.n_chirps; ++j) lengths.at(j, 0) = 18.0;
    const auto chirps = sbr::synthesize_if(lengths, {1.0}, p);
    const auto map = sbr::range_doppler(chirps, p, sbr::Window::none, sbr::Window::none, 1);

    REQUIRE(map.n_doppler == 16);
    REQUIRE(map.n_range == 64);
    const auto [row, col] = testsup::argmax_bin(map);
    REQUIRE(row == map.zero_doppler_row());
    REQUIRE(col == 60); // continuous fast-time bin: B * (18 / c) = 60.04
}

TEST_CASE("motion shifts the peak off the Doppler center with the receding-positive sign") {
    const auto p = small_params(64, 128); // f_c 77 GHz, T_d 1e-4
    const double r0 = 10.0;

    auto run = [&](double v) {
        sbr::LengthMatrix lengths(p.n_chirps, 1);
        for (std::size_t j = 0; j < p.n_chirps; ++j) {
            lengths.at(j, 0) = 2.0 * (r0 + v * static_cast<double>(j) * p.T_d);
        }
        const auto chirps = sbr::synthesize_if(lengths, {1.0}, p);
        return sbr::range_doppler(chirps, p, sbr::Window::none, sbr::Window::hann, 1);
    };

    // continuous Doppler bin offset: 2*v*f_c*T_d*n_chirps/c = 6.574*v
    const auto receding = run(2.0);
    const auto [row_r, col_r] = testsup::argmax_bin(receding);
    REQUIRE(row_r == receding.zero_doppler_row() + 13);

    const auto approaching = run(-2.0);
    const auto [row_a, col_a] = testsup::argmax_bin(approaching);
    REQUIRE(row_a == approaching.zero_doppler_row() - 13);

    // the velocity axis reproduces the simulated speed within one bin
    const double v_measured =
        (static_cast<double>(row_r) - static_cast<double>(receding.zero_doppler_row())) *
        receding.doppler_bin_mps;
    REQUIRE(std::abs(v_measured - 2.0) < 0.15);
}

TEST_CASE("map axis metadata follows the radar parameters") {
    const auto p = small_params(32, 8);
    sbr::LengthMatrix lengths(p.n_chirps, 1);
    for (std::size_t j = 0; j < p.n_chirps; ++j) lengths.at(j, 0) = 12.0;
    const auto chirps = sbr::synthesize_if(lengths, {1.0}, p);

    for (std::size_t zpf : {1u, 2u, 3u}) {
        const auto map = sbr::range_doppler(chirps, p, sbr::Window::hann, sbr::Window::hann, zpf);
        REQUIRE(map.n_doppler == p.n_chirps * zpf);
        REQUIRE(map.n_range == p.n_samples * zpf);
        REQUIRE(map.range_bin_meters ==
                sbr::RadarParams::c / (2.0 * p.B * static_cast<double>(zpf)));
        REQUIRE(map.doppler_bin_hz == 1.0 / (p.T_d * static_cast<double>(map.n_doppler)));
        REQUIRE(map.doppler_bin_mps ==
                map.doppler_bin_hz * sbr::RadarParams::c / (2.0 * p.f_c));
    }
    REQUIRE_THROWS_AS(sbr::range_doppler(chirps, p, sbr::Window::hann, sbr::Window::hann, 0),
                      std::invalid_argument);
    const sbr::ChirpMatrix empty;
    REQUIRE_THROWS_AS(sbr::range_doppler(empty, p), std::invalid_argument);
}

TEST_CASE("window taps") {
    const auto hann = sbr::make_window(sbr::Window::hann, 8);
    REQUIRE(hann.size() == 8);
    REQUIRE(hann[0] == 0.0);
    REQUIRE(hann[2] == Catch::Approx(0.5).margin(1e-15));
    REQUIRE(hann[4] == Catch::Approx(1.0).margin(1e-15));
    double sum = 0.0;
    for (double w : hann) sum += w;
    REQUIRE(sum == Catch::Approx(4.0).margin(1e-12)); // periodic taps sum to N/2

    const auto flat = sbr::make_window(sbr::Window::none, 5);
    REQUIRE(flat == std::vector<double>(5, 1.0));
    REQUIRE(sbr::make_window(sbr::Window::hann, 1) == std::vector<double>{1.0});
}

TEST_CASE("noise injection is seeded, scaled, and skippable") {
    sbr::ChirpMatrix a(128, 256), b(128, 256), c(128, 256);
    sbr::add_noise(a, 0.1, 42);
    sbr::add_noise(b, 0.1, 42);
    sbr::add_noise(c, 0.1, 43);
    REQUIRE(a.data == b.data);
    REQUIRE(a.data != c.data);

    double mean_power = 0.0;
    for (const auto& s : a.data) mean_power += std::norm(s);
    mean_power /= static_cast<double>(a.data.size());
    REQUIRE(mean_power == Catch::Approx(0.02).epsilon(0.05)); // 2*sigma^2

    sbr::ChirpMatrix untouched(4, 8);
    untouched.at(1, 3) = Complex(2.0, -1.0);
    auto copy = untouched.data;
    sbr::add_noise(untouched, 0.0, 42);
    REQUIRE(untouched.data == copy);
    sbr::add_noise(untouched, -1.0, 42);
    REQUIRE(untouched.data == copy);
}

TEST_CASE("dB conversion normalizes to the peak and floors at -400") {
    sbr::RangeDopplerMap map;
    map.n_doppler = 1;
    map.n_range = 3;
    map.spectrum = {Complex(1.0, 0.0), Complex(0.0, 0.1), Complex(0.0, 0.0)};
    REQUIRE(map.peak_magnitude() == 1.0);
    const auto db = map.magnitude_db();
    REQUIRE(db[0] == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(db[1] == Catch::Approx(-20.0).margin(1e-12));
    REQUIRE(db[2] == -400.0);

    sbr::RangeDopplerMap silent;
    silent.n_doppler = 2;
    silent.n_range = 2;
    silent.spectrum.assign(4, Complex{});
    REQUIRE(silent.peak_magnitude() == 0.0);
    for (double v : silent.magnitude_db()) REQUIRE(v == -400.0);
}
