#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

#include <cstring>
#include <zlib.h>

using Catch::Matchers::ContainsSubstring;
using sbr::Complex;

namespace {

std::uint32_t read_be32(const std::vector<unsigned char>& b, std::size_t pos) {
    return (static_cast<std::uint32_t>(b[pos]) << 24) | (static_cast<std::uint32_t>(b[pos + 1]) << 16) |
           (static_cast<std::uint32_t>(b[pos + 2]) << 8) | static_cast<std::uint32_t>(b[pos + 3]);
}

struct ParsedPng {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint8_t bit_depth = 0;
    std::uint8_t color_type = 0;
    std::vector<unsigned char> raw; // decompressed scanlines: filter byte + pixels per row
    std::vector<std::string> chunk_order;
};

// strict little parser: checks the signature and every chunk's CRC, inflates IDAT
ParsedPng parse_png(const std::string& path) {
    const auto bytes = sbr::read_file_bytes(path);
    const unsigned char signature[8] = {137, 'P', 'N', 'G', 13, 10, 26, 10};
    REQUIRE(bytes.size() > 8);
    REQUIRE(std::memcmp(bytes.data(), signature, 8) == 0);

    ParsedPng png;
    std::vector<unsigned char> idat;
    std::size_t pos = 8;
    while (pos < bytes.size()) {
        REQUIRE(pos + 8 <= bytes.size());
        const std::uint32_t length = read_be32(bytes, pos);
        const std::string type(bytes.begin() + static_cast<std::ptrdiff_t>(pos + 4),
                               bytes.begin() + static_cast<std::ptrdiff_t>(pos + 8));
        REQUIRE(pos + 12 + length <= bytes.size());
        const std::uint32_t stored_crc = read_be32(bytes, pos + 8 + length);
        REQUIRE(stored_crc == sbr::crc32_bytes(bytes.data() + pos + 4, 4 + length));
        png.chunk_order.push_back(type);

        if (type == "IHDR") {
            REQUIRE(length == 13);
            png.width = read_be32(bytes, pos + 8);
            png.height = read_be32(bytes, pos + 12);
            png.bit_depth = bytes[pos + 16];
            png.color_type = bytes[pos + 17];
        } else if (type == "IDAT") {
            idat.insert(idat.end(), bytes.begin() + static_cast<std::ptrdiff_t>(pos + 8),
                        bytes.begin() + static_cast<std::ptrdiff_t>(pos + 8 + length));
        }
        pos += 12 + length;
    }
    REQUIRE(pos == bytes.size());
    REQUIRE(png.chunk_order.front() == "IHDR");
    REQUIRE(png.chunk_order.back() == "IEND");

    png.raw.resize(static_cast<std::size_t>(png.height) * (png.width + 1));
    uLongf raw_size = static_cast<uLongf>(png.raw.size());
    REQUIRE(uncompress(png.raw.data(), &raw_size, idat.data(), static_cast<uLong>(idat.size())) ==
            Z_OK);
    REQUIRE(raw_size == png.raw.size());
    return png;
}

std::vector<sbr::PathRecord> sample_records() {
    sbr::PathRecord a;
    a.ray_index = (std::uint64_t{1} << 40) + 123;
    a.tx_index = 3;
    a.rx_index = 7;
    a.base_length = 20.000000499999875;
    a.amplitude = 1e-300;
    a.hits = {{1, 0, 0.25, 0.25}};

    sbr::PathRecord b;
    b.ray_index = a.ray_index + 1;
    b.base_length = 31.4159;
    b.amplitude = -0.0625;
    b.hits = {{2, 9, 0.0, 1.0}, {1, 1, 0.125, 0.5}, {4, 2, 1e-9, 0.999999999}};
    return {a, b};
}

bool same_records(const std::vector<sbr::PathRecord>& x, const std::vector<sbr::PathRecord>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i].ray_index != y[i].ray_index || x[i].tx_index != y[i].tx_index ||
            x[i].rx_index != y[i].rx_index || x[i].base_length != y[i].base_length ||
            x[i].amplitude != y[i].amplitude || x[i].hits.size() != y[i].hits.size()) {
            return false;
        }
        for (std::size_t h = 0; h < x[i].hits.size(); ++h) {
            const auto& ha = x[i].hits[h];
            const auto& hb = y[i].hits[h];
            if (ha.mesh_id != hb.mesh_id || ha.triangle_index != hb.triangle_index ||
                ha.bary_u != hb.bary_u || ha.bary_v != hb.bary_v) {
                return false;
            }
        }
    }
    return true;
}

} // namespace

TEST_CASE("path records survive the file round trip bit for bit") {
    testsup::TempDir dir;
    const std::string path = (dir.path() / "paths.rayp").string();
    const auto records = sample_records();
    sbr::write_raypath(path, records);
    REQUIRE(same_records(sbr::read_raypath(path), records));

    sbr::write_raypath(path, {});
    REQUIRE(sbr::read_raypath(path).empty());
}

TEST_CASE("raypath reading rejects damaged files") {
    testsup::TempDir dir;
    const std::string path = (dir.path() / "paths.rayp").string();
    sbr::write_raypath(path, sample_records());
    const auto good = sbr::read_file_bytes(path);

    SECTION("bad magic") {
        auto bad = good;
        bad[0] = 'X';
        sbr::write_file_bytes(path, bad);
        REQUIRE_THROWS_WITH(sbr::read_raypath(path), ContainsSubstring("bad magic"));
    }
    SECTION("unsupported version") {
        auto bad = good;
        bad[4] = 2;
        sbr::write_file_bytes(path, bad);
        REQUIRE_THROWS_WITH(sbr::read_raypath(path), ContainsSubstring("unsupported version 2"));
    }
    SECTION("truncation") {
        auto bad = good;
        bad.pop_back();
        sbr::write_file_bytes(path, bad);
        REQUIRE_THROWS_WITH(sbr::read_raypath(path), ContainsSubstring("truncated file"));
    }
    SECTION("trailing garbage") {
        auto bad = good;
        bad.push_back(0);
        sbr::write_file_bytes(path, bad);
        REQUIRE_THROWS_WITH(sbr::read_raypath(path), ContainsSubstring("trailing bytes"));
    }
    SECTION("missing file") {
        REQUIRE_THROWS_WITH(sbr::read_raypath((dir.path() / "nope.rayp").string()),
                            ContainsSubstring("cannot open"));
    }
}

TEST_CASE("sample cubes store float32 pairs per channel in tx-major order") {
    testsup::TempDir dir;
    const std::string path = (dir.path() / "cube.rcub").string();

    sbr::RadarCube cube;
    cube.n_tx = 1;
    cube.n_rx = 2;
    for (int c = 0; c < 2; ++c) {
        sbr::ChirpMatrix m(3, 4);
        for (std::size_t k = 0; k < m.data.size(); ++k) {
            m.data[k] = Complex(0.1 * static_cast<double>(k) + c, -0.25 * static_cast<double>(k));
        }
        cube.channels.push_back(std::move(m));
    }
    sbr::write_cube(path, cube);

    const auto loaded = sbr::read_cube(path);
    REQUIRE(loaded.n_channels == 2);
    REQUIRE(loaded.n_chirps == 3);
    REQUIRE(loaded.n_samples == 4);
    REQUIRE(loaded.data.size() == 24);
    for (std::size_t c = 0; c < 2; ++c) {
        const auto matrix = loaded.channel_matrix(c);
        for (std::size_t k = 0; k < 12; ++k) {
            const Complex original = cube.channels[c].data[k];
            // volatile keeps the optimizer from folding away the float32 rounding
            volatile float expected_re = static_cast<float>(original.real());
            volatile float expected_im = static_cast<float>(original.imag());
            const Complex expected(expected_re, expected_im);
            REQUIRE(matrix.data[k] == expected);
            REQUIRE(loaded.channel(c)[k] == expected);
        }
    }
}

TEST_CASE("cube reading rejects damaged files and writing rejects bad cubes") {
    testsup::TempDir dir;
    const std::string path = (dir.path() / "cube.rcub").string();

    sbr::RadarCube cube;
    cube.n_tx = 1;
    cube.n_rx = 1;
    cube.channels.push_back(sbr::ChirpMatrix(2, 2));
    sbr::write_cube(path, cube);
    const auto good = sbr::read_file_bytes(path);

    SECTION("bad magic") {
        auto bad = good;
        bad[3] = 'X';
        sbr::write_file_bytes(path, bad);
        REQUIRE_THROWS_WITH(sbr::read_cube(path), ContainsSubstring("bad magic"));
    }
    SECTION("unsupported version") {
        auto bad = good;
        bad[4] = 9;
        sbr::write_file_bytes(path, bad);
        REQUIRE_THROWS_WITH(sbr::read_cube(path), ContainsSubstring("unsupported version 9"));
    }
    SECTION("unsupported dtype") {
        auto bad = good;
        bad[20] = 2; // magic(4) + version(4) + channels(4) + chirps(4) + samples(4)
        sbr::write_file_bytes(path, bad);
        REQUIRE_THROWS_WITH(sbr::read_cube(path), ContainsSubstring("unsupported dtype 2"));
    }
    SECTION("truncation and trailing bytes") {
        auto bad = good;
        bad.pop_back();
        sbr::write_file_bytes(path, bad);
        REQUIRE_THROWS_WITH(sbr::read_cube(path), ContainsSubstring("truncated file"));
        bad = good;
        bad.push_back(0);
        sbr::write_file_bytes(path, bad);
        REQUIRE_THROWS_WITH(sbr::read_cube(path), ContainsSubstring("trailing bytes"));
    }
    SECTION("empty or ragged cubes do not serialize") {
        sbr::RadarCube none;
        REQUIRE_THROWS_WITH(sbr::write_cube(path, none), ContainsSubstring("no channels"));
        sbr::RadarCube ragged = cube;
        ragged.channels.push_back(sbr::ChirpMatrix(2, 3));
        REQUIRE_THROWS_WITH(sbr::write_cube(path, ragged),
                            ContainsSubstring("channel dimensions differ"));
    }
}

TEST_CASE("grayscale PNGs carry valid chunks, CRCs, and unfiltered scanlines") {
    testsup::TempDir dir;
    const std::string path = (dir.path() / "gray.png").string();
    const std::vector<std::uint8_t> pixels = {10, 20, 30, 40, 50, 60};
    sbr::write_png_gray(path, 3, 2, pixels);

    const auto png = parse_png(path);
    REQUIRE(png.width == 3);
    REQUIRE(png.height == 2);
    REQUIRE(png.bit_depth == 8);
    REQUIRE(png.color_type == 0); // grayscale
    REQUIRE(png.raw ==
            std::vector<unsigned char>{0, 10, 20, 30, 0, 40, 50, 60}); // filter byte 0 per row

    REQUIRE_THROWS_AS(sbr::write_png_gray(path, 0, 2, {}), std::invalid_argument);
    REQUIRE_THROWS_AS(sbr::write_png_gray(path, 2, 2, {1, 2, 3}), std::invalid_argument);
}

TEST_CASE("dB-to-gray mapping spans 0 dB down to -60 dB") {
    REQUIRE(sbr::db_to_gray(0.0) == 255);
    REQUIRE(sbr::db_to_gray(-60.0) == 0);
    REQUIRE(sbr::db_to_gray(-30.0) == 128); // 127.5 rounds away from zero
    REQUIRE(sbr::db_to_gray(-400.0) == 0);  // clamps below
    REQUIRE(sbr::db_to_gray(10.0) == 255);  // clamps above
}

TEST_CASE("map and mask PNGs use range as width and Doppler as height") {
    testsup::TempDir dir;

    sbr::RangeDopplerMap map;
    map.n_doppler = 2;
    map.n_range = 3;
    map.spectrum = {Complex{1, 0}, Complex{0, 0}, Complex{0, 0},
                    Complex{0, 0}, Complex{0, 0}, Complex{0.001, 0}};
    const std::string map_path = (dir.path() / "map.png").string();
    sbr::write_map_png(map_path, map);
    const auto map_png = parse_png(map_path);
    REQUIRE(map_png.width == 3);
    REQUIRE(map_png.height == 2);
    // row 0 carries the first Doppler row: peak -> 255, silence -> 0, -60 dB -> 0
    REQUIRE(map_png.raw == std::vector<unsigned char>{0, 255, 0, 0, 0, 0, 0, 0});

    sbr::LabelMask mask;
    mask.name = "m";
    mask.n_doppler = 2;
    mask.n_range = 2;
    mask.mask = {1, 0, 0, 1};
    const std::string mask_path = (dir.path() / "mask.png").string();
    sbr::write_mask_png(mask_path, mask);
    const auto mask_png = parse_png(mask_path);
    REQUIRE(mask_png.width == 2);
    REQUIRE(mask_png.height == 2);
    REQUIRE(mask_png.raw == std::vector<unsigned char>{0, 255, 0, 0, 0, 255});
}

TEST_CASE("CRC-32 matches the reference vector and the file helper") {
    const unsigned char digits[] = "123456789";
    REQUIRE(sbr::crc32_bytes(digits, 9) == 0xCBF43926u);

    testsup::TempDir dir;
    const std::string path = (dir.path() / "blob.bin").string();
    const std::vector<unsigned char> blob = {'1', '2', '3', '4', '5', '6', '7', '8', '9'};
    sbr::write_file_bytes(path, blob);
    REQUIRE(sbr::crc32_file(path) == 0xCBF43926u);
}
