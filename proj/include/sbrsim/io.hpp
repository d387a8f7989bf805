// io.hpp — binary artifact formats: raypath records, radar cubes, grayscale PNG exports.
//
// Both binary formats are little-endian regardless of host. "RAYP" files hold the traced
// path records (per record: ray index, tx/rx indices, base length, amplitude, hit list of
// mesh id / triangle index / barycentric u, v). "RCUB" files hold complex float32 sample
// cubes with dims (channels, chirps, samples), channels tx-major. Range-Doppler magnitudes
// export as 8-bit grayscale PNGs spanning a peak-normalized 60 dB dynamic range; label masks
// export as 0/255 PNGs. DEFLATE and CRC-32 come from zlib.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <zlib.h>

#include "sbrsim/annotate.hpp"
#include "sbrsim/replay.hpp"
#include "sbrsim/signal.hpp"
#include "sbrsim/tracer.hpp"

namespace sbr {

inline constexpr std::uint32_t kRaypathVersion = 1;
inline constexpr std::uint32_t kCubeVersion = 1;
inline constexpr std::uint32_t kCubeDtypeComplex64 = 1; // interleaved float32 re/im

namespace detail {

inline void put_u16(std::vector<unsigned char>& b, std::uint16_t v) {
    b.push_back(static_cast<unsigned char>(v & 0xff));
    b.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
}

inline void put_u32(std::vector<unsigned char>& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

inline void put_u64(std::vector<unsigned char>& b, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

inline void put_f64(std::vector<unsigned char>& b, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u64(b, bits);
}

inline void put_f32(std::vector<unsigned char>& b, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u32(b, bits);
}

inline void put_u32be(std::vector<unsigned char>& b, std::uint32_t v) {
    for (int i = 3; i >= 0; --i) b.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
}

class ByteReader {
public:
    explicit ByteReader(std::vector<unsigned char> bytes, std::string label)
        : bytes_(std::move(bytes)), label_(std::move(label)) {}

    std::uint16_t u16() {
        need(2);
        const std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | bytes_[pos_ + static_cast<std::size_t>(i)];
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | bytes_[pos_ + static_cast<std::size_t>(i)];
        pos_ += 8;
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }
    float f32() {
        const std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }
    void expect_done() const {
        if (pos_ != bytes_.size()) throw std::runtime_error(label_ + ": trailing bytes after payload");
    }

private:
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size()) throw std::runtime_error(label_ + ": truncated file");
    }

    std::vector<unsigned char> bytes_;
    std::string label_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline std::vector<unsigned char> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw std::runtime_error("read failed: " + path);
    return bytes;
}

inline void write_file_bytes(const std::string& path, const std::vector<unsigned char>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline std::uint32_t crc32_bytes(const unsigned char* data, std::size_t size) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    while (size > 0) {
        const auto block = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
        crc = ::crc32(crc, data, block);
        data += block;
        size -= block;
    }
    return static_cast<std::uint32_t>(crc);
}

inline std::uint32_t crc32_file(const std::string& path) {
    const auto bytes = read_file_bytes(path);
    return crc32_bytes(bytes.data(), bytes.size());
}

// ---- raypath records ("RAYP") ----

inline void write_raypath(const std::string& path, const std::vector<PathRecord>& records) {
    std::vector<unsigned char> b;
    b.push_back('R');
    b.push_back('A');
    b.push_back('Y');
    b.push_back('P');
    detail::put_u32(b, kRaypathVersion);
    detail::put_u64(b, static_cast<std::uint64_t>(records.size()));
    for (const PathRecord& rec : records) {
        if (rec.hits.size() > 0xffff) throw std::runtime_error("write_raypath: hit count exceeds u16");
        detail::put_u64(b, rec.ray_index);
        detail::put_u16(b, rec.tx_index);
        detail::put_u16(b, rec.rx_index);
        detail::put_f64(b, rec.base_length);
        detail::put_f64(b, rec.amplitude);
        detail::put_u16(b, static_cast<std::uint16_t>(rec.hits.size()));
        for (const HitRecord& hit : rec.hits) {
            detail::put_u32(b, hit.mesh_id);
            detail::put_u32(b, hit.triangle_index);
            detail::put_f64(b, hit.bary_u);
            detail::put_f64(b, hit.bary_v);
        }
    }
    write_file_bytes(path, b);
}

inline std::vector<PathRecord> read_raypath(const std::string& path) {
    detail::ByteReader r(read_file_bytes(path), "raypath '" + path + "'");
    if (r.u32() != 0x50594152u) throw std::runtime_error("raypath '" + path + "': bad magic"); // "RAYP"
    const std::uint32_t version = r.u32();
    if (version != kRaypathVersion) {
        throw std::runtime_error("raypath '" + path + "': unsupported version " + std::to_string(version));
    }
    const std::uint64_t count = r.u64();
    std::vector<PathRecord> records;
    records.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        PathRecord rec;
        rec.ray_index = r.u64();
        rec.tx_index = r.u16();
        rec.rx_index = r.u16();
        rec.base_length = r.f64();
        rec.amplitude = r.f64();
        const std::uint16_t hit_count = r.u16();
        rec.hits.reserve(hit_count);
        for (std::uint16_t h = 0; h < hit_count; ++h) {
            HitRecord hit;
            hit.mesh_id = r.u32();
            hit.triangle_index = r.u32();
            hit.bary_u = r.f64();
            hit.bary_v = r.f64();
            rec.hits.push_back(hit);
        }
        records.push_back(std::move(rec));
    }
    r.expect_done();
    return records;
}

// ---- sample cubes ("RCUB") ----

// Raw cube view as stored on disk; channels are tx-major ((tx, rx) -> tx * n_rx + rx).
struct CubeFile {
    std::size_t n_channels = 0;
    std::size_t n_chirps = 0;
    std::size_t n_samples = 0;
    std::vector<Complex> data; // [channel][chirp][sample]

    const Complex* channel(std::size_t c) const { return data.data() + c * n_chirps * n_samples; }

    ChirpMatrix channel_matrix(std::size_t c) const {
        ChirpMatrix m(n_chirps, n_samples);
        const Complex* src = channel(c);
        std::copy(src, src + n_chirps * n_samples, m.data.begin());
        return m;
    }
};

inline void write_cube(const std::string& path, const RadarCube& cube) {
    if (cube.channels.empty()) throw std::runtime_error("write_cube: cube has no channels");
    const std::size_t n_chirps = cube.channels.front().n_chirps;
    const std::size_t n_samples = cube.channels.front().n_samples;
    for (const ChirpMatrix& ch : cube.channels) {
        if (ch.n_chirps != n_chirps || ch.n_samples != n_samples) {
            throw std::runtime_error("write_cube: channel dimensions differ");
        }
    }
    std::vector<unsigned char> b;
    b.push_back('R');
    b.push_back('C');
    b.push_back('U');
    b.push_back('B');
    detail::put_u32(b, kCubeVersion);
    detail::put_u32(b, static_cast<std::uint32_t>(cube.channels.size()));
    detail::put_u32(b, static_cast<std::uint32_t>(n_chirps));
    detail::put_u32(b, static_cast<std::uint32_t>(n_samples));
    detail::put_u32(b, kCubeDtypeComplex64);
    for (const ChirpMatrix& ch : cube.channels) {
        for (const Complex& s : ch.data) {
            detail::put_f32(b, static_cast<float>(s.real()));
            detail::put_f32(b, static_cast<float>(s.imag()));
        }
    }
    write_file_bytes(path, b);
}

inline CubeFile read_cube(const std::string& path) {
    detail::ByteReader r(read_file_bytes(path), "cube '" + path + "'");
    if (r.u32() != 0x42554352u) throw std::runtime_error("cube '" + path + "': bad magic"); // "RCUB"
    const std::uint32_t version = r.u32();
    if (version != kCubeVersion) {
        throw std::runtime_error("cube '" + path + "': unsupported version " + std::to_string(version));
    }
    CubeFile cube;
    cube.n_channels = r.u32();
    cube.n_chirps = r.u32();
    cube.n_samples = r.u32();
    const std::uint32_t dtype = r.u32();
    if (dtype != kCubeDtypeComplex64) {
        throw std::runtime_error("cube '" + path + "': unsupported dtype " + std::to_string(dtype));
    }
    const std::size_t total = cube.n_channels * cube.n_chirps * cube.n_samples;
    cube.data.reserve(total);
    for (std::size_t k = 0; k < total; ++k) {
        const float re = r.f32();
        const float im = r.f32();
        cube.data.emplace_back(re, im);
    }
    r.expect_done();
    return cube;
}

// ---- PNG export ----

namespace detail {

inline void png_chunk(std::vector<unsigned char>& out, const char type[4],
                      const std::vector<unsigned char>& payload) {
    put_u32be(out, static_cast<std::uint32_t>(payload.size()));
    std::vector<unsigned char> body;
    body.reserve(4 + payload.size());
    body.insert(body.end(), type, type + 4);
    body.insert(body.end(), payload.begin(), payload.end());
    out.insert(out.end(), body.begin(), body.end());
    put_u32be(out, crc32_bytes(body.data(), body.size()));
}

} // namespace detail

// 8-bit grayscale PNG, pixels row-major with row 0 at the top.
inline void write_png_gray(const std::string& path, std::size_t width, std::size_t height,
                           const std::vector<std::uint8_t>& pixels) {
    if (width == 0 || height == 0) throw std::invalid_argument("write_png_gray: empty image");
    if (pixels.size() != width * height) throw std::invalid_argument("write_png_gray: pixel count mismatch");

    // raw scanlines, filter byte 0 (None) per row
    std::vector<unsigned char> raw;
    raw.reserve(height * (width + 1));
    for (std::size_t y = 0; y < height; ++y) {
        raw.push_back(0);
        raw.insert(raw.end(), pixels.begin() + static_cast<std::ptrdiff_t>(y * width),
                   pixels.begin() + static_cast<std::ptrdiff_t>((y + 1) * width));
    }

    uLongf compressed_size = compressBound(static_cast<uLong>(raw.size()));
    std::vector<unsigned char> compressed(compressed_size);
    const int rc = compress2(compressed.data(), &compressed_size, raw.data(),
                             static_cast<uLong>(raw.size()), 6);
    if (rc != Z_OK) throw std::runtime_error("write_png_gray: deflate failed");
    compressed.resize(compressed_size);

    std::vector<unsigned char> ihdr;
    detail::put_u32be(ihdr, static_cast<std::uint32_t>(width));
    detail::put_u32be(ihdr, static_cast<std::uint32_t>(height));
    ihdr.push_back(8); // bit depth
    ihdr.push_back(0); // color type: grayscale
    ihdr.push_back(0); // compression
    ihdr.push_back(0); // filter
    ihdr.push_back(0); // interlace

    std::vector<unsigned char> out = {137, 'P', 'N', 'G', 13, 10, 26, 10};
    detail::png_chunk(out, "IHDR", ihdr);
    detail::png_chunk(out, "IDAT", compressed);
    detail::png_chunk(out, "IEND", {});
    write_file_bytes(path, out);
}

// Maps a peak-normalized dB value onto [0, 255]: 0 dB -> 255, -60 dB and below -> 0.
inline std::uint8_t db_to_gray(double db) {
    const double v = 255.0 * (1.0 + db / 60.0);
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

// Range-Doppler magnitude image: rows are Doppler bins (row 0 = most negative Doppler),
// columns are range bins growing left to right.
inline void write_map_png(const std::string& path, const RangeDopplerMap& map) {
    const std::vector<double> db = map.magnitude_db();
    std::vector<std::uint8_t> pixels(db.size());
    for (std::size_t k = 0; k < db.size(); ++k) pixels[k] = db_to_gray(db[k]);
    write_png_gray(path, map.n_range, map.n_doppler, pixels);
}

inline void write_mask_png(const std::string& path, const LabelMask& mask) {
    std::vector<std::uint8_t> pixels(mask.mask.size());
    for (std::size_t k = 0; k < mask.mask.size(); ++k) pixels[k] = mask.mask[k] ? 255 : 0;
    write_png_gray(path, mask.n_range, mask.n_doppler, pixels);
}

} // namespace sbr
