// replay.hpp — derives per-chirp and per-antenna path lengths from stored hit meta data.
//
// No ray is ever re-traced here: hit points are rebuilt from frozen barycentric coordinates
// on the animated triangles (the same-triangle assumption), segment sums give each chirp's
// path length, and other antenna positions get a first/last-segment swap correction. None of
// these routines takes an AccelIndex — replay performs zero intersection tests by shape.
// Visibility is not re-checked: a hit that becomes occluded mid-sequence stays in the signal.
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "sbrsim/scene.hpp"
#include "sbrsim/signal.hpp"
#include "sbrsim/tracer.hpp"
#include "sbrsim/util.hpp"
#include "sbrsim/vec.hpp"

namespace sbr {

// TX/RX position sets; the reference indices name the pair the rays were traced for.
struct AntennaLayout {
    std::vector<Vec3> tx_positions;
    std::vector<Vec3> rx_positions;
    std::size_t reference_tx = 0;
    std::size_t reference_rx = 0;

    static AntennaLayout reference_only(const Vec3& tx, const Vec3& rx) {
        AntennaLayout layout;
        layout.tx_positions = {tx};
        layout.rx_positions = {rx};
        return layout;
    }

    std::size_t channel_count() const { return tx_positions.size() * rx_positions.size(); }

    std::vector<std::string> validate() const {
        std::vector<std::string> errors;
        if (tx_positions.empty()) errors.push_back("layout: no TX positions");
        if (rx_positions.empty()) errors.push_back("layout: no RX positions");
        if (reference_tx >= tx_positions.size()) errors.push_back("layout: reference_tx out of range");
        if (reference_rx >= rx_positions.size()) errors.push_back("layout: reference_rx out of range");
        for (const Vec3& p : tx_positions) {
            if (!is_finite(p)) errors.push_back("layout: non-finite TX position");
        }
        for (const Vec3& p : rx_positions) {
            if (!is_finite(p)) errors.push_back("layout: non-finite RX position");
        }
        return errors;
    }
};

inline constexpr double kSimplexSlack = 1e-9;

// p = (1-u-v)*v1 + u*v2 + v*v3, the stored barycentric hit point on a (possibly moved) triangle.
inline Vec3 replay_hit_position(double u, double v, const Vec3& v1, const Vec3& v2, const Vec3& v3) {
    if (u < -kSimplexSlack || v < -kSimplexSlack || u + v > 1.0 + kSimplexSlack) {
        throw std::invalid_argument("replay_hit_position: barycentric coordinates outside the simplex");
    }
    return (1.0 - u - v) * v1 + u * v2 + v * v3;
}

// Per-chirp replay output for the reference antenna pair: each path's segment-sum length plus
// its first and last rebuilt hit points (the anchors for antenna displacement).
struct ChirpGeometry {
    std::vector<double> ref_lengths;
    std::vector<Vec3> first_hit;
    std::vector<Vec3> last_hit;
};

// Rebuilds every path's hit points at time t from stored (mesh, triangle, u, v) tuples and
// sums TX -> p_1 -> ... -> p_K -> RX. Poses each referenced mesh exactly once.
inline ChirpGeometry replay_chirp_geometry(const std::vector<PathRecord>& paths, const Scene& scene,
                                           const Vec3& tx, const Vec3& rx, double t) {
    std::unordered_map<std::uint32_t, std::vector<Vec3>> posed;
    auto posed_vertices = [&](std::uint32_t mesh_id) -> const std::vector<Vec3>& {
        auto it = posed.find(mesh_id);
        if (it == posed.end()) it = posed.emplace(mesh_id, vertices_at(scene, mesh_id, t)).first;
        return it->second;
    };

    ChirpGeometry geo;
    geo.ref_lengths.reserve(paths.size());
    geo.first_hit.reserve(paths.size());
    geo.last_hit.reserve(paths.size());

    for (const PathRecord& path : paths) {
        if (path.hits.empty()) throw std::invalid_argument("replay: path record with no hits");
        Vec3 prev = tx;
        double length = 0.0;
        Vec3 first{};
        Vec3 last{};
        for (std::size_t k = 0; k < path.hits.size(); ++k) {
            const HitRecord& hit = path.hits[k];
            const Mesh* mesh = scene.find_mesh(hit.mesh_id);
            if (mesh == nullptr) {
                throw std::runtime_error("replay: unknown mesh id " + std::to_string(hit.mesh_id));
            }
            if (hit.triangle_index >= mesh->triangles.size()) {
                throw std::runtime_error("replay: triangle index " + std::to_string(hit.triangle_index) +
                                         " out of range for mesh " + std::to_string(hit.mesh_id));
            }
            const std::vector<Vec3>& verts = posed_vertices(hit.mesh_id);
            const auto& tri = mesh->triangles[hit.triangle_index];
            const Vec3 p = replay_hit_position(hit.bary_u, hit.bary_v, verts[tri[0]], verts[tri[1]],
                                               verts[tri[2]]);
            length += distance(prev, p);
            if (k == 0) first = p;
            last = p;
            prev = p;
        }
        length += distance(prev, rx);
        geo.ref_lengths.push_back(length);
        geo.first_hit.push_back(first);
        geo.last_hit.push_back(last);
    }
    return geo;
}

// Reference-pair path lengths at chirp j, evaluated at the stop-and-hop instant t = j*T_d.
inline std::vector<double> lengths_at_chirp(const std::vector<PathRecord>& paths, const Scene& scene,
                                            const AntennaLayout& layout, std::size_t j,
                                            const RadarParams& params) {
    const auto errors = layout.validate();
    if (!errors.empty()) throw std::invalid_argument("lengths_at_chirp: " + errors.front());
    const Vec3 tx = layout.tx_positions[layout.reference_tx];
    const Vec3 rx = layout.rx_positions[layout.reference_rx];
    const double t = static_cast<double>(j) * params.T_d;
    return replay_chirp_geometry(paths, scene, tx, rx, t).ref_lengths;
}

// Adjusts a replayed path length to another antenna pair by swapping the first segment
// (TX side) and the last segment (RX side):
//   l' = l - |p_f - x_tx| + |p_f - x_tx'| - |p_l - x_rx| + |p_l - x_rx'|
// Exact for single-bounce paths; for longer paths the interior segments are unchanged, which
// holds when the new antennas are far from the scene relative to the displacement.
inline double displace_path(double length, const Vec3& p_first, const Vec3& p_last, const Vec3& x_tx,
                            const Vec3& x_rx, const Vec3& x_tx_new, const Vec3& x_rx_new) {
    return length - distance(p_first, x_tx) + distance(p_first, x_tx_new) - distance(p_last, x_rx) +
           distance(p_last, x_rx_new);
}

// One chirp matrix per (tx, rx) pair, tx-major.
struct RadarCube {
    std::size_t n_tx = 0;
    std::size_t n_rx = 0;
    std::vector<ChirpMatrix> channels;

    ChirpMatrix& channel(std::size_t tx, std::size_t rx) { return channels[tx * n_rx + rx]; }
    const ChirpMatrix& channel(std::size_t tx, std::size_t rx) const { return channels[tx * n_rx + rx]; }
};

// Wall-clock split of build_cube: geometry replay (hit rebuild + segment sums) vs signal
// synthesis (antenna displacement + IF accumulation).
struct ReplayTiming {
    double replay_seconds = 0.0;
    double synthesize_seconds = 0.0;
    std::size_t chirp_evaluations = 0;
};

// Replays geometry once per chirp, then synthesizes every (tx, rx) channel from it. Amplitudes
// stay frozen at their traced values across chirps and channels (far-field assumption).
inline RadarCube build_cube(const std::vector<PathRecord>& paths, const Scene& scene,
                            const AntennaLayout& layout, const RadarParams& params, int threads = 1,
                            ReplayTiming* timing = nullptr) {
    params.require_valid();
    {
        const auto errors = layout.validate();
        if (!errors.empty()) throw std::invalid_argument("build_cube: " + errors.front());
    }

    const std::size_t n_paths = paths.size();
    const std::size_t n_chirps = params.n_chirps;
    const Vec3 ref_tx = layout.tx_positions[layout.reference_tx];
    const Vec3 ref_rx = layout.rx_positions[layout.reference_rx];

    Stopwatch replay_clock;
    std::vector<ChirpGeometry> geometry(n_chirps);
    parallel_for_chunks(n_chirps, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            geometry[j] = replay_chirp_geometry(paths, scene, ref_tx, ref_rx,
                                                static_cast<double>(j) * params.T_d);
        }
    });
    const double replay_seconds = replay_clock.seconds();

    std::vector<double> amplitudes;
    amplitudes.reserve(n_paths);
    for (const PathRecord& path : paths) amplitudes.push_back(path.amplitude);

    Stopwatch synth_clock;
    RadarCube cube;
    cube.n_tx = layout.tx_positions.size();
    cube.n_rx = layout.rx_positions.size();
    cube.channels.reserve(cube.n_tx * cube.n_rx);
    for (std::size_t ti = 0; ti < cube.n_tx; ++ti) {
        for (std::size_t ri = 0; ri < cube.n_rx; ++ri) {
            LengthMatrix lengths(n_chirps, n_paths);
            const bool is_reference = ti == layout.reference_tx && ri == layout.reference_rx;
            for (std::size_t j = 0; j < n_chirps; ++j) {
                const ChirpGeometry& geo = geometry[j];
                double* row = lengths.data.data() + j * n_paths;
                if (is_reference) {
                    for (std::size_t i = 0; i < n_paths; ++i) row[i] = geo.ref_lengths[i];
                } else {
                    const Vec3 tx = layout.tx_positions[ti];
                    const Vec3 rx = layout.rx_positions[ri];
                    for (std::size_t i = 0; i < n_paths; ++i) {
                        row[i] = displace_path(geo.ref_lengths[i], geo.first_hit[i], geo.last_hit[i],
                                               ref_tx, ref_rx, tx, rx);
                    }
                }
            }
            cube.channels.push_back(synthesize_if(lengths, amplitudes, params, threads));
        }
    }

    if (timing != nullptr) {
        timing->replay_seconds = replay_seconds;
        timing->synthesize_seconds = synth_clock.seconds();
        timing->chirp_evaluations = n_chirps;
    }
    return cube;
}

} // namespace sbr
