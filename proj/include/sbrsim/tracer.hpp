// tracer.hpp — Monte-Carlo shooting-and-bouncing-rays tracing with per-hit meta data.
//
// Every bounce point attempts a visibility-checked connection to the receiver (next-event
// estimation); each successful connection emits one PathRecord carrying the full hit list
// (mesh id, triangle index, barycentric u/v per hit), the TX->hits->RX segment-sum length,
// and the amplitude product gathered along the way. Records are deterministic given the
// seed and independent of the worker count: each ray owns its own counter-based RNG stream
// and the final list is sorted by (ray_index, bounce depth).
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sbrsim/accel.hpp"
#include "sbrsim/scene.hpp"
#include "sbrsim/util.hpp"
#include "sbrsim/vec.hpp"

namespace sbr {

// Meta-data tuple stored per ray hit.
struct HitRecord {
    std::uint32_t mesh_id = 0;
    std::uint32_t triangle_index = 0;
    double bary_u = 0.0;
    double bary_v = 0.0;
};

// One TX -> scene -> RX connection. base_length is the path length at the trace snapshot;
// amplitude folds antenna gains, per-bounce reflectivity and 1/d^2 spreading loss.
struct PathRecord {
    std::uint64_t ray_index = 0;
    std::vector<HitRecord> hits;
    double base_length = 0.0;
    double amplitude = 0.0;
    std::uint16_t tx_index = 0;
    std::uint16_t rx_index = 0;

    std::size_t bounce_count() const { return hits.size(); }
};

struct AntennaPattern {
    enum class Kind { isotropic, raised_cosine };
    Kind kind = Kind::isotropic;
    double exp_azimuth = 2.0;   // cosine exponent in the azimuth cut
    double exp_elevation = 2.0; // cosine exponent in the elevation cut
    Vec3 boresight{1.0, 0.0, 0.0};
    Vec3 up{0.0, 0.0, 1.0};

    static AntennaPattern isotropic() { return {}; }
    static AntennaPattern raised_cosine(double k_az, double k_el, const Vec3& boresight_dir,
                                        const Vec3& up_dir = {0.0, 0.0, 1.0}) {
        AntennaPattern p;
        p.kind = Kind::raised_cosine;
        p.exp_azimuth = k_az;
        p.exp_elevation = k_el;
        p.boresight = normalized(boresight_dir);
        p.up = normalized(up_dir);
        return p;
    }
};

// Gain toward a unit direction pointing from the antenna into the scene: 1 everywhere for
// isotropic; cos^k_az(azimuth) * cos^k_el(elevation) in the pattern's local frame for raised
// cosine, zero beyond 90 degrees off boresight on either cut. Boresight gain is exactly 1.
inline double antenna_gain(const AntennaPattern& pattern, const Vec3& direction) {
    if (pattern.kind == AntennaPattern::Kind::isotropic) return 1.0;
    const Vec3 fwd = pattern.boresight;
    const Vec3 left = normalized(cross(pattern.up, fwd));
    const Vec3 up = cross(fwd, left);
    const double dx = dot(direction, fwd);
    const double dy = dot(direction, left);
    const double dz = dot(direction, up);
    const double azimuth = std::atan2(dy, dx);
    const double elevation = std::atan2(dz, std::sqrt(dx * dx + dy * dy));
    const double ca = std::cos(azimuth);
    const double ce = std::cos(elevation);
    if (ca <= 0.0 || ce <= 0.0) return 0.0;
    return std::pow(ca, pattern.exp_azimuth) * std::pow(ce, pattern.exp_elevation);
}

struct TraceConfig {
    std::uint64_t ray_count = 100000;
    int max_bounces = 3;
    std::uint64_t rng_seed = 0;
    Vec3 tx_position{};
    Vec3 rx_position{};
};

enum class BounceKind { specular, diffuse };

// Mirror reflection with probability material.specular_probability, otherwise a
// cosine-weighted direction in the hemisphere around the (incoming-facing) normal.
inline std::pair<Vec3, BounceKind> sample_bounce(const Vec3& incoming, const Vec3& normal,
                                                 const Material& material, RayRng& rng) {
    Vec3 n = normal;
    if (dot(n, incoming) > 0.0) n = -n;
    if (rng.next_double() < material.specular_probability) {
        return {incoming - 2.0 * dot(incoming, n) * n, BounceKind::specular};
    }
    const double u1 = rng.next_double();
    const double u2 = rng.next_double();
    const double r = std::sqrt(u1);
    const double phi = 6.283185307179586476925286766559 * u2;
    const double lx = r * std::cos(phi);
    const double ly = r * std::sin(phi);
    const double lz = std::sqrt(std::max(0.0, 1.0 - u1));
    Vec3 t, b;
    orthonormal_basis(n, t, b);
    return {normalized(lx * t + ly * b + lz * n), BounceKind::diffuse};
}

namespace detail {

inline Vec3 sample_launch_direction(const AntennaPattern& pattern, RayRng& rng) {
    const double u1 = rng.next_double();
    const double u2 = rng.next_double();
    const double phi = 6.283185307179586476925286766559 * u2;
    if (pattern.kind == AntennaPattern::Kind::isotropic) {
        const double z = 1.0 - 2.0 * u1;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        return {r * std::cos(phi), r * std::sin(phi), z};
    }
    // uniform over the boresight hemisphere (the raised-cosine support)
    const double z = u1;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    Vec3 t, b;
    orthonormal_basis(pattern.boresight, t, b);
    return normalized(r * std::cos(phi) * t + r * std::sin(phi) * b + z * pattern.boresight);
}

inline bool path_record_less(const PathRecord& a, const PathRecord& b) {
    if (a.ray_index != b.ray_index) return a.ray_index < b.ray_index;
    return a.hits.size() < b.hits.size();
}

} // namespace detail

// Traces cfg.ray_count rays through the scene frozen at time t. Returns every successful
// TX->...->RX connection, sorted by (ray_index, bounce depth). Empty scenes yield an empty list.
inline std::vector<PathRecord> trace_paths(const Scene& scene, const TraceConfig& cfg,
                                           const AntennaPattern& pattern_tx, const AntennaPattern& pattern_rx,
                                           double t = 0.0, int threads = 1) {
    if (cfg.ray_count < 1) throw std::invalid_argument("trace_paths: ray_count must be >= 1");
    if (cfg.max_bounces < 1) throw std::invalid_argument("trace_paths: max_bounces must be >= 1");
    if (scene.triangle_count() == 0) return {};

    const AccelIndex accel = build_accel(scene, t);

    // per-mesh tables so the bounce loop never re-poses geometry
    const std::size_t mesh_count = scene.meshes.size();
    std::vector<std::vector<Vec3>> tri_normals(mesh_count);
    std::vector<Material> mesh_material(mesh_count);
    std::unordered_map<std::uint32_t, std::size_t> mesh_slot;
    mesh_slot.reserve(mesh_count);
    for (std::size_t m = 0; m < mesh_count; ++m) {
        const Mesh& mesh = scene.meshes[m];
        mesh_slot.emplace(mesh.id, m);
        mesh_material[m] = scene.material_of(mesh);
        const std::vector<Vec3> verts = vertices_at(scene, mesh.id, t);
        auto& normals = tri_normals[m];
        normals.reserve(mesh.triangles.size());
        for (const auto& tri : mesh.triangles) {
            normals.push_back(normalized(cross(verts[tri[1]] - verts[tri[0]], verts[tri[2]] - verts[tri[0]])));
        }
    }

    const Vec3 tx = cfg.tx_position;
    const Vec3 rx = cfg.rx_position;

    const int workers = resolve_threads(threads);
    const auto worker_count = static_cast<std::size_t>(workers);
    const std::size_t chunk = (cfg.ray_count + worker_count - 1) / worker_count;
    std::vector<std::vector<PathRecord>> partial(worker_count);

    parallel_for_chunks(cfg.ray_count, workers, [&](std::size_t begin, std::size_t end) {
        auto& out = partial[begin / chunk];
        for (std::size_t ray = begin; ray < end; ++ray) {
            RayRng rng(cfg.rng_seed, ray);
            const Vec3 launch = detail::sample_launch_direction(pattern_tx, rng);
            const double gain_tx = antenna_gain(pattern_tx, launch);

            Vec3 pos = tx;
            Vec3 dir = launch;
            double travelled = 0.0;
            double reflect_product = 1.0;
            std::vector<HitRecord> hits;
            hits.reserve(static_cast<std::size_t>(cfg.max_bounces));

            for (int bounce = 0; bounce < cfg.max_bounces; ++bounce) {
                const auto hit = accel.intersect(pos, dir);
                if (!hit) break;
                hits.push_back({hit->mesh_id, hit->triangle_index, hit->bary_u, hit->bary_v});

                const Vec3 p = pos + dir * hit->distance;
                travelled += hit->distance;
                const std::size_t m = mesh_slot.at(hit->mesh_id);
                reflect_product *= mesh_material[m].reflectivity;

                // next-event estimation: visibility-checked connection to RX
                const double dist_rx = distance(p, rx);
                if (dist_rx > AccelIndex::kMinHitDistance && !accel.segment_occluded(p, rx)) {
                    const double base_length = travelled + dist_rx;
                    const double gain_rx = antenna_gain(pattern_rx, normalized(p - rx));
                    const double amplitude =
                        gain_tx * gain_rx * reflect_product / (base_length * base_length);
                    out.push_back({static_cast<std::uint64_t>(ray), hits, base_length, amplitude, 0, 0});
                }

                dir = sample_bounce(dir, tri_normals[m][hit->triangle_index], mesh_material[m], rng).first;
                pos = p;
            }
        }
    });

    std::vector<PathRecord> records;
    for (auto& part : partial) {
        records.insert(records.end(), std::make_move_iterator(part.begin()),
                       std::make_move_iterator(part.end()));
    }
    std::sort(records.begin(), records.end(), detail::path_record_less);
    return records;
}

} // namespace sbr
