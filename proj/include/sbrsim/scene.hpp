// scene.hpp — triangle meshes, materials, animation tracks, and time-resolved vertex queries.
//
// Geometry is a Wavefront OBJ subset (v and triangular f statements; vn/vt and grouping
// statements are skipped). Units are meters/seconds/radians throughout. A Scene is immutable
// after construction and safe for shared concurrent reads; vertices_at is pure.
#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sbrsim/vec.hpp"

namespace sbr {

struct Material {
    double specular_probability = 1.0; // Bernoulli chance of a mirror bounce
    double reflectivity = 1.0;         // amplitude factor applied per bounce
};

struct Mesh {
    std::uint32_t id = 0;
    std::vector<Vec3> vertices;
    std::vector<std::array<std::uint32_t, 3>> triangles;
    std::uint32_t material_id = 0;
};

struct RigidKeyframe {
    double t = 0.0;
    Vec3 translation{};
    Quat rotation{};
};

struct VertexSnapshot {
    double t = 0.0;
    std::vector<Vec3> vertices;
};

// Either a rigid keyframe track (translation + unit quaternion, applied as v' = R v + T)
// or a vertex-sequence track (full vertex arrays per timestamp, e.g. a skinned walker).
struct AnimationTrack {
    enum class Kind { rigid, vertex_sequence };
    Kind kind = Kind::rigid;
    std::vector<RigidKeyframe> keyframes;
    std::vector<VertexSnapshot> snapshots;
};

struct Scene {
    std::vector<Mesh> meshes;
    std::vector<Material> materials;
    std::map<std::uint32_t, AnimationTrack> tracks; // keyed by mesh id

    const Mesh* find_mesh(std::uint32_t mesh_id) const {
        for (const auto& m : meshes)
            if (m.id == mesh_id) return &m;
        return nullptr;
    }

    const Material& material_of(const Mesh& m) const { return materials.at(m.material_id); }

    std::size_t triangle_count() const {
        std::size_t n = 0;
        for (const auto& m : meshes) n += m.triangles.size();
        return n;
    }
};

// ---------------------------------------------------------------- OBJ I/O

inline Mesh load_obj(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_obj: cannot open '" + path + "'");

    Mesh mesh;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue; // blank line
        if (tag[0] == '#') continue;

        if (tag == "v") {
            Vec3 v;
            if (!(ls >> v.x >> v.y >> v.z))
                throw std::runtime_error("load_obj: malformed vertex at " + path + ":" + std::to_string(line_no));
            mesh.vertices.push_back(v);
        } else if (tag == "f") {
            std::vector<long> idx;
            std::string field;
            while (ls >> field) {
                // accept "i", "i/t", "i/t/n", "i//n" — only the vertex index is used
                const std::string head = field.substr(0, field.find('/'));
                try {
                    idx.push_back(std::stol(head));
                } catch (const std::exception&) {
                    throw std::runtime_error("load_obj: malformed face index '" + field + "' at " + path + ":" +
                                             std::to_string(line_no));
                }
            }
            if (idx.size() != 3)
                throw std::runtime_error("load_obj: non-triangular face (" + std::to_string(idx.size()) +
                                         " vertices) at " + path + ":" + std::to_string(line_no));
            std::array<std::uint32_t, 3> tri{};
            for (int k = 0; k < 3; ++k) {
                const long one_based = idx[static_cast<std::size_t>(k)];
                if (one_based < 1 || static_cast<std::size_t>(one_based) > mesh.vertices.size())
                    throw std::runtime_error("load_obj: face index " + std::to_string(one_based) +
                                             " out of range at " + path + ":" + std::to_string(line_no));
                tri[static_cast<std::size_t>(k)] = static_cast<std::uint32_t>(one_based - 1);
            }
            mesh.triangles.push_back(tri);
        } else if (tag == "vn" || tag == "vt" || tag == "o" || tag == "g" || tag == "s" || tag == "usemtl" ||
                   tag == "mtllib") {
            continue; // positions-only subset
        } else {
            throw std::runtime_error("load_obj: unsupported statement '" + tag + "' at " + path + ":" +
                                     std::to_string(line_no));
        }
    }
    return mesh;
}

inline void save_obj(const Mesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_obj: cannot open '" + path + "'");
    out.precision(17);
    for (const auto& v : mesh.vertices) out << "v " << v.x << ' ' << v.y << ' ' << v.z << '\n';
    for (const auto& t : mesh.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    if (!out) throw std::runtime_error("save_obj: write failed for '" + path + "'");
}

// ---------------------------------------------------------------- animation

namespace detail {

// Index i such that seq[i].t <= t <= seq[i+1].t, clamped to [0, n-2]. Requires size >= 2.
template <typename Seq>
std::size_t bracket_index(const Seq& seq, double t) {
    const auto it = std::upper_bound(seq.begin(), seq.end(), t,
                                     [](double value, const auto& e) { return value < e.t; });
    std::size_t i = static_cast<std::size_t>(it - seq.begin());
    if (i > 0) --i;
    return std::min(i, seq.size() - 2);
}

inline std::vector<Vec3> rigid_pose(const Mesh& mesh, const AnimationTrack& track, double t) {
    const auto& kf = track.keyframes;
    Vec3 translation;
    Quat rotation;
    if (kf.size() == 1 || t <= kf.front().t) {
        translation = kf.front().translation;
        rotation = kf.front().rotation;
    } else if (t >= kf.back().t) { // clamp beyond the last keyframe
        translation = kf.back().translation;
        rotation = kf.back().rotation;
    } else {
        const std::size_t i = bracket_index(kf, t);
        const auto& a = kf[i];
        const auto& b = kf[i + 1];
        const double s = (t - a.t) / (b.t - a.t);
        translation = a.translation + s * (b.translation - a.translation);
        rotation = slerp(a.rotation, b.rotation, s);
    }
    std::vector<Vec3> out;
    out.reserve(mesh.vertices.size());
    for (const auto& v : mesh.vertices) out.push_back(rotate(rotation, v) + translation);
    return out;
}

inline std::vector<Vec3> sequence_pose(const Mesh& mesh, const AnimationTrack& track, double t,
                                       std::uint32_t mesh_id) {
    const auto& snaps = track.snapshots;
    if (t < snaps.front().t || t > snaps.back().t)
        throw std::out_of_range("vertices_at: t=" + std::to_string(t) + " outside vertex-sequence range [" +
                                std::to_string(snaps.front().t) + ", " + std::to_string(snaps.back().t) +
                                "] of mesh " + std::to_string(mesh_id));
    if (snaps.size() == 1) return snaps.front().vertices;
    const std::size_t i = bracket_index(snaps, t);
    const auto& a = snaps[i];
    const auto& b = snaps[i + 1];
    const double s = (t - a.t) / (b.t - a.t);
    std::vector<Vec3> out;
    out.reserve(mesh.vertices.size());
    for (std::size_t k = 0; k < mesh.vertices.size(); ++k)
        out.push_back(a.vertices[k] + s * (b.vertices[k] - a.vertices[k]));
    return out;
}

} // namespace detail

// Vertex positions of mesh `mesh_id` at time t. Untracked meshes return the rest pose.
inline std::vector<Vec3> vertices_at(const Scene& scene, std::uint32_t mesh_id, double t) {
    const Mesh* mesh = scene.find_mesh(mesh_id);
    if (!mesh) throw std::runtime_error("vertices_at: unknown mesh id " + std::to_string(mesh_id));
    const auto it = scene.tracks.find(mesh_id);
    if (it == scene.tracks.end()) return mesh->vertices;
    const AnimationTrack& track = it->second;
    if (track.kind == AnimationTrack::Kind::rigid) return detail::rigid_pose(*mesh, track, t);
    return detail::sequence_pose(*mesh, track, t, mesh_id);
}

// Animation time range usable by every track in the scene ([0, inf) when unconstrained).
inline std::pair<double, double> animation_range(const Scene& scene) {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (const auto& [id, track] : scene.tracks) {
        (void)id;
        if (track.kind == AnimationTrack::Kind::vertex_sequence && !track.snapshots.empty()) {
            lo = std::max(lo, track.snapshots.front().t);
            hi = std::min(hi, track.snapshots.back().t);
        }
    }
    return {lo, hi};
}

// Structural validation; returns the complete list of violations (empty = valid).
inline std::vector<std::string> validate_scene(const Scene& scene) {
    std::vector<std::string> errors;
    std::map<std::uint32_t, int> seen;
    for (const auto& m : scene.meshes) {
        if (++seen[m.id] == 2) errors.push_back("duplicate mesh id " + std::to_string(m.id));
        if (m.triangles.empty()) errors.push_back("mesh " + std::to_string(m.id) + " has no triangles");
        bool index_ok = true;
        for (const auto& tri : m.triangles)
            for (const auto v : tri)
                if (v >= m.vertices.size()) index_ok = false;
        if (!index_ok)
            errors.push_back("mesh " + std::to_string(m.id) + ": triangle index out of range (" +
                             std::to_string(m.vertices.size()) + " vertices)");
        if (m.material_id >= scene.materials.size())
            errors.push_back("mesh " + std::to_string(m.id) + ": material_id " + std::to_string(m.material_id) +
                             " does not resolve (" + std::to_string(scene.materials.size()) + " materials)");
    }
    for (std::size_t i = 0; i < scene.materials.size(); ++i) {
        const auto& mat = scene.materials[i];
        if (!(mat.specular_probability >= 0.0 && mat.specular_probability <= 1.0))
            errors.push_back("material " + std::to_string(i) + ": specular_probability outside [0,1]");
        if (!(mat.reflectivity >= 0.0 && mat.reflectivity <= 1.0))
            errors.push_back("material " + std::to_string(i) + ": reflectivity outside [0,1]");
    }
    for (const auto& [mesh_id, track] : scene.tracks) {
        const std::string label = "track for mesh " + std::to_string(mesh_id);
        const Mesh* mesh = scene.find_mesh(mesh_id);
        if (!mesh) {
            errors.push_back(label + ": mesh id does not exist");
            continue;
        }
        if (track.kind == AnimationTrack::Kind::rigid) {
            if (track.keyframes.empty()) errors.push_back(label + ": no keyframes");
            for (std::size_t i = 0; i < track.keyframes.size(); ++i) {
                if (i > 0 && !(track.keyframes[i - 1].t < track.keyframes[i].t)) {
                    errors.push_back(label + ": keyframe times not strictly increasing");
                    break;
                }
            }
            for (const auto& kf : track.keyframes)
                if (std::abs(norm(kf.rotation) - 1.0) > 1e-6) {
                    errors.push_back(label + ": non-unit quaternion keyframe");
                    break;
                }
        } else {
            if (track.snapshots.empty()) errors.push_back(label + ": no snapshots");
            for (std::size_t i = 0; i < track.snapshots.size(); ++i) {
                if (i > 0 && !(track.snapshots[i - 1].t < track.snapshots[i].t)) {
                    errors.push_back(label + ": snapshot times not strictly increasing");
                    break;
                }
            }
            for (const auto& snap : track.snapshots)
                if (snap.vertices.size() != mesh->vertices.size()) {
                    errors.push_back(label + ": snapshot vertex count " + std::to_string(snap.vertices.size()) +
                                     " != mesh vertex count " + std::to_string(mesh->vertices.size()));
                    break;
                }
        }
    }
    return errors;
}

} // namespace sbr
