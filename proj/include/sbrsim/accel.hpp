// accel.hpp — median-split BVH over the scene's triangles at a fixed snapshot time.
//
// Query results are required to match an exhaustive per-triangle test exactly, including
// the tie rule for equal hit distances (lowest (mesh_id, triangle_index) wins), so node
// pruning keeps candidates whose entry distance equals the current best.
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "sbrsim/scene.hpp"
#include "sbrsim/vec.hpp"

namespace sbr {

struct Hit {
    std::uint32_t mesh_id = 0;
    std::uint32_t triangle_index = 0;
    double bary_u = 0.0; // convention: p = (1-u-v) v1 + u v2 + v v3
    double bary_v = 0.0;
    double distance = 0.0;
};

// Flattened triangle with world-space vertices at the index's snapshot time.
struct TriRef {
    Vec3 v0, v1, v2;
    std::uint32_t mesh_id = 0;
    std::uint32_t triangle_index = 0;
    std::uint32_t mesh_index = 0; // position in Scene::meshes, for material lookup
};

// Möller-Trumbore, double-sided. Hits closer than min_dist are discarded (self-intersection guard).
inline bool intersect_triangle(const Vec3& origin, const Vec3& dir, const TriRef& tri, double min_dist,
                               Hit& out) {
    const Vec3 e1 = tri.v1 - tri.v0;
    const Vec3 e2 = tri.v2 - tri.v0;
    const Vec3 pvec = cross(dir, e2);
    const double det = dot(e1, pvec);
    if (std::abs(det) < 1e-14) return false;
    const double inv_det = 1.0 / det;
    const Vec3 tvec = origin - tri.v0;
    const double u = dot(tvec, pvec) * inv_det;
    if (u < 0.0 || u > 1.0) return false;
    const Vec3 qvec = cross(tvec, e1);
    const double v = dot(dir, qvec) * inv_det;
    if (v < 0.0 || u + v > 1.0) return false;
    const double t = dot(e2, qvec) * inv_det;
    if (t <= min_dist) return false;
    out = {tri.mesh_id, tri.triangle_index, u, v, t};
    return true;
}

class AccelIndex {
public:
    static constexpr double kMinHitDistance = 1e-6; // meters
    static constexpr std::size_t kLeafSize = 4;

    AccelIndex() = default;
    AccelIndex(const AccelIndex&) = delete;
    AccelIndex& operator=(const AccelIndex&) = delete;
    AccelIndex(AccelIndex&& other) noexcept
        : nodes_(std::move(other.nodes_)), tris_(std::move(other.tris_)),
          queries_(other.queries_.load(std::memory_order_relaxed)) {}

    // Nearest hit along origin + s*direction with s > kMinHitDistance; nullopt on miss.
    std::optional<Hit> intersect(const Vec3& origin, const Vec3& direction) const {
        queries_.fetch_add(1, std::memory_order_relaxed);
        if (nodes_.empty()) return std::nullopt;

        Hit best;
        best.distance = std::numeric_limits<double>::infinity();
        bool found = false;

        std::uint32_t stack[64];
        int top = 0;
        stack[top++] = 0;
        while (top > 0) {
            const Node& node = nodes_[stack[--top]];
            if (!hit_aabb(node, origin, direction, best.distance)) continue;
            if (node.count > 0) { // leaf
                for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
                    Hit h;
                    if (!intersect_triangle(origin, direction, tris_[i], kMinHitDistance, h)) continue;
                    if (!found || h.distance < best.distance ||
                        (h.distance == best.distance && key_of(h) < key_of(best))) {
                        best = h;
                        found = true;
                    }
                }
            } else {
                stack[top++] = node.right;
                stack[top++] = node.first; // left child; visited first
            }
        }
        if (!found) return std::nullopt;
        return best;
    }

    // True when a triangle lies strictly between a and b (both endpoints padded by the epsilon).
    bool segment_occluded(const Vec3& a, const Vec3& b) const {
        const Vec3 d = b - a;
        const double len = norm(d);
        if (len <= 2.0 * kMinHitDistance) return false;
        const auto hit = intersect(a, d / len);
        return hit && hit->distance < len - kMinHitDistance;
    }

    std::uint64_t intersect_calls() const { return queries_.load(std::memory_order_relaxed); }
    std::size_t triangle_count() const { return tris_.size(); }
    std::size_t node_count() const { return nodes_.size(); }

    friend AccelIndex build_accel(const Scene& scene, double t);

private:
    struct Node {
        Vec3 lo, hi;
        std::uint32_t first = 0; // leaf: first triangle; inner: left child
        std::uint32_t right = 0; // inner: right child
        std::uint32_t count = 0; // leaf: triangle count; inner: 0
    };

    static std::pair<std::uint32_t, std::uint32_t> key_of(const Hit& h) {
        return {h.mesh_id, h.triangle_index};
    }

    // Slab test against [0, t_limit]; keeps candidates whose entry distance ties t_limit.
    bool hit_aabb(const Node& node, const Vec3& o, const Vec3& d, double t_limit) const {
        double tmin = 0.0;
        double tmax = t_limit;
        const double ov[3] = {o.x, o.y, o.z};
        const double dv[3] = {d.x, d.y, d.z};
        const double lov[3] = {node.lo.x, node.lo.y, node.lo.z};
        const double hiv[3] = {node.hi.x, node.hi.y, node.hi.z};
        for (int axis = 0; axis < 3; ++axis) {
            if (dv[axis] == 0.0) {
                if (ov[axis] < lov[axis] || ov[axis] > hiv[axis]) return false;
                continue;
            }
            const double inv = 1.0 / dv[axis];
            double t0 = (lov[axis] - ov[axis]) * inv;
            double t1 = (hiv[axis] - ov[axis]) * inv;
            if (t0 > t1) std::swap(t0, t1);
            tmin = std::max(tmin, t0);
            tmax = std::min(tmax, t1);
            if (tmin > tmax) return false;
        }
        return true;
    }

    std::uint32_t build_node(std::vector<TriRef>& tris, std::vector<Vec3>& centroids, std::uint32_t begin,
                             std::uint32_t end) {
        Node node;
        node.lo = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                   std::numeric_limits<double>::infinity()};
        node.hi = {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
                   -std::numeric_limits<double>::infinity()};
        Vec3 clo = node.lo, chi = node.hi;
        for (std::uint32_t i = begin; i < end; ++i) {
            for (const Vec3* v : {&tris[i].v0, &tris[i].v1, &tris[i].v2}) {
                node.lo = {std::min(node.lo.x, v->x), std::min(node.lo.y, v->y), std::min(node.lo.z, v->z)};
                node.hi = {std::max(node.hi.x, v->x), std::max(node.hi.y, v->y), std::max(node.hi.z, v->z)};
            }
            const Vec3& c = centroids[i];
            clo = {std::min(clo.x, c.x), std::min(clo.y, c.y), std::min(clo.z, c.z)};
            chi = {std::max(chi.x, c.x), std::max(chi.y, c.y), std::max(chi.z, c.z)};
        }

        const auto index = static_cast<std::uint32_t>(nodes_.size());
        nodes_.push_back(node);

        const std::uint32_t count = end - begin;
        if (count <= kLeafSize) {
            nodes_[index].first = begin;
            nodes_[index].count = count;
            return index;
        }

        const Vec3 extent = chi - clo;
        int axis = 0;
        if (extent.y > extent.x) axis = 1;
        if (extent.z > (axis == 0 ? extent.x : extent.y)) axis = 2;

        const std::uint32_t mid = begin + count / 2;
        const auto pick = [axis](const Vec3& c) { return axis == 0 ? c.x : axis == 1 ? c.y : c.z; };

        // median split on centroid, stable fallback ordering by (mesh, triangle) for determinism
        std::vector<std::uint32_t> order(count);
        for (std::uint32_t i = 0; i < count; ++i) order[i] = begin + i;
        std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
            const double ca = pick(centroids[a]);
            const double cb = pick(centroids[b]);
            if (ca != cb) return ca < cb;
            return std::make_pair(tris[a].mesh_id, tris[a].triangle_index) <
                   std::make_pair(tris[b].mesh_id, tris[b].triangle_index);
        });
        std::vector<TriRef> tmp_t(count);
        std::vector<Vec3> tmp_c(count);
        for (std::uint32_t i = 0; i < count; ++i) {
            tmp_t[i] = tris[order[i]];
            tmp_c[i] = centroids[order[i]];
        }
        std::copy(tmp_t.begin(), tmp_t.end(), tris.begin() + begin);
        std::copy(tmp_c.begin(), tmp_c.end(), centroids.begin() + begin);

        const std::uint32_t left = build_node(tris, centroids, begin, mid);
        const std::uint32_t right = build_node(tris, centroids, mid, end);
        nodes_[index].first = left;
        nodes_[index].right = right;
        nodes_[index].count = 0;
        return index;
    }

    std::vector<Node> nodes_;
    std::vector<TriRef> tris_;
    mutable std::atomic<std::uint64_t> queries_{0};
};

// Flattens every mesh at vertices_at(scene, ., t) and builds the hierarchy.
inline AccelIndex build_accel(const Scene& scene, double t) {
    std::vector<TriRef> tris;
    for (std::uint32_t mi = 0; mi < scene.meshes.size(); ++mi) {
        const Mesh& mesh = scene.meshes[mi];
        const std::vector<Vec3> verts = vertices_at(scene, mesh.id, t);
        for (std::uint32_t ti = 0; ti < mesh.triangles.size(); ++ti) {
            const auto& tri = mesh.triangles[ti];
            tris.push_back({verts[tri[0]], verts[tri[1]], verts[tri[2]], mesh.id, ti, mi});
        }
    }
    if (tris.empty()) throw std::runtime_error("build_accel: empty scene");

    AccelIndex index;
    index.tris_ = std::move(tris);
    std::vector<Vec3> centroids(index.tris_.size());
    for (std::size_t i = 0; i < index.tris_.size(); ++i) {
        const auto& tr = index.tris_[i];
        centroids[i] = (tr.v0 + tr.v1 + tr.v2) / 3.0;
    }
    index.build_node(index.tris_, centroids, 0, static_cast<std::uint32_t>(index.tris_.size()));
    return index;
}

} // namespace sbr
