#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

#include <cmath>
#include <random>

using Catch::Matchers::ContainsSubstring;
using sbr::Quat;
using sbr::Vec3;

TEST_CASE("load_obj parses the positions-only subset") {
    testsup::TempDir tmp;
    const std::string path = tmp.file("tri.obj");
    testsup::write_text_file(path,
                             "# comment line\n"
                             "v 0 0 0\n"
                             "v 1.5 0 0\n"
                             "v 0 2.25 0\n"
                             "vn 0 0 1\n"
                             "vt 0.5 0.5\n"
                             "usemtl steel\n"
                             "s off\n"
                             "\n"
                             "f 1/1/1 2/2/1 3//1\n");
    const sbr::Mesh mesh = sbr::load_obj(path);
    REQUIRE(mesh.vertices.size() == 3);
    REQUIRE(mesh.triangles.size() == 1);
    REQUIRE(mesh.vertices[1].x == 1.5);
    REQUIRE(mesh.vertices[2].y == 2.25);
    REQUIRE(mesh.triangles[0] == std::array<std::uint32_t, 3>{0, 1, 2});
}

TEST_CASE("load_obj rejects malformed input with the offending line") {
    testsup::TempDir tmp;

    const std::string quad = tmp.file("quad.obj");
    testsup::write_text_file(quad, "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
    REQUIRE_THROWS_WITH(sbr::load_obj(quad), ContainsSubstring("non-triangular"));

    const std::string out_of_range = tmp.file("oob.obj");
    testsup::write_text_file(out_of_range, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n");
    REQUIRE_THROWS_WITH(sbr::load_obj(out_of_range), ContainsSubstring("out of range"));

    const std::string bad_vertex = tmp.file("badv.obj");
    testsup::write_text_file(bad_vertex, "v 0 zero 0\n");
    REQUIRE_THROWS_WITH(sbr::load_obj(bad_vertex), ContainsSubstring("malformed vertex"));

    const std::string bad_tag = tmp.file("badtag.obj");
    testsup::write_text_file(bad_tag, "v 0 0 0\ncurve 1 2\n");
    REQUIRE_THROWS_WITH(sbr::load_obj(bad_tag), ContainsSubstring("unsupported statement"));

    REQUIRE_THROWS_WITH(sbr::load_obj(tmp.file("missing.obj")), ContainsSubstring("cannot open"));
}

TEST_CASE("save_obj then load_obj reproduces the mesh exactly") {
    testsup::TempDir tmp;
    sbr::Mesh mesh = testsup::make_plate_x(4, {1.0 / 3.0, -0.1, 2.7182818284590452}, 0.25, 0.125);
    const std::string path = tmp.file("plate.obj");
    sbr::save_obj(mesh, path);
    const sbr::Mesh reloaded = sbr::load_obj(path);

    REQUIRE(reloaded.vertices.size() == mesh.vertices.size());
    REQUIRE(reloaded.triangles == mesh.triangles);
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        REQUIRE(reloaded.vertices[i] == mesh.vertices[i]); // 17 significant digits round-trip
    }
}

TEST_CASE("vertices_at returns the rest pose for untracked meshes") {
    const sbr::Scene scene = testsup::one_mesh_scene(testsup::make_plate_x(1, {5, 0, 0}, 1, 1));
    const auto at0 = sbr::vertices_at(scene, 1, 0.0);
    const auto at9 = sbr::vertices_at(scene, 1, 9.0);
    REQUIRE(at0 == scene.meshes[0].vertices);
    REQUIRE(at9 == scene.meshes[0].vertices);
    REQUIRE_THROWS_WITH(sbr::vertices_at(scene, 42, 0.0), ContainsSubstring("unknown mesh id 42"));
}

TEST_CASE("rigid track reproduces keyframes exactly and interpolates between them") {
    sbr::Scene scene = testsup::one_mesh_scene(
        testsup::make_single_triangle(1, {1, 0, 0}, {2, 0, 0}, {1, 1, 0}));
    sbr::AnimationTrack track;
    track.kind = sbr::AnimationTrack::Kind::rigid;
    track.keyframes = {
        {0.0, {0, 0, 0}, Quat{}},
        {1.0, {1, 0, 0}, Quat{}},
        {3.0, {1, 4, 0}, Quat{}},
    };
    scene.tracks[1] = track;

    SECTION("keyframe instants land on the keyframe pose") {
        for (const auto& kf : track.keyframes) {
            const auto verts = sbr::vertices_at(scene, 1, kf.t);
            for (std::size_t i = 0; i < verts.size(); ++i) {
                const Vec3 expected = scene.meshes[0].vertices[i] + kf.translation;
                REQUIRE(sbr::distance(verts[i], expected) < 1e-9);
            }
        }
    }

    SECTION("interpolation is linear in each bracket") {
        const auto mid = sbr::vertices_at(scene, 1, 0.5);
        REQUIRE(sbr::distance(mid[0], Vec3{1.5, 0, 0}) < 1e-12);
        const auto late = sbr::vertices_at(scene, 1, 2.0); // halfway through [1, 3]
        REQUIRE(sbr::distance(late[0], Vec3{2.0, 2.0, 0}) < 1e-12);
    }

    SECTION("times outside the keyframe range clamp to the end poses") {
        const auto before = sbr::vertices_at(scene, 1, -5.0);
        const auto after = sbr::vertices_at(scene, 1, 99.0);
        REQUIRE(sbr::distance(before[0], Vec3{1, 0, 0}) < 1e-12);
        REQUIRE(sbr::distance(after[0], Vec3{2, 4, 0}) < 1e-12);
    }
}

TEST_CASE("rigid rotation interpolates along the shortest arc") {
    sbr::Scene scene = testsup::one_mesh_scene(
        testsup::make_single_triangle(1, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}));
    sbr::AnimationTrack track;
    track.kind = sbr::AnimationTrack::Kind::rigid;
    track.keyframes = {
        {0.0, {0, 0, 0}, Quat{}},
        {1.0, {0, 0, 0}, sbr::axis_angle({0, 0, 1}, std::numbers::pi / 2.0)},
    };
    scene.tracks[1] = track;

    // halfway between identity and a 90-degree turn about z is a 45-degree turn
    const auto mid = sbr::vertices_at(scene, 1, 0.5);
    const double inv_sqrt2 = std::sqrt(0.5);
    REQUIRE(sbr::distance(mid[0], Vec3{inv_sqrt2, inv_sqrt2, 0}) < 1e-12);
    REQUIRE(sbr::distance(mid[2], Vec3{0, 0, 1}) < 1e-12); // on the axis, unmoved
}

TEST_CASE("rigid motion preserves pairwise distances") {
    sbr::Mesh mesh;
    mesh.id = 1;
    mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 2, 0}, {0.3, -0.7, 1.9}};
    mesh.triangles = {{0, 1, 2}, {0, 2, 3}};
    sbr::Scene scene = testsup::one_mesh_scene(std::move(mesh));

    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    sbr::AnimationTrack track;
    track.kind = sbr::AnimationTrack::Kind::rigid;
    for (int k = 0; k < 4; ++k) {
        const Quat q = sbr::normalized(Quat{uni(gen), uni(gen), uni(gen), uni(gen)});
        track.keyframes.push_back({static_cast<double>(k), {uni(gen), uni(gen), uni(gen)}, q});
    }
    scene.tracks[1] = track;

    const auto& rest = scene.meshes[0].vertices;
    for (int s = 0; s <= 24; ++s) {
        const double t = 3.0 * static_cast<double>(s) / 24.0;
        const auto posed = sbr::vertices_at(scene, 1, t);
        for (std::size_t i = 0; i < rest.size(); ++i) {
            for (std::size_t j = i + 1; j < rest.size(); ++j) {
                const double d_rest = sbr::distance(rest[i], rest[j]);
                const double d_posed = sbr::distance(posed[i], posed[j]);
                REQUIRE(std::abs(d_posed - d_rest) < 1e-6);
            }
        }
    }
}

TEST_CASE("vertex-sequence track interpolates snapshots and rejects out-of-range times") {
    sbr::Mesh mesh = testsup::make_single_triangle(3, {0, 0, 0}, {1, 0, 0}, {0, 1, 0});
    sbr::Scene scene = testsup::one_mesh_scene(std::move(mesh));

    sbr::AnimationTrack track;
    track.kind = sbr::AnimationTrack::Kind::vertex_sequence;
    std::vector<Vec3> base = scene.meshes[0].vertices;
    std::vector<Vec3> moved = base;
    for (auto& v : moved) v += Vec3{1, 0, 0};
    track.snapshots = {{0.0, base}, {1.0, moved}};
    scene.tracks[3] = track;

    SECTION("snapshot instants are exact") {
        REQUIRE(sbr::vertices_at(scene, 3, 0.0) == base);
        REQUIRE(sbr::vertices_at(scene, 3, 1.0) == moved);
    }

    SECTION("intermediate times interpolate linearly per vertex") {
        const auto q = sbr::vertices_at(scene, 3, 0.25);
        for (std::size_t i = 0; i < base.size(); ++i) {
            REQUIRE(sbr::distance(q[i], base[i] + Vec3{0.25, 0, 0}) < 1e-12);
        }
    }

    SECTION("outside the snapshot range throws") {
        REQUIRE_THROWS_AS(sbr::vertices_at(scene, 3, -0.1), std::out_of_range);
        REQUIRE_THROWS_AS(sbr::vertices_at(scene, 3, 1.5), std::out_of_range);
    }
}

TEST_CASE("animation_range intersects vertex-sequence spans") {
    sbr::Scene scene = testsup::one_mesh_scene(
        testsup::make_single_triangle(1, {0, 0, 0}, {1, 0, 0}, {0, 1, 0}));
    {
        const auto [lo, hi] = sbr::animation_range(scene);
        REQUIRE(std::isinf(lo));
        REQUIRE(std::isinf(hi));
    }

    sbr::AnimationTrack track;
    track.kind = sbr::AnimationTrack::Kind::vertex_sequence;
    track.snapshots = {{0.5, scene.meshes[0].vertices}, {2.0, scene.meshes[0].vertices}};
    scene.tracks[1] = track;
    const auto [lo, hi] = sbr::animation_range(scene);
    REQUIRE(lo == 0.5);
    REQUIRE(hi == 2.0);
}

TEST_CASE("validate_scene reports every violation in one pass") {
    sbr::Scene scene;
    scene.materials = {{1.5, -0.2}}; // both fields out of range

    sbr::Mesh a = testsup::make_plate_x(7, {1, 0, 0}, 1, 1);
    sbr::Mesh b = testsup::make_plate_x(7, {2, 0, 0}, 1, 1); // duplicate id
    b.material_id = 3;                                       // unresolvable material
    sbr::Mesh c;
    c.id = 8; // no triangles
    sbr::Mesh d = testsup::make_plate_x(9, {3, 0, 0}, 1, 1);
    d.triangles.push_back({0, 1, 99}); // index out of range
    scene.meshes = {a, b, c, d};

    sbr::AnimationTrack bad_rigid;
    bad_rigid.kind = sbr::AnimationTrack::Kind::rigid;
    bad_rigid.keyframes = {
        {1.0, {0, 0, 0}, Quat{}},
        {0.5, {0, 0, 0}, Quat{2.0, 0, 0, 0}}, // times decrease, quaternion non-unit
    };
    scene.tracks[7] = bad_rigid;
    scene.tracks[55] = bad_rigid; // dangling mesh id

    const auto errors = sbr::validate_scene(scene);
    const auto has = [&](const char* needle) {
        for (const auto& e : errors) {
            if (e.find(needle) != std::string::npos) return true;
        }
        return false;
    };
    REQUIRE(has("duplicate mesh id 7"));
    REQUIRE(has("mesh 8 has no triangles"));
    REQUIRE(has("mesh 9: triangle index out of range"));
    REQUIRE(has("material_id 3 does not resolve"));
    REQUIRE(has("material 0: specular_probability outside [0,1]"));
    REQUIRE(has("material 0: reflectivity outside [0,1]"));
    REQUIRE(has("keyframe times not strictly increasing"));
    REQUIRE(has("non-unit quaternion keyframe"));
    REQUIRE(has("track for mesh 55: mesh id does not exist"));
    REQUIRE(errors.size() >= 9);
}

TEST_CASE("a well-formed scene validates cleanly") {
    sbr::Scene scene = testsup::one_mesh_scene(testsup::make_plate_x(1, {5, 0, 0}, 1, 1));
    sbr::AnimationTrack track;
    track.kind = sbr::AnimationTrack::Kind::rigid;
    track.keyframes = {{0.0, {0, 0, 0}, Quat{}}, {1.0, {1, 0, 0}, sbr::axis_angle({0, 0, 1}, 0.3)}};
    scene.tracks[1] = track;
    REQUIRE(sbr::validate_scene(scene).empty());
}
