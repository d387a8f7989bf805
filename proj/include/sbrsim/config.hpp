// config.hpp — JSON run-configuration loading with complete-error-list validation.
//
// One file describes a whole run: scene (meshes as OBJ paths, materials, animation tracks),
// radar parameters, trace settings, antenna layout, decomposition rules, and output options.
// load_config never stops at the first problem — it returns every violation it can find, and
// a config is runnable only when the error list comes back empty. All relative OBJ paths
// resolve against the config file's directory. Documented defaults fill every omitted field.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sbrsim/annotate.hpp"
#include "sbrsim/io.hpp"
#include "sbrsim/replay.hpp"
#include "sbrsim/scene.hpp"
#include "sbrsim/signal.hpp"
#include "sbrsim/tracer.hpp"

namespace sbr {

struct OutputOptions {
    std::string directory = "out";
    std::vector<std::string> formats = {"raypath", "cube", "png", "masks"};
    Window window_fast = Window::hann;
    Window window_slow = Window::hann;
    std::size_t zero_pad_factor = 2;
    double threshold_db = 25.0;
    double noise_stddev = 0.0; // per-quadrature; 0 disables noise
    int threads = 0;           // 0 = one worker per hardware thread

    bool wants(const std::string& format) const {
        for (const auto& f : formats) {
            if (f == format) return true;
        }
        return false;
    }
};

struct RunConfig {
    Scene scene;
    RadarParams radar;
    TraceConfig trace;
    AntennaPattern tx_pattern;
    AntennaPattern rx_pattern;
    AntennaLayout layout;
    std::vector<FilterRule> rules;
    DecompositionMode mode = DecompositionMode::partition;
    OutputOptions output;
    std::uint32_t config_digest = 0; // CRC-32 of the raw config file bytes
};

struct ConfigResult {
    RunConfig config;
    std::vector<std::string> errors;
    bool ok() const { return errors.empty(); }
};

namespace cfgdetail {

using nlohmann::json;

inline void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                       const std::string& ctx, std::vector<std::string>& errors) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        bool known = false;
        for (const char* a : allowed) {
            if (key == a) {
                known = true;
                break;
            }
        }
        if (!known) errors.push_back(ctx + ": unknown key '" + key + "'");
    }
}

inline double get_number(const json& obj, const char* key, double def, const std::string& ctx,
                         std::vector<std::string>& errors) {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_number()) {
        errors.push_back(ctx + "." + key + ": expected a number");
        return def;
    }
    return v.get<double>();
}

inline std::uint64_t get_uint(const json& obj, const char* key, std::uint64_t def,
                              const std::string& ctx, std::vector<std::string>& errors) {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d >= 0.0 && std::floor(d) == d && d <= 1.8446744073709552e19) {
            return static_cast<std::uint64_t>(d);
        }
    }
    errors.push_back(ctx + "." + std::string(key) + ": expected a non-negative integer");
    return def;
}

inline std::string get_string(const json& obj, const char* key, const std::string& def,
                              const std::string& ctx, std::vector<std::string>& errors) {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    if (!v.is_string()) {
        errors.push_back(ctx + "." + key + ": expected a string");
        return def;
    }
    return v.get<std::string>();
}

inline std::optional<Vec3> parse_vec3(const json& v, const std::string& ctx,
                                      std::vector<std::string>& errors) {
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number()) {
        errors.push_back(ctx + ": expected an array of 3 numbers");
        return std::nullopt;
    }
    return Vec3{v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

inline Vec3 get_vec3(const json& obj, const char* key, const Vec3& def, const std::string& ctx,
                     std::vector<std::string>& errors) {
    if (!obj.contains(key)) return def;
    return parse_vec3(obj.at(key), ctx + "." + key, errors).value_or(def);
}

inline std::optional<std::vector<std::uint32_t>> parse_id_array(const json& v, const std::string& ctx,
                                                                std::vector<std::string>& errors) {
    if (!v.is_array() || v.empty()) {
        errors.push_back(ctx + ": expected a non-empty array of non-negative integers");
        return std::nullopt;
    }
    std::vector<std::uint32_t> ids;
    ids.reserve(v.size());
    for (const json& e : v) {
        if (!e.is_number_integer() && !e.is_number_unsigned()) {
            errors.push_back(ctx + ": expected a non-negative integer entry");
            return std::nullopt;
        }
        const std::int64_t raw = e.get<std::int64_t>();
        if (raw < 0 || raw > 0xffffffffll) {
            errors.push_back(ctx + ": id out of range");
            return std::nullopt;
        }
        ids.push_back(static_cast<std::uint32_t>(raw));
    }
    return ids;
}

inline std::optional<std::uint32_t> parse_id(const json& v, const std::string& ctx,
                                             std::vector<std::string>& errors) {
    if (v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        const std::int64_t raw = v.get<std::int64_t>();
        if (raw <= 0xffffffffll) return static_cast<std::uint32_t>(raw);
    }
    errors.push_back(ctx + ": expected a non-negative integer id");
    return std::nullopt;
}

inline std::optional<FilterExpr::Cmp> parse_cmp(const json& v, const std::string& ctx,
                                                std::vector<std::string>& errors) {
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "<") return FilterExpr::Cmp::lt;
        if (s == "<=") return FilterExpr::Cmp::le;
        if (s == "==") return FilterExpr::Cmp::eq;
        if (s == "!=") return FilterExpr::Cmp::ne;
        if (s == ">=") return FilterExpr::Cmp::ge;
        if (s == ">") return FilterExpr::Cmp::gt;
    }
    errors.push_back(ctx + ": expected a comparison operator (one of < <= == != >= >)");
    return std::nullopt;
}

// Prefix-form expression arrays, e.g. ["and", ["bounce_count", ">", 1], ["contains_mesh", 7]].
inline std::optional<FilterExpr> parse_expr(const json& v, const std::string& ctx,
                                            std::vector<std::string>& errors) {
    if (!v.is_array() || v.empty() || !v[0].is_string()) {
        errors.push_back(ctx + ": expected an expression array starting with an operator string");
        return std::nullopt;
    }
    const std::string op = v[0].get<std::string>();

    if (op == "and" || op == "or") {
        std::vector<FilterExpr> children;
        bool ok = true;
        for (std::size_t i = 1; i < v.size(); ++i) {
            auto child = parse_expr(v[i], ctx + "[" + std::to_string(i) + "]", errors);
            if (child) {
                children.push_back(std::move(*child));
            } else {
                ok = false;
            }
        }
        if (!ok) return std::nullopt;
        return op == "and" ? FilterExpr::all_of_exprs(std::move(children))
                           : FilterExpr::any_of_exprs(std::move(children));
    }
    if (op == "not") {
        if (v.size() != 2) {
            errors.push_back(ctx + ": 'not' takes exactly one operand");
            return std::nullopt;
        }
        auto child = parse_expr(v[1], ctx + "[1]", errors);
        if (!child) return std::nullopt;
        return FilterExpr::negate_expr(std::move(*child));
    }
    if (op == "bounce_count") {
        if (v.size() != 3) {
            errors.push_back(ctx + ": 'bounce_count' takes a comparison and a count");
            return std::nullopt;
        }
        const auto cmp = parse_cmp(v[1], ctx + "[1]", errors);
        if (!cmp) return std::nullopt;
        if (!v[2].is_number_integer() && !v[2].is_number_unsigned()) {
            errors.push_back(ctx + "[2]: expected a non-negative integer count");
            return std::nullopt;
        }
        const std::int64_t k = v[2].get<std::int64_t>();
        if (k < 0) {
            errors.push_back(ctx + "[2]: expected a non-negative integer count");
            return std::nullopt;
        }
        return FilterExpr::bounce_count(*cmp, static_cast<std::uint64_t>(k));
    }
    if (op == "contains_mesh" || op == "first_hit_mesh") {
        if (v.size() != 2) {
            errors.push_back(ctx + ": '" + op + "' takes one mesh id");
            return std::nullopt;
        }
        const auto id = parse_id(v[1], ctx + "[1]", errors);
        if (!id) return std::nullopt;
        return op == "contains_mesh" ? FilterExpr::contains_mesh(*id) : FilterExpr::first_hit_mesh(*id);
    }
    if (op == "only_meshes") {
        if (v.size() != 2) {
            errors.push_back(ctx + ": 'only_meshes' takes one array of mesh ids");
            return std::nullopt;
        }
        auto ids = parse_id_array(v[1], ctx + "[1]", errors);
        if (!ids) return std::nullopt;
        return FilterExpr::only_meshes(std::move(*ids));
    }
    if (op == "triangle_in") {
        if (v.size() != 3) {
            errors.push_back(ctx + ": 'triangle_in' takes a mesh id and an array of triangle indices");
            return std::nullopt;
        }
        const auto mesh = parse_id(v[1], ctx + "[1]", errors);
        auto tris = parse_id_array(v[2], ctx + "[2]", errors);
        if (!mesh || !tris) return std::nullopt;
        return FilterExpr::triangle_in(*mesh, std::move(*tris));
    }
    errors.push_back(ctx + ": unknown filter operator '" + op + "'");
    return std::nullopt;
}

inline AntennaPattern parse_pattern(const json& v, const std::string& ctx,
                                    std::vector<std::string>& errors) {
    if (!v.is_object()) {
        errors.push_back(ctx + ": expected an object");
        return AntennaPattern::isotropic();
    }
    check_keys(v, {"kind", "exp_azimuth", "exp_elevation", "boresight", "up"}, ctx, errors);
    const std::string kind = get_string(v, "kind", "isotropic", ctx, errors);
    if (kind == "isotropic") return AntennaPattern::isotropic();
    if (kind != "raised_cosine") {
        errors.push_back(ctx + ".kind: expected 'isotropic' or 'raised_cosine'");
        return AntennaPattern::isotropic();
    }
    const double k_az = get_number(v, "exp_azimuth", 2.0, ctx, errors);
    const double k_el = get_number(v, "exp_elevation", 2.0, ctx, errors);
    const Vec3 boresight = get_vec3(v, "boresight", {1.0, 0.0, 0.0}, ctx, errors);
    const Vec3 up = get_vec3(v, "up", {0.0, 0.0, 1.0}, ctx, errors);
    if (k_az < 0.0) errors.push_back(ctx + ".exp_azimuth: must be >= 0");
    if (k_el < 0.0) errors.push_back(ctx + ".exp_elevation: must be >= 0");
    if (norm(boresight) < 1e-12) {
        errors.push_back(ctx + ".boresight: zero vector");
        return AntennaPattern::isotropic();
    }
    if (norm(cross(up, boresight)) < 1e-12) {
        errors.push_back(ctx + ".up: parallel to boresight");
        return AntennaPattern::isotropic();
    }
    return AntennaPattern::raised_cosine(k_az, k_el, boresight, up);
}

inline std::optional<Window> parse_window(const std::string& s, const std::string& ctx,
                                          std::vector<std::string>& errors) {
    if (s == "hann") return Window::hann;
    if (s == "none") return Window::none;
    errors.push_back(ctx + ": expected 'hann' or 'none'");
    return std::nullopt;
}

inline void parse_track(const json& v, std::uint32_t mesh_id, const std::filesystem::path& base_dir,
                        Scene& scene, const std::string& ctx, std::vector<std::string>& errors) {
    if (!v.is_object()) {
        errors.push_back(ctx + ": expected an object");
        return;
    }
    check_keys(v, {"kind", "keyframes", "snapshots"}, ctx, errors);
    const std::string kind = get_string(v, "kind", "", ctx, errors);
    AnimationTrack track;
    if (kind == "rigid") {
        track.kind = AnimationTrack::Kind::rigid;
        if (!v.contains("keyframes") || !v.at("keyframes").is_array()) {
            errors.push_back(ctx + ": rigid track needs a 'keyframes' array");
            return;
        }
        std::size_t idx = 0;
        for (const json& kf : v.at("keyframes")) {
            const std::string kctx = ctx + ".keyframes[" + std::to_string(idx++) + "]";
            if (!kf.is_object()) {
                errors.push_back(kctx + ": expected an object");
                continue;
            }
            check_keys(kf, {"t", "translation", "rotation"}, kctx, errors);
            RigidKeyframe frame;
            frame.t = get_number(kf, "t", 0.0, kctx, errors);
            frame.translation = get_vec3(kf, "translation", {0.0, 0.0, 0.0}, kctx, errors);
            frame.rotation = Quat{1.0, 0.0, 0.0, 0.0};
            if (kf.contains("rotation")) {
                const json& q = kf.at("rotation");
                if (!q.is_array() || q.size() != 4 || !q[0].is_number() || !q[1].is_number() ||
                    !q[2].is_number() || !q[3].is_number()) {
                    errors.push_back(kctx + ".rotation: expected [w, x, y, z]");
                } else {
                    frame.rotation = Quat{q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                                          q[3].get<double>()};
                }
            }
            track.keyframes.push_back(frame);
        }
    } else if (kind == "vertex_sequence") {
        track.kind = AnimationTrack::Kind::vertex_sequence;
        if (!v.contains("snapshots") || !v.at("snapshots").is_array()) {
            errors.push_back(ctx + ": vertex_sequence track needs a 'snapshots' array");
            return;
        }
        std::size_t idx = 0;
        for (const json& snap : v.at("snapshots")) {
            const std::string sctx = ctx + ".snapshots[" + std::to_string(idx++) + "]";
            if (!snap.is_object()) {
                errors.push_back(sctx + ": expected an object");
                continue;
            }
            check_keys(snap, {"t", "obj"}, sctx, errors);
            VertexSnapshot vs;
            vs.t = get_number(snap, "t", 0.0, sctx, errors);
            const std::string obj = get_string(snap, "obj", "", sctx, errors);
            if (obj.empty()) {
                errors.push_back(sctx + ": missing 'obj' path");
                continue;
            }
            const std::filesystem::path obj_path =
                std::filesystem::path(obj).is_absolute() ? std::filesystem::path(obj) : base_dir / obj;
            try {
                vs.vertices = load_obj(obj_path.string()).vertices;
            } catch (const std::exception& e) {
                errors.push_back(sctx + ": " + e.what());
                continue;
            }
            track.snapshots.push_back(std::move(vs));
        }
    } else {
        errors.push_back(ctx + ".kind: expected 'rigid' or 'vertex_sequence'");
        return;
    }
    scene.tracks.emplace(mesh_id, std::move(track));
}

} // namespace cfgdetail

// Parses and fully validates a run configuration, accumulating every violation found.
inline ConfigResult load_config(const std::string& path) {
    using cfgdetail::json;
    ConfigResult result;
    auto& errors = result.errors;
    RunConfig& cfg = result.config;

    std::vector<unsigned char> raw;
    try {
        raw = read_file_bytes(path);
    } catch (const std::exception& e) {
        errors.push_back(e.what());
        return result;
    }
    cfg.config_digest = crc32_bytes(raw.data(), raw.size());

    json root;
    try {
        root = json::parse(raw.begin(), raw.end());
    } catch (const json::parse_error& e) {
        errors.push_back("config parse error: " + std::string(e.what()));
        return result;
    }
    if (!root.is_object()) {
        errors.push_back("config: top level must be an object");
        return result;
    }
    cfgdetail::check_keys(root, {"scene", "radar", "trace", "layout", "rules", "output"}, "config",
                          errors);

    const std::filesystem::path base_dir = std::filesystem::path(path).parent_path();

    // ---- scene ----
    if (!root.contains("scene") || !root.at("scene").is_object()) {
        errors.push_back("config: missing 'scene' object");
    } else {
        const json& scene_obj = root.at("scene");
        cfgdetail::check_keys(scene_obj, {"materials", "meshes"}, "scene", errors);

        if (scene_obj.contains("materials")) {
            if (!scene_obj.at("materials").is_array()) {
                errors.push_back("scene.materials: expected an array");
            } else {
                std::size_t idx = 0;
                for (const json& m : scene_obj.at("materials")) {
                    const std::string ctx = "scene.materials[" + std::to_string(idx++) + "]";
                    if (!m.is_object()) {
                        errors.push_back(ctx + ": expected an object");
                        cfg.scene.materials.push_back({});
                        continue;
                    }
                    cfgdetail::check_keys(m, {"specular_probability", "reflectivity"}, ctx, errors);
                    Material mat;
                    mat.specular_probability =
                        cfgdetail::get_number(m, "specular_probability", 1.0, ctx, errors);
                    mat.reflectivity = cfgdetail::get_number(m, "reflectivity", 1.0, ctx, errors);
                    cfg.scene.materials.push_back(mat);
                }
            }
        }
        if (cfg.scene.materials.empty()) cfg.scene.materials.push_back({}); // default mirror material

        if (!scene_obj.contains("meshes") || !scene_obj.at("meshes").is_array() ||
            scene_obj.at("meshes").empty()) {
            errors.push_back("scene.meshes: expected a non-empty array");
        } else {
            std::size_t idx = 0;
            for (const json& m : scene_obj.at("meshes")) {
                const std::string ctx = "scene.meshes[" + std::to_string(idx++) + "]";
                if (!m.is_object()) {
                    errors.push_back(ctx + ": expected an object");
                    continue;
                }
                cfgdetail::check_keys(m, {"id", "obj", "material", "track"}, ctx, errors);
                if (!m.contains("id")) {
                    errors.push_back(ctx + ": missing 'id'");
                    continue;
                }
                const auto id = cfgdetail::parse_id(m.at("id"), ctx + ".id", errors);
                if (!id) continue;
                const std::string obj = cfgdetail::get_string(m, "obj", "", ctx, errors);
                if (obj.empty()) {
                    errors.push_back(ctx + ": missing 'obj' path");
                    continue;
                }
                const std::filesystem::path obj_path = std::filesystem::path(obj).is_absolute()
                                                           ? std::filesystem::path(obj)
                                                           : base_dir / obj;
                Mesh mesh;
                try {
                    mesh = load_obj(obj_path.string());
                } catch (const std::exception& e) {
                    errors.push_back(ctx + ": " + e.what());
                    continue;
                }
                mesh.id = *id;
                mesh.material_id = static_cast<std::uint32_t>(
                    cfgdetail::get_uint(m, "material", 0, ctx, errors));
                cfg.scene.meshes.push_back(std::move(mesh));
                if (m.contains("track")) {
                    cfgdetail::parse_track(m.at("track"), *id, base_dir, cfg.scene, ctx + ".track",
                                           errors);
                }
            }
        }
        for (const std::string& e : validate_scene(cfg.scene)) errors.push_back("scene: " + e);
    }

    // ---- radar ----
    if (root.contains("radar")) {
        const json& radar = root.at("radar");
        if (!radar.is_object()) {
            errors.push_back("radar: expected an object");
        } else {
            cfgdetail::check_keys(radar, {"f_c", "B", "T_c", "T_d", "n_samples", "n_chirps"}, "radar",
                                  errors);
            cfg.radar.f_c = cfgdetail::get_number(radar, "f_c", cfg.radar.f_c, "radar", errors);
            cfg.radar.B = cfgdetail::get_number(radar, "B", cfg.radar.B, "radar", errors);
            cfg.radar.T_c = cfgdetail::get_number(radar, "T_c", cfg.radar.T_c, "radar", errors);
            cfg.radar.T_d = cfgdetail::get_number(radar, "T_d", cfg.radar.T_d, "radar", errors);
            cfg.radar.n_samples = static_cast<std::size_t>(
                cfgdetail::get_uint(radar, "n_samples", cfg.radar.n_samples, "radar", errors));
            cfg.radar.n_chirps = static_cast<std::size_t>(
                cfgdetail::get_uint(radar, "n_chirps", cfg.radar.n_chirps, "radar", errors));
        }
    }
    for (const std::string& e : cfg.radar.validate()) errors.push_back(e);

    // ---- trace ----
    if (root.contains("trace")) {
        const json& trace = root.at("trace");
        if (!trace.is_object()) {
            errors.push_back("trace: expected an object");
        } else {
            cfgdetail::check_keys(trace,
                                  {"ray_count", "max_bounces", "seed", "tx_position", "rx_position",
                                   "tx_pattern", "rx_pattern"},
                                  "trace", errors);
            cfg.trace.ray_count =
                cfgdetail::get_uint(trace, "ray_count", cfg.trace.ray_count, "trace", errors);
            cfg.trace.max_bounces = static_cast<int>(
                cfgdetail::get_uint(trace, "max_bounces", static_cast<std::uint64_t>(cfg.trace.max_bounces),
                                    "trace", errors));
            cfg.trace.rng_seed = cfgdetail::get_uint(trace, "seed", cfg.trace.rng_seed, "trace", errors);
            cfg.trace.tx_position =
                cfgdetail::get_vec3(trace, "tx_position", cfg.trace.tx_position, "trace", errors);
            cfg.trace.rx_position =
                cfgdetail::get_vec3(trace, "rx_position", cfg.trace.rx_position, "trace", errors);
            if (trace.contains("tx_pattern")) {
                cfg.tx_pattern = cfgdetail::parse_pattern(trace.at("tx_pattern"), "trace.tx_pattern", errors);
            }
            if (trace.contains("rx_pattern")) {
                cfg.rx_pattern = cfgdetail::parse_pattern(trace.at("rx_pattern"), "trace.rx_pattern", errors);
            }
        }
    }
    if (cfg.trace.ray_count < 1) errors.push_back("trace.ray_count: must be >= 1");
    if (cfg.trace.max_bounces < 1) errors.push_back("trace.max_bounces: must be >= 1");

    // ---- layout ----
    if (root.contains("layout")) {
        const json& layout = root.at("layout");
        if (!layout.is_object()) {
            errors.push_back("layout: expected an object");
        } else {
            cfgdetail::check_keys(layout, {"tx_positions", "rx_positions", "reference_tx", "reference_rx"},
                                  "layout", errors);
            auto parse_positions = [&](const char* key, std::vector<Vec3>& out) {
                if (!layout.contains(key) || !layout.at(key).is_array() || layout.at(key).empty()) {
                    errors.push_back("layout." + std::string(key) + ": expected a non-empty array");
                    return;
                }
                std::size_t idx = 0;
                for (const json& p : layout.at(key)) {
                    const auto v = cfgdetail::parse_vec3(
                        p, "layout." + std::string(key) + "[" + std::to_string(idx++) + "]", errors);
                    if (v) out.push_back(*v);
                }
            };
            parse_positions("tx_positions", cfg.layout.tx_positions);
            parse_positions("rx_positions", cfg.layout.rx_positions);
            cfg.layout.reference_tx = static_cast<std::size_t>(
                cfgdetail::get_uint(layout, "reference_tx", 0, "layout", errors));
            cfg.layout.reference_rx = static_cast<std::size_t>(
                cfgdetail::get_uint(layout, "reference_rx", 0, "layout", errors));
        }
        for (const std::string& e : cfg.layout.validate()) errors.push_back(e);
        // the traced pair must be part of the layout, at the reference indices
        if (cfg.layout.reference_tx < cfg.layout.tx_positions.size()) {
            const Vec3 ref = cfg.layout.tx_positions[cfg.layout.reference_tx];
            if (ref.x != cfg.trace.tx_position.x || ref.y != cfg.trace.tx_position.y ||
                ref.z != cfg.trace.tx_position.z) {
                errors.push_back("layout: tx_positions[reference_tx] must equal trace.tx_position");
            }
        }
        if (cfg.layout.reference_rx < cfg.layout.rx_positions.size()) {
            const Vec3 ref = cfg.layout.rx_positions[cfg.layout.reference_rx];
            if (ref.x != cfg.trace.rx_position.x || ref.y != cfg.trace.rx_position.y ||
                ref.z != cfg.trace.rx_position.z) {
                errors.push_back("layout: rx_positions[reference_rx] must equal trace.rx_position");
            }
        }
    } else {
        cfg.layout = AntennaLayout::reference_only(cfg.trace.tx_position, cfg.trace.rx_position);
    }

    // ---- rules ----
    if (root.contains("rules")) {
        const json& rules = root.at("rules");
        if (!rules.is_object()) {
            errors.push_back("rules: expected an object");
        } else {
            cfgdetail::check_keys(rules, {"mode", "rules"}, "rules", errors);
            const std::string mode = cfgdetail::get_string(rules, "mode", "partition", "rules", errors);
            if (mode == "partition") {
                cfg.mode = DecompositionMode::partition;
            } else if (mode == "overlay") {
                cfg.mode = DecompositionMode::overlay;
            } else {
                errors.push_back("rules.mode: expected 'partition' or 'overlay'");
            }
            if (rules.contains("rules")) {
                if (!rules.at("rules").is_array()) {
                    errors.push_back("rules.rules: expected an array");
                } else {
                    std::size_t idx = 0;
                    for (const json& r : rules.at("rules")) {
                        const std::string ctx = "rules.rules[" + std::to_string(idx++) + "]";
                        if (!r.is_object()) {
                            errors.push_back(ctx + ": expected an object");
                            continue;
                        }
                        cfgdetail::check_keys(r, {"name", "expr"}, ctx, errors);
                        FilterRule rule;
                        rule.name = cfgdetail::get_string(r, "name", "", ctx, errors);
                        if (rule.name.empty()) {
                            errors.push_back(ctx + ": missing 'name'");
                            continue;
                        }
                        if (!r.contains("expr")) {
                            errors.push_back(ctx + " ('" + rule.name + "'): missing 'expr'");
                            continue;
                        }
                        auto expr = cfgdetail::parse_expr(r.at("expr"), ctx + " ('" + rule.name + "').expr",
                                                          errors);
                        if (!expr) continue;
                        rule.expr = std::move(*expr);
                        cfg.rules.push_back(std::move(rule));
                    }
                }
            }
        }
    }
    for (const FilterRule& rule : cfg.rules) {
        for (const std::string& e : validate_expr(rule.expr)) {
            errors.push_back("rule '" + rule.name + "': " + e);
        }
        std::vector<std::uint32_t> mesh_refs;
        collect_mesh_refs(rule.expr, mesh_refs);
        for (const std::uint32_t id : mesh_refs) {
            if (cfg.scene.find_mesh(id) == nullptr) {
                errors.push_back("rule '" + rule.name + "': mesh id " + std::to_string(id) +
                                 " does not exist in the scene");
            }
        }
        std::vector<std::pair<std::uint32_t, std::uint32_t>> tri_refs;
        collect_triangle_refs(rule.expr, tri_refs);
        for (const auto& [mesh_id, tri] : tri_refs) {
            const Mesh* mesh = cfg.scene.find_mesh(mesh_id);
            if (mesh != nullptr && tri >= mesh->triangles.size()) {
                errors.push_back("rule '" + rule.name + "': triangle " + std::to_string(tri) +
                                 " out of range for mesh " + std::to_string(mesh_id));
            }
        }
    }
    {
        std::vector<std::string> names;
        for (const FilterRule& rule : cfg.rules) names.push_back(rule.name);
        std::sort(names.begin(), names.end());
        for (std::size_t i = 1; i < names.size(); ++i) {
            if (names[i] == names[i - 1]) {
                errors.push_back("rules: duplicate rule name '" + names[i] + "'");
            }
        }
        if (cfg.mode == DecompositionMode::partition) {
            for (const std::string& n : names) {
                if (n == "rest") {
                    errors.push_back("rules: name 'rest' is reserved in partition mode");
                }
            }
        }
    }

    // ---- output ----
    if (root.contains("output")) {
        const json& output = root.at("output");
        if (!output.is_object()) {
            errors.push_back("output: expected an object");
        } else {
            cfgdetail::check_keys(output,
                                  {"directory", "formats", "window_fast", "window_slow",
                                   "zero_pad_factor", "threshold_db", "noise_stddev", "threads"},
                                  "output", errors);
            cfg.output.directory =
                cfgdetail::get_string(output, "directory", cfg.output.directory, "output", errors);
            if (output.contains("formats")) {
                if (!output.at("formats").is_array()) {
                    errors.push_back("output.formats: expected an array of strings");
                } else {
                    cfg.output.formats.clear();
                    for (const json& f : output.at("formats")) {
                        if (!f.is_string()) {
                            errors.push_back("output.formats: expected string entries");
                            continue;
                        }
                        const std::string s = f.get<std::string>();
                        if (s != "raypath" && s != "cube" && s != "png" && s != "masks") {
                            errors.push_back("output.formats: unknown format '" + s +
                                             "' (expected raypath|cube|png|masks)");
                            continue;
                        }
                        cfg.output.formats.push_back(s);
                    }
                }
            }
            const auto wf = cfgdetail::parse_window(
                cfgdetail::get_string(output, "window_fast", "hann", "output", errors),
                "output.window_fast", errors);
            if (wf) cfg.output.window_fast = *wf;
            const auto ws = cfgdetail::parse_window(
                cfgdetail::get_string(output, "window_slow", "hann", "output", errors),
                "output.window_slow", errors);
            if (ws) cfg.output.window_slow = *ws;
            cfg.output.zero_pad_factor = static_cast<std::size_t>(
                cfgdetail::get_uint(output, "zero_pad_factor", cfg.output.zero_pad_factor, "output", errors));
            cfg.output.threshold_db =
                cfgdetail::get_number(output, "threshold_db", cfg.output.threshold_db, "output", errors);
            cfg.output.noise_stddev =
                cfgdetail::get_number(output, "noise_stddev", cfg.output.noise_stddev, "output", errors);
            cfg.output.threads = static_cast<int>(
                cfgdetail::get_uint(output, "threads", static_cast<std::uint64_t>(cfg.output.threads),
                                    "output", errors));
        }
    }
    if (cfg.output.directory.empty()) errors.push_back("output.directory: must not be empty");
    if (cfg.output.zero_pad_factor < 1) errors.push_back("output.zero_pad_factor: must be >= 1");
    if (!(cfg.output.threshold_db > 0.0)) errors.push_back("output.threshold_db: must be > 0");
    if (cfg.output.noise_stddev < 0.0) errors.push_back("output.noise_stddev: must be >= 0");

    return result;
}

} // namespace sbr
