// pipeline.hpp — executes trace -> replay -> annotate runs and writes every artifact.
//
// A run traces once, replays per chirp/antenna from the stored records, and decomposes the
// signal into labeled range-Doppler products. Stages can also run standalone against files
// from an earlier stage: "replay" reads the raypath file, "annotate" reads raypath + cube.
// Every artifact lands in the output directory together with run_manifest.json (config
// digest, seed, per-stage wall times, artifact checksums). Reruns with the same config and
// seed produce byte-identical raypath and cube files regardless of worker count.
#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sbrsim/annotate.hpp"
#include "sbrsim/config.hpp"
#include "sbrsim/io.hpp"
#include "sbrsim/replay.hpp"
#include "sbrsim/signal.hpp"
#include "sbrsim/tracer.hpp"
#include "sbrsim/util.hpp"

namespace sbr {

enum class Stage { trace, replay, annotate, all };

inline std::optional<Stage> parse_stage(const std::string& s) {
    if (s == "trace") return Stage::trace;
    if (s == "replay") return Stage::replay;
    if (s == "annotate") return Stage::annotate;
    if (s == "all") return Stage::all;
    return std::nullopt;
}

inline const char* stage_name(Stage stage) {
    switch (stage) {
        case Stage::trace: return "trace";
        case Stage::replay: return "replay";
        case Stage::annotate: return "annotate";
        case Stage::all: return "all";
    }
    return "all";
}

struct ArtifactEntry {
    std::string path; // relative to the output directory
    std::uint64_t bytes = 0;
    std::uint32_t crc32 = 0;
};

struct StageTiming {
    double trace_seconds = 0.0;
    double replay_seconds = 0.0;
    double synthesize_seconds = 0.0;
    double decompose_seconds = 0.0;
    std::size_t replay_chirps = 0;
    std::size_t trace_runs = 0;
};

struct RunManifest {
    std::uint32_t config_digest = 0;
    std::uint64_t seed = 0;
    std::string stage;
    std::size_t path_count = 0;
    StageTiming timing;
    std::vector<ArtifactEntry> artifacts;
    std::string output_directory;
};

// Output directory precedence: explicit CLI value, then the SBRSIM_OUT environment variable,
// then the config's output.directory.
inline std::string resolve_output_dir(const RunConfig& cfg, const std::string& cli_override) {
    if (!cli_override.empty()) return cli_override;
    if (const char* env = std::getenv("SBRSIM_OUT"); env != nullptr && env[0] != '\0') return env;
    return cfg.output.directory;
}

namespace detail {

inline std::string sanitize_name(const std::string& name) {
    std::string out;
    out.reserve(name.size());
    for (const char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                        c == '_' || c == '-';
        out.push_back(ok ? c : '_');
    }
    return out.empty() ? std::string("span") : out;
}

inline ArtifactEntry record_artifact(const std::filesystem::path& dir, const std::string& name) {
    const std::filesystem::path full = dir / name;
    ArtifactEntry entry;
    entry.path = name;
    entry.bytes = static_cast<std::uint64_t>(std::filesystem::file_size(full));
    entry.crc32 = crc32_file(full.string());
    return entry;
}

} // namespace detail

inline void write_manifest(const std::filesystem::path& dir, const RunManifest& manifest) {
    nlohmann::json j;
    j["config_digest"] = manifest.config_digest;
    j["seed"] = manifest.seed;
    j["stage"] = manifest.stage;
    j["path_count"] = manifest.path_count;
    j["output_directory"] = manifest.output_directory;
    j["timing"] = {
        {"trace_seconds", manifest.timing.trace_seconds},
        {"replay_seconds", manifest.timing.replay_seconds},
        {"synthesize_seconds", manifest.timing.synthesize_seconds},
        {"decompose_seconds", manifest.timing.decompose_seconds},
        {"replay_chirps", manifest.timing.replay_chirps},
        {"trace_runs", manifest.timing.trace_runs},
    };
    j["artifacts"] = nlohmann::json::array();
    for (const ArtifactEntry& a : manifest.artifacts) {
        j["artifacts"].push_back({{"path", a.path}, {"bytes", a.bytes}, {"crc32", a.crc32}});
    }
    const std::string text = j.dump(2) + "\n";
    std::vector<unsigned char> bytes(text.begin(), text.end());
    write_file_bytes((dir / "run_manifest.json").string(), bytes);
}

// Per-stage wall times plus the replay-per-chirp vs trace comparison.
inline std::string report_timing(const RunManifest& manifest) {
    const StageTiming& t = manifest.timing;
    std::ostringstream out;
    out << "stage        wall time\n";
    out << "trace        " << t.trace_seconds << " s (" << t.trace_runs << " run"
        << (t.trace_runs == 1 ? "" : "s") << ")\n";
    out << "replay       " << t.replay_seconds << " s (" << t.replay_chirps << " chirps";
    if (t.replay_chirps > 0) {
        out << ", " << t.replay_seconds / static_cast<double>(t.replay_chirps) << " s/chirp";
    }
    out << ")\n";
    out << "synthesize   " << t.synthesize_seconds << " s\n";
    out << "decompose    " << t.decompose_seconds << " s\n";
    if (t.trace_runs > 0 && t.replay_chirps > 0 && t.replay_seconds > 0.0) {
        const double per_chirp = t.replay_seconds / static_cast<double>(t.replay_chirps);
        out << "trace time / replay time per chirp: " << t.trace_seconds / per_chirp << "x\n";
    } else {
        out << "trace time / replay time per chirp: n/a (stage reuse)\n";
    }
    return out.str();
}

// Executes the requested stage(s) of a validated config. Throws std::runtime_error on
// missing stage inputs or I/O failure.
inline RunManifest run(const RunConfig& cfg, Stage stage = Stage::all, bool quiet = false,
                       const std::string& out_override = "") {
    const std::filesystem::path dir = resolve_output_dir(cfg, out_override);
    std::filesystem::create_directories(dir);

    RunManifest manifest;
    manifest.config_digest = cfg.config_digest;
    manifest.seed = cfg.trace.rng_seed;
    manifest.stage = stage_name(stage);
    manifest.output_directory = dir.string();

    const int threads = cfg.output.threads;
    const std::string raypath_name = "paths.rayp";
    const std::string cube_name = "cube.rcub";

    // ---- trace ----
    std::vector<PathRecord> paths;
    if (stage == Stage::trace || stage == Stage::all) {
        Stopwatch clock;
        paths = trace_paths(cfg.scene, cfg.trace, cfg.tx_pattern, cfg.rx_pattern, 0.0, threads);
        manifest.timing.trace_seconds = clock.seconds();
        manifest.timing.trace_runs = 1;
        if (!quiet) {
            std::cout << "traced " << paths.size() << " paths from " << cfg.trace.ray_count
                      << " rays in " << manifest.timing.trace_seconds << " s\n";
        }
        if (cfg.output.wants("raypath")) {
            write_raypath((dir / raypath_name).string(), paths);
            manifest.artifacts.push_back(detail::record_artifact(dir, raypath_name));
        }
    } else {
        const std::filesystem::path raypath_file = dir / raypath_name;
        if (!std::filesystem::exists(raypath_file)) {
            throw std::runtime_error("stage '" + std::string(stage_name(stage)) +
                                     "' needs an existing raypath file: " + raypath_file.string());
        }
        paths = read_raypath(raypath_file.string());
        if (!quiet) std::cout << "loaded " << paths.size() << " paths from " << raypath_file << "\n";
    }
    manifest.path_count = paths.size();

    if (stage == Stage::trace) {
        write_manifest(dir, manifest);
        return manifest;
    }

    // ---- replay + synthesize ----
    ChirpMatrix full_reference;
    if (stage == Stage::replay || stage == Stage::all) {
        ReplayTiming rt;
        RadarCube cube = build_cube(paths, cfg.scene, cfg.layout, cfg.radar, threads, &rt);
        manifest.timing.replay_seconds = rt.replay_seconds;
        manifest.timing.synthesize_seconds = rt.synthesize_seconds;
        manifest.timing.replay_chirps = rt.chirp_evaluations;
        if (cfg.output.noise_stddev > 0.0) {
            for (std::size_t c = 0; c < cube.channels.size(); ++c) {
                add_noise(cube.channels[c], cfg.output.noise_stddev, cfg.trace.rng_seed + c);
            }
        }
        if (!quiet) {
            std::cout << "replayed " << rt.chirp_evaluations << " chirps x "
                      << cfg.layout.channel_count() << " channel(s) in " << rt.replay_seconds
                      << " s, synthesized in " << rt.synthesize_seconds << " s\n";
        }
        if (cfg.output.wants("cube")) {
            write_cube((dir / cube_name).string(), cube);
            manifest.artifacts.push_back(detail::record_artifact(dir, cube_name));
        }
        full_reference = cube.channel(cfg.layout.reference_tx, cfg.layout.reference_rx);
    } else { // Stage::annotate — reuse the stored cube
        const std::filesystem::path cube_file = dir / cube_name;
        if (!std::filesystem::exists(cube_file)) {
            throw std::runtime_error("stage 'annotate' needs an existing cube file: " +
                                     cube_file.string());
        }
        const CubeFile cf = read_cube(cube_file.string());
        if (cf.n_channels != cfg.layout.channel_count()) {
            throw std::runtime_error("cube file channel count " + std::to_string(cf.n_channels) +
                                     " does not match the layout's " +
                                     std::to_string(cfg.layout.channel_count()));
        }
        const std::size_t ref_channel =
            cfg.layout.reference_tx * cfg.layout.rx_positions.size() + cfg.layout.reference_rx;
        full_reference = cf.channel_matrix(ref_channel);
        if (!quiet) std::cout << "loaded cube " << cube_file << "\n";
    }

    if (stage == Stage::replay) {
        write_manifest(dir, manifest);
        return manifest;
    }

    // ---- decompose + annotate ----
    Stopwatch decompose_clock;
    const Decomposition decomposition = apply_rules(paths, cfg.rules, cfg.mode);
    const std::vector<ChirpMatrix> span_matrices =
        span_signal(decomposition, cfg.scene, cfg.layout, cfg.radar, threads);
    const RangeDopplerMap full_map = range_doppler(full_reference, cfg.radar, cfg.output.window_fast,
                                                   cfg.output.window_slow, cfg.output.zero_pad_factor);
    std::vector<std::pair<std::string, RangeDopplerMap>> span_maps;
    span_maps.reserve(span_matrices.size());
    for (std::size_t s = 0; s < span_matrices.size(); ++s) {
        span_maps.emplace_back(decomposition.spans[s].name,
                               range_doppler(span_matrices[s], cfg.radar, cfg.output.window_fast,
                                             cfg.output.window_slow, cfg.output.zero_pad_factor));
    }
    const std::vector<LabelMask> masks = make_masks(full_map, span_maps, cfg.output.threshold_db);
    manifest.timing.decompose_seconds = decompose_clock.seconds();
    if (!quiet) {
        std::cout << "decomposed into " << decomposition.spans.size() << " span(s) in "
                  << manifest.timing.decompose_seconds << " s\n";
    }

    // distinct file names even if sanitized rule names collide
    std::vector<std::string> span_files;
    {
        std::vector<std::string> taken;
        for (const Span& span : decomposition.spans) {
            std::string base = detail::sanitize_name(span.name);
            std::string candidate = base;
            int suffix = 2;
            while (std::find(taken.begin(), taken.end(), candidate) != taken.end()) {
                candidate = base + "_" + std::to_string(suffix++);
            }
            taken.push_back(candidate);
            span_files.push_back(candidate);
        }
    }

    if (cfg.output.wants("png")) {
        write_map_png((dir / "map_full.png").string(), full_map);
        manifest.artifacts.push_back(detail::record_artifact(dir, "map_full.png"));
        for (std::size_t s = 0; s < span_maps.size(); ++s) {
            const std::string name = "map_" + span_files[s] + ".png";
            write_map_png((dir / name).string(), span_maps[s].second);
            manifest.artifacts.push_back(detail::record_artifact(dir, name));
        }
    }
    if (cfg.output.wants("masks")) {
        nlohmann::json sidecar;
        sidecar["threshold_db"] = cfg.output.threshold_db;
        sidecar["n_doppler"] = full_map.n_doppler;
        sidecar["n_range"] = full_map.n_range;
        sidecar["zero_doppler_row"] = full_map.zero_doppler_row();
        sidecar["range_bin_meters"] = full_map.range_bin_meters;
        sidecar["doppler_bin_hz"] = full_map.doppler_bin_hz;
        sidecar["doppler_bin_mps"] = full_map.doppler_bin_mps;
        sidecar["masks"] = nlohmann::json::array();
        for (std::size_t s = 0; s < masks.size(); ++s) {
            const std::string name = "mask_" + span_files[s] + ".png";
            write_mask_png((dir / name).string(), masks[s]);
            manifest.artifacts.push_back(detail::record_artifact(dir, name));
            sidecar["masks"].push_back({{"rule", masks[s].name},
                                        {"file", name},
                                        {"bins_set", masks[s].count()}});
        }
        const std::string text = sidecar.dump(2) + "\n";
        std::vector<unsigned char> bytes(text.begin(), text.end());
        write_file_bytes((dir / "masks.json").string(), bytes);
        manifest.artifacts.push_back(detail::record_artifact(dir, "masks.json"));
    }

    write_manifest(dir, manifest);
    return manifest;
}

} // namespace sbr
