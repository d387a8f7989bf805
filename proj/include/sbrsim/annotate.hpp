// annotate.hpp — meta-data filter rules, signal decomposition, and label-mask generation.
//
// A filter rule is a small predicate tree over one path record's hit list (bounce count,
// mesh membership, first-hit mesh, triangle sets, AND/OR/NOT). Rules split the record list
// into named spans; each span re-synthesizes through the replay pipeline it came from, so a
// partition's span matrices sum back to the full matrix up to rounding. Masks threshold each
// span's spectrum against the FULL map's peak, which keeps empty spans empty.
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "sbrsim/replay.hpp"
#include "sbrsim/signal.hpp"
#include "sbrsim/tracer.hpp"

namespace sbr {

struct FilterExpr {
    enum class Op {
        all_of,        // AND over children (true when empty)
        any_of,        // OR over children (false when empty)
        negate,        // NOT of the single child
        bounce_count,  // hits length compared with value
        contains_mesh, // any hit on mesh_id
        first_hit_mesh,// first hit on mesh_id
        only_meshes,   // every hit's mesh in ids
        triangle_in    // any hit on mesh_id with triangle index in ids
    };
    enum class Cmp { lt, le, eq, ne, ge, gt };

    Op op = Op::all_of;
    Cmp cmp = Cmp::eq;
    std::uint64_t value = 0;          // bounce_count operand
    std::uint32_t mesh_id = 0;        // contains_mesh / first_hit_mesh / triangle_in operand
    std::vector<std::uint32_t> ids;   // only_meshes mesh set, triangle_in triangle set
    std::vector<FilterExpr> children; // all_of / any_of / negate operands

    static FilterExpr bounce_count(Cmp cmp, std::uint64_t k) {
        FilterExpr e;
        e.op = Op::bounce_count;
        e.cmp = cmp;
        e.value = k;
        return e;
    }
    static FilterExpr contains_mesh(std::uint32_t id) {
        FilterExpr e;
        e.op = Op::contains_mesh;
        e.mesh_id = id;
        return e;
    }
    static FilterExpr first_hit_mesh(std::uint32_t id) {
        FilterExpr e;
        e.op = Op::first_hit_mesh;
        e.mesh_id = id;
        return e;
    }
    static FilterExpr only_meshes(std::vector<std::uint32_t> mesh_ids) {
        FilterExpr e;
        e.op = Op::only_meshes;
        e.ids = std::move(mesh_ids);
        return e;
    }
    static FilterExpr triangle_in(std::uint32_t mesh, std::vector<std::uint32_t> triangles) {
        FilterExpr e;
        e.op = Op::triangle_in;
        e.mesh_id = mesh;
        e.ids = std::move(triangles);
        return e;
    }
    static FilterExpr all_of_exprs(std::vector<FilterExpr> children) {
        FilterExpr e;
        e.op = Op::all_of;
        e.children = std::move(children);
        return e;
    }
    static FilterExpr any_of_exprs(std::vector<FilterExpr> children) {
        FilterExpr e;
        e.op = Op::any_of;
        e.children = std::move(children);
        return e;
    }
    static FilterExpr negate_expr(FilterExpr child) {
        FilterExpr e;
        e.op = Op::negate;
        e.children.push_back(std::move(child));
        return e;
    }
};

inline bool compare(FilterExpr::Cmp cmp, std::uint64_t lhs, std::uint64_t rhs) {
    switch (cmp) {
        case FilterExpr::Cmp::lt: return lhs < rhs;
        case FilterExpr::Cmp::le: return lhs <= rhs;
        case FilterExpr::Cmp::eq: return lhs == rhs;
        case FilterExpr::Cmp::ne: return lhs != rhs;
        case FilterExpr::Cmp::ge: return lhs >= rhs;
        case FilterExpr::Cmp::gt: return lhs > rhs;
    }
    return false;
}

inline bool evaluate(const FilterExpr& expr, const PathRecord& path) {
    switch (expr.op) {
        case FilterExpr::Op::all_of:
            for (const FilterExpr& child : expr.children) {
                if (!evaluate(child, path)) return false;
            }
            return true;
        case FilterExpr::Op::any_of:
            for (const FilterExpr& child : expr.children) {
                if (evaluate(child, path)) return true;
            }
            return false;
        case FilterExpr::Op::negate:
            return !evaluate(expr.children.front(), path);
        case FilterExpr::Op::bounce_count:
            return compare(expr.cmp, path.hits.size(), expr.value);
        case FilterExpr::Op::contains_mesh:
            for (const HitRecord& hit : path.hits) {
                if (hit.mesh_id == expr.mesh_id) return true;
            }
            return false;
        case FilterExpr::Op::first_hit_mesh:
            return !path.hits.empty() && path.hits.front().mesh_id == expr.mesh_id;
        case FilterExpr::Op::only_meshes: {
            for (const HitRecord& hit : path.hits) {
                bool found = false;
                for (const std::uint32_t id : expr.ids) {
                    if (hit.mesh_id == id) {
                        found = true;
                        break;
                    }
                }
                if (!found) return false;
            }
            return true;
        }
        case FilterExpr::Op::triangle_in:
            for (const HitRecord& hit : path.hits) {
                if (hit.mesh_id != expr.mesh_id) continue;
                for (const std::uint32_t idx : expr.ids) {
                    if (hit.triangle_index == idx) return true;
                }
            }
            return false;
    }
    return false;
}

// Structural well-formedness (arity of NOT, non-empty operand sets). Scene resolution of the
// referenced IDs is a separate concern handled with collect_*_refs below.
inline void validate_expr_into(const FilterExpr& expr, std::vector<std::string>& errors) {
    switch (expr.op) {
        case FilterExpr::Op::negate:
            if (expr.children.size() != 1) {
                errors.push_back("filter: NOT takes exactly one operand");
                return;
            }
            validate_expr_into(expr.children.front(), errors);
            return;
        case FilterExpr::Op::all_of:
        case FilterExpr::Op::any_of:
            for (const FilterExpr& child : expr.children) validate_expr_into(child, errors);
            return;
        case FilterExpr::Op::only_meshes:
            if (expr.ids.empty()) errors.push_back("filter: only_meshes needs at least one mesh id");
            return;
        case FilterExpr::Op::triangle_in:
            if (expr.ids.empty()) errors.push_back("filter: triangle_in needs at least one triangle index");
            return;
        case FilterExpr::Op::bounce_count:
        case FilterExpr::Op::contains_mesh:
        case FilterExpr::Op::first_hit_mesh:
            return;
    }
}

inline std::vector<std::string> validate_expr(const FilterExpr& expr) {
    std::vector<std::string> errors;
    validate_expr_into(expr, errors);
    return errors;
}

inline void collect_mesh_refs(const FilterExpr& expr, std::vector<std::uint32_t>& out) {
    switch (expr.op) {
        case FilterExpr::Op::contains_mesh:
        case FilterExpr::Op::first_hit_mesh:
        case FilterExpr::Op::triangle_in:
            out.push_back(expr.mesh_id);
            break;
        case FilterExpr::Op::only_meshes:
            out.insert(out.end(), expr.ids.begin(), expr.ids.end());
            break;
        default:
            break;
    }
    for (const FilterExpr& child : expr.children) collect_mesh_refs(child, out);
}

// (mesh id, triangle index) pairs named by triangle_in atoms.
inline void collect_triangle_refs(const FilterExpr& expr,
                                  std::vector<std::pair<std::uint32_t, std::uint32_t>>& out) {
    if (expr.op == FilterExpr::Op::triangle_in) {
        for (const std::uint32_t idx : expr.ids) out.emplace_back(expr.mesh_id, idx);
    }
    for (const FilterExpr& child : expr.children) collect_triangle_refs(child, out);
}

struct FilterRule {
    std::string name;
    FilterExpr expr;
};

enum class DecompositionMode { partition, overlay };

// One named ray span: the subset of records selected by a rule, in ascending input order.
struct Span {
    std::string name;
    std::vector<PathRecord> paths;
};

struct Decomposition {
    DecompositionMode mode = DecompositionMode::partition;
    std::vector<Span> spans;
};

// Splits paths into per-rule spans. Partition mode requires rules to be disjoint over the
// actual record list, and always appends a "rest" span holding the unmatched remainder.
inline Decomposition apply_rules(const std::vector<PathRecord>& paths,
                                 const std::vector<FilterRule>& rules, DecompositionMode mode) {
    std::unordered_set<std::string> seen_names;
    for (const FilterRule& rule : rules) {
        const auto errors = validate_expr(rule.expr);
        if (!errors.empty()) {
            throw std::invalid_argument("apply_rules: rule '" + rule.name + "': " + errors.front());
        }
        if (!seen_names.insert(rule.name).second) {
            throw std::invalid_argument("apply_rules: duplicate rule name '" + rule.name + "'");
        }
        if (mode == DecompositionMode::partition && rule.name == "rest") {
            throw std::invalid_argument(
                "apply_rules: rule name 'rest' is reserved for the partition remainder");
        }
    }

    Decomposition out;
    out.mode = mode;
    out.spans.reserve(rules.size() + (mode == DecompositionMode::partition ? 1 : 0));
    for (const FilterRule& rule : rules) out.spans.push_back({rule.name, {}});

    std::vector<bool> matched(paths.size(), false);
    for (std::size_t p = 0; p < paths.size(); ++p) {
        for (std::size_t r = 0; r < rules.size(); ++r) {
            if (!evaluate(rules[r].expr, paths[p])) continue;
            if (mode == DecompositionMode::partition && matched[p]) {
                std::size_t first = 0;
                while (first < r && !evaluate(rules[first].expr, paths[p])) ++first;
                throw std::invalid_argument("apply_rules: partition overlap — rules '" +
                                            rules[first].name + "' and '" + rules[r].name +
                                            "' both select ray " + std::to_string(paths[p].ray_index));
            }
            matched[p] = true;
            out.spans[r].paths.push_back(paths[p]);
        }
    }

    if (mode == DecompositionMode::partition) {
        Span rest{"rest", {}};
        for (std::size_t p = 0; p < paths.size(); ++p) {
            if (!matched[p]) rest.paths.push_back(paths[p]);
        }
        out.spans.push_back(std::move(rest));
    }
    return out;
}

// Synthesizes each span independently on the layout's reference pair via the replay pipeline.
// A span's records are a subset of the full list in the same order, so every per-path
// contribution is bitwise identical to its contribution in the full synthesis.
inline std::vector<ChirpMatrix> span_signal(const Decomposition& decomposition, const Scene& scene,
                                            const AntennaLayout& layout, const RadarParams& params,
                                            int threads = 1) {
    {
        const auto errors = layout.validate();
        if (!errors.empty()) throw std::invalid_argument("span_signal: " + errors.front());
    }
    const AntennaLayout reference = AntennaLayout::reference_only(
        layout.tx_positions[layout.reference_tx], layout.rx_positions[layout.reference_rx]);
    std::vector<ChirpMatrix> matrices;
    matrices.reserve(decomposition.spans.size());
    for (const Span& span : decomposition.spans) {
        matrices.push_back(
            build_cube(span.paths, scene, reference, params, threads).channel(0, 0));
    }
    return matrices;
}

// Binary annotation over range-Doppler bins: true where the span's magnitude reaches above
// (full-map peak) - threshold_db.
struct LabelMask {
    std::string name;
    std::size_t n_doppler = 0;
    std::size_t n_range = 0;
    std::vector<std::uint8_t> mask; // 0 or 1, [doppler][range]
    double threshold_db = 0.0;

    bool at(std::size_t d, std::size_t r) const { return mask[d * n_range + r] != 0; }
    std::size_t count() const {
        std::size_t n = 0;
        for (const std::uint8_t m : mask) n += m;
        return n;
    }
};

inline std::vector<LabelMask> make_masks(const RangeDopplerMap& full,
                                         const std::vector<std::pair<std::string, RangeDopplerMap>>& spans,
                                         double threshold_db = 25.0) {
    if (!(threshold_db > 0.0)) throw std::invalid_argument("make_masks: threshold_db must be > 0");
    const double cutoff = full.peak_magnitude() * std::pow(10.0, -threshold_db / 20.0);
    std::vector<LabelMask> masks;
    masks.reserve(spans.size());
    for (const auto& [name, map] : spans) {
        if (map.n_doppler != full.n_doppler || map.n_range != full.n_range) {
            throw std::invalid_argument("make_masks: span map '" + name + "' dims differ from full map");
        }
        LabelMask label;
        label.name = name;
        label.n_doppler = map.n_doppler;
        label.n_range = map.n_range;
        label.threshold_db = threshold_db;
        label.mask.resize(map.spectrum.size(), 0);
        if (cutoff > 0.0) {
            for (std::size_t k = 0; k < map.spectrum.size(); ++k) {
                label.mask[k] = std::abs(map.spectrum[k]) >= cutoff ? 1 : 0;
            }
        }
        masks.push_back(std::move(label));
    }
    return masks;
}

} // namespace sbr
