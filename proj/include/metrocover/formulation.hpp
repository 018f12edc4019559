#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "metrocover/network.hpp"

namespace metrocover {

enum class Shape { walk, path, cycle };

std::string to_string(Shape shape);

// Which problem flavour to solve. `path` is `walk` plus the no-station-reuse
// bound; the two spellings are normalised to the same configuration.
struct VariantConfig {
    Shape shape = Shape::walk;
    std::vector<LineId> required_colors;  // sorted, nonempty, subset of network lines
    bool forbid_station_reuse = false;
    bool forbid_line_reuse = false;
    std::optional<StationId> anchor;  // cycle flow anchor

    friend bool operator==(const VariantConfig&, const VariantConfig&) = default;
};

// Normalises (walk + forbid_station_reuse -> path) and validates against the
// network. Throws std::invalid_argument on a bad configuration.
VariantConfig normalize_variant(VariantConfig variant, const Network& network);

struct ModelOptions {
    // Flow capacity coefficient. The default sizes it as (model arcs + model
    // vertices); `paper` uses the vertex count only, which is too small for
    // dense little instances but reproduces the original formulation.
    enum class BigM { safe_default, paper };
    BigM big_m = BigM::safe_default;
};

struct IlpVar {
    enum class Kind { binary, integer };
    std::string name;
    Kind kind = Kind::binary;
    std::optional<std::int64_t> upper;  // lower bound is always 0
    std::int64_t objective = 0;
};

struct IlpTerm {
    std::int64_t coef;
    int var;
};

struct IlpConstraint {
    enum class Sense { le, ge, eq };
    std::string name;
    std::vector<IlpTerm> terms;
    Sense sense = Sense::eq;
    std::int64_t rhs = 0;
};

// Abstract ILP over the arc variables. Vertex ids: 0..nv-1 are network
// stations; walk models append the fake source (nv) and target (nv+1).
class IlpModel {
public:
    struct ModelArc {
        int from_v;
        int to_v;
        int line;     // network line index, or -1 for the fake pseudo-colour
        int net_arc;  // network arc index, or -1 for fake arcs
        int x_var;
        int f_var;
    };

    std::vector<IlpVar> vars;
    std::vector<IlpConstraint> rows;
    std::vector<IlpConstraint> cuts;
    std::vector<ModelArc> arcs;
    std::vector<int> y_var;  // per vertex
    std::int64_t big_m = 0;
    Shape shape = Shape::walk;
    int vertex_count = 0;  // including fake vertices
    int source_v = -1;     // fake source (walk) or anchor (cycle)
    int target_v = -1;     // fake target (walk only)

    int var_index(const std::string& name) const;  // -1 if absent

    friend bool operator==(const IlpModel&, const IlpModel&) = default;
};

// The base program: minimise chosen real arcs subject to per-vertex degree
// balance, one walk start and end, colour coverage, and a single-commodity
// connectivity flow generated at the source.
IlpModel build_base_model(const Network& network, const VariantConfig& variant,
                          const ModelOptions& options = {});

// Bounds every y_v by 2: with fake arcs counting toward endpoint degrees,
// this forbids visiting any station twice.
IlpModel apply_path_restriction(IlpModel model);

// Adds pair variables z for consecutive chosen arcs and requires each
// required line to see exactly one entry and one exit transition, so its
// arcs form one contiguous run of the walk.
IlpModel apply_line_contiguity(IlpModel model, const Network& network,
                               const VariantConfig& variant);

// Rebuilds the program as a closed walk through `anchor`: no fake vertices,
// balance at every vertex, flow generated at the anchor.
IlpModel build_cycle_model(const Network& network, const VariantConfig& variant,
                           const StationId& anchor, const ModelOptions& options = {});

// Excludes the exact arc set of a previous solution (and its supersets):
// sum of the solution's x variables <= |X| - 1.
IlpModel add_nogood_cut(IlpModel model, const std::vector<int>& solution_arcs);

// Deterministic LP-format text. Variable names encode their meaning
// reversibly: x__<from>__<to>__<line>__<k>, f__..., y__<station>,
// z__<u>__<v>__<w>__<l1>__<l2>, with non-alphanumerics percent-encoded.
std::string serialize_lp(const IlpModel& model);

// Variable-name component codec (percent-encoding, '.s'/'.t'/'.none' are the
// reserved fake tokens).
std::string encode_name_component(const std::string& raw);
std::string decode_name_component(const std::string& encoded);
std::vector<std::string> split_var_name(const std::string& name);

// Anchor candidates for the cycle variant: every vertex incident to the
// required line with the fewest incident vertices (ties: line name order).
std::vector<StationId> cycle_anchor_candidates(const Network& network,
                                               const VariantConfig& variant);

}  // namespace metrocover
