#include "metrocover/oracle.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <numeric>

namespace metrocover {

namespace {

constexpr std::uint8_t kInf = 255;

struct SubsetDp {
    int nv = 0;
    int bits = 0;
    std::vector<std::uint8_t> dist;  // dist[size_t(S) * nv + v]

    std::uint8_t at(std::uint32_t subset, int v) const {
        return dist[static_cast<std::size_t>(subset) * nv + v];
    }
};

struct Indexed {
    const Network* net = nullptr;
    std::vector<int> required_lines;       // network line indexes, sorted
    std::vector<int> line_bit;             // per network line: bit or -1
    std::vector<std::vector<int>> out_by_station;  // network arc indexes, sorted
    int nv = 0;

    int bit_of_arc(int arc) const { return line_bit[net->arc_line(arc)]; }
};

Indexed index_network(const Network& net, const std::vector<LineId>& required) {
    Indexed ix;
    ix.net = &net;
    ix.nv = static_cast<int>(net.stations().size());
    std::vector<LineId> req = required;
    std::sort(req.begin(), req.end());
    req.erase(std::unique(req.begin(), req.end()), req.end());
    ix.line_bit.assign(net.lines().size(), -1);
    for (const auto& line : req) {
        int li = net.line_index(line);
        if (li < 0)
            throw std::invalid_argument("required line not in network: " + line);
        ix.line_bit[li] = static_cast<int>(ix.required_lines.size());
        ix.required_lines.push_back(li);
    }
    ix.out_by_station.resize(ix.nv);
    for (int a = 0; a < static_cast<int>(net.arcs().size()); ++a)
        ix.out_by_station[net.arc_from(a)].push_back(a);  // arcs are sorted already
    return ix;
}

std::uint64_t table_bytes(const Indexed& ix) {
    return static_cast<std::uint64_t>(ix.nv) << ix.required_lines.size();
}

// Two table flavours over (station, colour subset) states:
//  - exact_cover: dist[S][v] = shortest walk from the source (or anywhere)
//    to v whose covered required-colour set is exactly S. Within a layer only
//    arcs of already-covered (or unrequired) colours move; arcs of a new
//    colour seed the larger layer.
//  - to_go: dist[T][v] = shortest walk starting at v that covers at least T
//    and ends at the source station (or anywhere). Arcs of colours in T seed
//    from the smaller layer; everything else moves within the layer. The
//    relaxation runs against the arc direction.
enum class DpMode { exact_cover, to_go };

SubsetDp run_cover_dp(const Indexed& ix, DpMode mode, int source, const OracleLimits& limits) {
    const Network& net = *ix.net;
    const int k = static_cast<int>(ix.required_lines.size());
    const int nv = ix.nv;
    if (k > 28)
        throw std::invalid_argument("too many required lines for subset search");

    std::uint64_t need = table_bytes(ix);
    if (need > limits.memory_budget_bytes)
        throw OracleBudgetError("cover search needs " + std::to_string(need) +
                                    " bytes, over the memory budget of " +
                                    std::to_string(limits.memory_budget_bytes),
                                need);

    SubsetDp dp;
    dp.nv = nv;
    dp.bits = k;
    dp.dist.assign(static_cast<std::size_t>(nv) << k, kInf);

    const bool backward = mode == DpMode::to_go;
    // per-bit arc endpoints, oriented so that "from" is the state improved
    // by the seeding step
    struct Hop {
        int from, to;
    };
    std::vector<std::vector<Hop>> bit_arcs(k);
    // within-layer adjacency: per settled station, (improvable, bit) pairs
    std::vector<std::vector<std::pair<int, int>>> adj(nv);
    for (int a = 0; a < static_cast<int>(net.arcs().size()); ++a) {
        int f = backward ? net.arc_to(a) : net.arc_from(a);
        int t = backward ? net.arc_from(a) : net.arc_to(a);
        int bit = ix.bit_of_arc(a);
        if (bit >= 0)
            bit_arcs[bit].push_back({f, t});
        adj[f].push_back({t, bit});
    }

    std::vector<std::vector<int>> buckets(256);
    const std::uint32_t layers = 1u << k;
    for (std::uint32_t subset = 0; subset < layers; ++subset) {
        std::uint8_t* layer = dp.dist.data() + static_cast<std::size_t>(subset) * nv;
        int lo = 256;

        if (subset == 0) {
            if (source >= 0) {
                layer[source] = 0;
            } else {
                std::fill(layer, layer + nv, 0);
            }
            lo = 0;
        } else {
            for (int b = 0; b < k; ++b) {
                if (!(subset & (1u << b)))
                    continue;
                const std::uint8_t* prev =
                    dp.dist.data() + (static_cast<std::size_t>(subset ^ (1u << b)) * nv);
                for (const Hop& hop : bit_arcs[b]) {
                    std::uint8_t d = prev[hop.from];
                    if (d >= kInf - 1)
                        continue;
                    if (static_cast<std::uint8_t>(d + 1) < layer[hop.to]) {
                        layer[hop.to] = d + 1;
                        lo = std::min(lo, d + 1);
                    }
                }
            }
        }
        if (lo == 256)
            continue;  // layer unreachable

        for (int v = 0; v < nv; ++v)
            if (layer[v] < kInf)
                buckets[layer[v]].push_back(v);
        for (int d = lo; d < 255; ++d) {
            auto& bucket = buckets[d];
            for (std::size_t qi = 0; qi < bucket.size(); ++qi) {
                int v = bucket[qi];
                if (layer[v] != d)
                    continue;
                for (const auto& [to, bit] : adj[v]) {
                    // exact_cover keeps covered colours; to_go keeps colours
                    // that are not needed any more
                    bool within = bit < 0 || (backward ? !(subset & (1u << bit))
                                                       : (subset & (1u << bit)) != 0);
                    if (!within)
                        continue;
                    if (static_cast<std::uint8_t>(d + 1) < layer[to]) {
                        layer[to] = d + 1;
                        buckets[d + 1].push_back(to);
                    }
                }
            }
            bucket.clear();
        }
        for (auto& bucket : buckets)
            bucket.clear();
    }
    return dp;
}

// Backward trace through the table; at each step the smallest
// (station, line, arc_index) predecessor wins, so journeys are reproducible.
Journey reconstruct_from_dp(const Indexed& ix, const SubsetDp& dp, int final_station,
                            int source) {
    const Network& net = *ix.net;
    const int k = dp.bits;
    std::uint32_t subset = (k == 0) ? 0 : ((1u << k) - 1);
    int v = final_station;
    int d = dp.at(subset, v);

    std::vector<std::vector<int>> in_by_station(ix.nv);
    for (int a = 0; a < static_cast<int>(net.arcs().size()); ++a)
        in_by_station[net.arc_to(a)].push_back(a);

    std::vector<JourneyStep> steps;
    while (d > 0) {
        bool moved = false;
        for (int a : in_by_station[v]) {
            int u = net.arc_from(a);
            int bit = ix.bit_of_arc(a);
            std::uint32_t prev_options[2];
            int n_options = 0;
            if (bit < 0) {
                prev_options[n_options++] = subset;
            } else if (subset & (1u << bit)) {
                prev_options[n_options++] = subset ^ (1u << bit);
                prev_options[n_options++] = subset;
            } else {
                continue;
            }
            for (int oi = 0; oi < n_options; ++oi) {
                std::uint32_t prev = prev_options[oi];
                if (dp.at(prev, u) == d - 1) {
                    steps.push_back(JourneyStep{net.stations()[u], net.stations()[v],
                                                net.lines()[net.arc_line(a)]});
                    v = u;
                    subset = prev;
                    --d;
                    moved = true;
                    break;
                }
            }
            if (moved)
                break;
        }
        if (!moved)
            throw std::logic_error("cover table reconstruction lost its trail");
    }
    if (source >= 0 && v != source)
        throw std::logic_error("cover table reconstruction missed the source");
    std::reverse(steps.begin(), steps.end());
    return Journey{std::move(steps)};
}

}  // namespace

CoverSearchResult shortest_cover_walk(const Network& network,
                                      const std::vector<LineId>& required,
                                      const OracleLimits& limits) {
    Indexed ix = index_network(network, required);
    SubsetDp dp = run_cover_dp(ix, DpMode::exact_cover, /*source=*/-1, limits);

    const std::uint32_t full = (1u << dp.bits) - 1;
    int best_v = -1;
    int best = kInf;
    for (int v = 0; v < ix.nv; ++v)
        if (dp.at(full, v) < best) {
            best = dp.at(full, v);
            best_v = v;
        }
    if (best_v < 0)
        return {};
    CoverSearchResult result;
    result.feasible = true;
    result.length = best;
    result.journey = reconstruct_from_dp(ix, dp, best_v, -1);
    return result;
}

CoverSearchResult shortest_cover_cycle(const Network& network,
                                       const std::vector<LineId>& required,
                                       const OracleLimits& limits,
                                       const std::optional<StationId>& anchor) {
    Indexed ix = index_network(network, required);
    std::vector<LineId> req_names;
    for (int li : ix.required_lines)
        req_names.push_back(network.lines()[li]);

    std::vector<StationId> anchors;
    if (anchor) {
        anchors.push_back(*anchor);
    } else {
        VariantConfig v;
        v.shape = Shape::cycle;
        v.required_colors = req_names;
        anchors = cycle_anchor_candidates(network, v);
    }

    const std::uint32_t full = (1u << ix.required_lines.size()) - 1;
    CoverSearchResult best;
    for (const auto& a : anchors) {
        int av = network.station_index(a);
        if (av < 0)
            throw std::invalid_argument("anchor not in network: " + a);
        SubsetDp dp = run_cover_dp(ix, DpMode::exact_cover, av, limits);
        int len = dp.at(full, av);
        if (len >= kInf)
            continue;
        if (!best.feasible || len < best.length) {
            best.feasible = true;
            best.length = len;
            best.journey = reconstruct_from_dp(ix, dp, av, av);
        }
    }
    return best;
}

PathSearchResult shortest_cover_path(const Network& network, const std::vector<LineId>& required,
                                     const OracleLimits& limits) {
    Indexed ix = index_network(network, required);
    const int k = static_cast<int>(ix.required_lines.size());
    const std::uint32_t full = (1u << k) - 1;

    PathSearchResult best;
    std::uint64_t nodes = limits.node_budget;
    std::vector<char> visited(ix.nv, 0);
    std::vector<int> trail_arcs;

    // branch and bound; remaining uncovered colours bound the steps left
    auto dfs = [&](auto&& self, int v, std::uint32_t covered, int steps) -> void {
        if (nodes == 0)
            return;
        --nodes;
        if (covered == full) {
            if (!best.feasible || steps < best.length) {
                best.feasible = true;
                best.length = steps;
                std::vector<JourneyStep> js;
                for (int a : trail_arcs)
                    js.push_back(JourneyStep{network.stations()[network.arc_from(a)],
                                             network.stations()[network.arc_to(a)],
                                             network.lines()[network.arc_line(a)]});
                best.journey = Journey{std::move(js)};
            }
            return;
        }
        int uncovered = std::popcount(full & ~covered);
        if (best.feasible && steps + uncovered >= best.length)
            return;
        for (int a : ix.out_by_station[v]) {
            int w = network.arc_to(a);
            if (visited[w])
                continue;
            int bit = ix.bit_of_arc(a);
            std::uint32_t next = bit >= 0 ? covered | (1u << bit) : covered;
            visited[w] = 1;
            trail_arcs.push_back(a);
            self(self, w, next, steps + 1);
            trail_arcs.pop_back();
            visited[w] = 0;
            if (nodes == 0)
                return;
        }
    };

    for (int start = 0; start < ix.nv; ++start) {
        visited.assign(ix.nv, 0);
        visited[start] = 1;
        dfs(dfs, start, 0, 0);
        if (nodes == 0)
            break;
    }
    best.proven = nodes > 0;
    return best;
}

bool journey_has_unique_line_runs(const Journey& journey, const std::vector<LineId>& required,
                                  bool cyclic) {
    std::vector<LineId> runs;
    for (const auto& step : journey.steps)
        if (runs.empty() || runs.back() != step.line)
            runs.push_back(step.line);
    if (cyclic && runs.size() > 1 && runs.front() == runs.back())
        runs.pop_back();  // the closing run wraps into the opening one
    std::set<LineId> req(required.begin(), required.end());
    std::set<LineId> seen;
    for (const auto& line : runs) {
        if (!req.count(line))
            continue;
        if (!seen.insert(line).second)
            return false;
    }
    return true;
}

namespace {

struct EnumContext {
    const Network* net;
    Indexed ix;
    SubsetDp togo;  // reversed orientation: distance still needed from (v, needed)
    std::uint32_t full;
    int target_len;
    bool forbid_station_reuse;
    bool forbid_line_reuse;
    bool cyclic;
    int anchor = -1;

    std::uint64_t nodes = 0;
    std::uint64_t node_budget = 0;
    bool budget_hit = false;

    std::vector<char> used_arc;
    std::vector<char> visited;
    std::vector<int> trail;
    std::set<std::vector<int>>* found = nullptr;
};

void enum_dfs(EnumContext& ctx, int v, std::uint32_t covered, int steps, int current_line,
              std::uint32_t closed_lines) {
    if (ctx.nodes++ >= ctx.node_budget) {
        ctx.budget_hit = true;
        return;
    }
    if (steps == ctx.target_len) {
        if (covered != ctx.full)
            return;
        Journey j;  // cyclic line-reuse is checked on the assembled step list
        if (ctx.forbid_line_reuse && ctx.cyclic) {
            for (int a : ctx.trail)
                j.steps.push_back(JourneyStep{(*ctx.net).stations()[(*ctx.net).arc_from(a)],
                                              (*ctx.net).stations()[(*ctx.net).arc_to(a)],
                                              (*ctx.net).lines()[(*ctx.net).arc_line(a)]});
            std::vector<LineId> req;
            for (int li : ctx.ix.required_lines)
                req.push_back((*ctx.net).lines()[li]);
            if (!journey_has_unique_line_runs(j, req, /*cyclic=*/true))
                return;
        }
        std::vector<int> arcs = ctx.trail;
        std::sort(arcs.begin(), arcs.end());
        ctx.found->insert(std::move(arcs));
        return;
    }
    for (int a : ctx.ix.out_by_station[v]) {
        if (ctx.used_arc[a])
            continue;
        int w = ctx.net->arc_to(a);
        int bit = ctx.ix.bit_of_arc(a);
        std::uint32_t next_cov = bit >= 0 ? covered | (1u << bit) : covered;
        std::uint32_t needed = ctx.full & ~next_cov;
        std::uint8_t togo = ctx.togo.at(needed, w);
        if (togo >= kInf || steps + 1 + togo > ctx.target_len)
            continue;

        bool is_final = steps + 1 == ctx.target_len;
        if (ctx.forbid_station_reuse && ctx.visited[w] &&
            !(ctx.cyclic && is_final && w == ctx.anchor))
            continue;

        int line = ctx.net->arc_line(a);
        int next_current = current_line;
        std::uint32_t next_closed = closed_lines;
        if (ctx.forbid_line_reuse && !ctx.cyclic) {
            if (line != current_line) {
                if (current_line >= 0) {
                    int cbit = ctx.ix.line_bit[current_line];
                    if (cbit >= 0)
                        next_closed |= 1u << cbit;
                }
                if (bit >= 0 && (next_closed & (1u << bit)))
                    continue;  // this line's run already ended
                next_current = line;
            }
        }

        ctx.used_arc[a] = 1;
        char visited_before = ctx.visited[w];
        if (ctx.forbid_station_reuse)
            ctx.visited[w] = 1;
        ctx.trail.push_back(a);
        enum_dfs(ctx, w, next_cov, steps + 1, next_current, next_closed);
        ctx.trail.pop_back();
        if (ctx.forbid_station_reuse)
            ctx.visited[w] = visited_before;
        ctx.used_arc[a] = 0;
        if (ctx.budget_hit)
            return;
    }
}

}  // namespace

EnumerationResult enumerate_optimal_arcsets(const Network& network, const VariantConfig& variant,
                                            const OracleLimits& limits) {
    VariantConfig v = normalize_variant(variant, network);
    Indexed ix = index_network(network, v.required_colors);
    const int k = static_cast<int>(ix.required_lines.size());
    const std::uint32_t full = (1u << k) - 1;

    std::uint64_t need = 2 * table_bytes(ix);
    if (need > limits.memory_budget_bytes)
        throw OracleBudgetError("enumeration needs " + std::to_string(need) +
                                    " bytes of cover tables, over the memory budget",
                                need);
    OracleLimits half = limits;
    half.memory_budget_bytes = limits.memory_budget_bytes / 2;

    const bool cyclic = v.shape == Shape::cycle;
    std::vector<StationId> anchors;
    if (cyclic)
        anchors = v.anchor ? std::vector<StationId>{*v.anchor}
                           : cycle_anchor_candidates(network, v);

    // base optimum of the unrestricted shape: restricted variants can only
    // be longer, so search lengths upward from there
    std::int64_t base_len = -1;
    if (cyclic) {
        auto base = shortest_cover_cycle(network, v.required_colors, half,
                                         v.anchor ? std::optional<StationId>(*v.anchor)
                                                  : std::nullopt);
        if (!base.feasible)
            return {{}, -1, true, false};
        base_len = base.length;
    } else {
        auto base = shortest_cover_walk(network, v.required_colors, half);
        if (!base.feasible)
            return {{}, -1, true, false};
        base_len = base.length;
    }

    const bool restricted = v.forbid_station_reuse || v.forbid_line_reuse;
    std::int64_t cap = static_cast<std::int64_t>(network.arcs().size());
    if (v.forbid_station_reuse)
        cap = std::min<std::int64_t>(cap, static_cast<std::int64_t>(network.stations().size()) -
                                              (cyclic ? 0 : 1));
    EnumerationResult result;
    result.complete = true;

    // distance-to-go tables are target-independent: build them once
    std::vector<std::pair<int, SubsetDp>> anchor_tables;  // (anchor vertex, table)
    if (cyclic) {
        for (const auto& anchor : anchors) {
            int av = network.station_index(anchor);
            anchor_tables.emplace_back(av, run_cover_dp(ix, DpMode::to_go, av, half));
        }
    } else {
        anchor_tables.emplace_back(-1, run_cover_dp(ix, DpMode::to_go, -1, half));
    }

    for (std::int64_t target = base_len; target <= (restricted ? cap : base_len); ++target) {
        std::set<std::vector<int>> found;
        bool budget_hit = false;

        for (auto& [av, togo] : anchor_tables) {
            EnumContext ctx{&network, ix, {}, full, static_cast<int>(target),
                            v.forbid_station_reuse, v.forbid_line_reuse, cyclic, av};
            ctx.togo = std::move(togo);
            ctx.node_budget = limits.node_budget;
            ctx.found = &found;
            if (cyclic) {
                if (ctx.togo.at(full, av) <= target) {
                    ctx.used_arc.assign(network.arcs().size(), 0);
                    ctx.visited.assign(ix.nv, 0);
                    ctx.visited[av] = 1;
                    ctx.trail.clear();
                    enum_dfs(ctx, av, 0, 0, -1, 0);
                }
            } else {
                for (int start = 0; start < ix.nv && !ctx.budget_hit; ++start) {
                    if (ctx.togo.at(full, start) > target)
                        continue;
                    ctx.used_arc.assign(network.arcs().size(), 0);
                    ctx.visited.assign(ix.nv, 0);
                    ctx.visited[start] = 1;
                    ctx.trail.clear();
                    enum_dfs(ctx, start, 0, 0, -1, 0);
                }
            }
            budget_hit = budget_hit || ctx.budget_hit;
            togo = std::move(ctx.togo);  // hand the table back for the next target
        }

        if (budget_hit)
            result.complete = false;
        if (!found.empty()) {
            result.arcsets.assign(found.begin(), found.end());
            result.objective = target;
            result.feasible = true;
            return result;
        }
        if (budget_hit)
            return result;  // cannot tell whether this length was empty
    }
    return result;  // infeasible within the cap (restricted variants only)
}

OracleSolveResult oracle_solve(const Network& network, const VariantConfig& variant,
                               const OracleLimits& limits) {
    VariantConfig v = normalize_variant(variant, network);
    OracleSolveResult out;

    if (!v.forbid_line_reuse &&
        (v.shape == Shape::walk || v.shape == Shape::cycle) && !v.forbid_station_reuse) {
        CoverSearchResult r =
            v.shape == Shape::walk
                ? shortest_cover_walk(network, v.required_colors, limits)
                : shortest_cover_cycle(network, v.required_colors, limits, v.anchor);
        out.feasible = r.feasible;
        out.objective = r.length;
        out.journey = r.journey;
        if (r.feasible) {
            // arc multiset of the journey; a step repeating an arc keeps its
            // multiplicity so |arcset| equals the objective
            for (const auto& step : r.journey.steps)
                for (int a = 0; a < static_cast<int>(network.arcs().size()); ++a)
                    if (network.stations()[network.arc_from(a)] == step.departure &&
                        network.stations()[network.arc_to(a)] == step.arrival &&
                        network.lines()[network.arc_line(a)] == step.line) {
                        out.arcset.push_back(a);
                        break;
                    }
            std::sort(out.arcset.begin(), out.arcset.end());
        }
        return out;
    }

    if (v.shape == Shape::path && !v.forbid_line_reuse) {
        PathSearchResult r = shortest_cover_path(network, v.required_colors, limits);
        out.feasible = r.feasible;
        out.proven = r.proven;
        out.objective = r.length;
        out.journey = r.journey;
        if (r.feasible)
            for (const auto& step : r.journey.steps)
                for (int a = 0; a < static_cast<int>(network.arcs().size()); ++a)
                    if (network.stations()[network.arc_from(a)] == step.departure &&
                        network.stations()[network.arc_to(a)] == step.arrival &&
                        network.lines()[network.arc_line(a)] == step.line) {
                        out.arcset.push_back(a);
                        break;
                    }
        std::sort(out.arcset.begin(), out.arcset.end());
        return out;
    }

    EnumerationResult r = enumerate_optimal_arcsets(network, v, limits);
    out.feasible = r.feasible;
    out.proven = r.complete;
    out.objective = r.objective;
    if (r.feasible) {
        out.arcset = r.arcsets.front();
        // the journey for restricted variants is rebuilt by the solution
        // module from the arc set
    }
    return out;
}

}  // namespace metrocover
