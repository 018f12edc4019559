#include "metrocover/solution.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "metrocover/ingest.hpp"

namespace metrocover {

std::string to_string(Backend backend) {
    return backend == Backend::oracle ? "oracle" : "milp";
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

Journey reconstruct_walk(const std::vector<int>& arc_multiset, const Network& network,
                         Shape shape, const std::optional<StationId>& anchor) {
    if (arc_multiset.empty())
        return {};

    std::map<int, int> degree;  // out minus in
    std::set<int> touched;
    for (int a : arc_multiset) {
        ++degree[network.arc_from(a)];
        --degree[network.arc_to(a)];
        touched.insert(network.arc_from(a));
        touched.insert(network.arc_to(a));
    }
    int start = -1, end = -1;
    for (const auto& [v, d] : degree) {
        if (d == 0)
            continue;
        if (d == 1 && start < 0)
            start = v;
        else if (d == -1 && end < 0)
            end = v;
        else
            throw std::invalid_argument("arc set is not walk-balanced at " +
                                        network.stations()[v]);
    }
    if ((start < 0) != (end < 0))
        throw std::invalid_argument("arc set has a start surplus without an end (or vice versa)");
    bool closed = start < 0;
    if (closed) {
        if (shape == Shape::cycle && anchor) {
            int av = network.station_index(*anchor);
            if (av < 0 || !touched.count(av))
                throw std::invalid_argument("anchor is not on the arc set");
            start = av;
        } else {
            start = *touched.begin();  // smallest station: deterministic rotation
        }
    } else if (shape == Shape::cycle) {
        throw std::invalid_argument("cycle variant got an open arc set");
    }

    // weak connectivity: every arc endpoint reachable from the start
    {
        std::map<int, std::vector<int>> undirected;
        for (int a : arc_multiset) {
            undirected[network.arc_from(a)].push_back(network.arc_to(a));
            undirected[network.arc_to(a)].push_back(network.arc_from(a));
        }
        std::set<int> seen{start};
        std::vector<int> stack{start};
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int w : undirected[v])
                if (seen.insert(w).second)
                    stack.push_back(w);
        }
        if (seen.size() != touched.size())
            throw std::invalid_argument("arc set is disconnected");
    }

    // out-adjacency with per-arc multiplicity, ordered (line, to, arc_index)
    struct OutArc {
        LineId line;
        StationId to_name;
        int arc;
        int remaining;
    };
    std::map<int, std::vector<OutArc>> out;
    {
        std::map<int, int> mult;
        for (int a : arc_multiset)
            ++mult[a];
        for (const auto& [a, m] : mult)
            out[network.arc_from(a)].push_back(
                OutArc{network.arcs()[a].line, network.arcs()[a].to, a, m});
        for (auto& [v, list] : out)
            std::sort(list.begin(), list.end(), [](const OutArc& x, const OutArc& y) {
                return std::tie(x.line, x.to_name, x.arc) < std::tie(y.line, y.to_name, y.arc);
            });
    }

    // greedy trail plus subtour splicing; continuing the incoming line wins
    // ties so one-run-per-line solutions come out contiguous
    auto greedy = [&](int from, const LineId* prefer_line) {
        std::vector<int> trail;
        int v = from;
        const LineId* prev = prefer_line;
        for (;;) {
            auto it = out.find(v);
            OutArc* pick = nullptr;
            if (it != out.end()) {
                for (auto& cand : it->second)
                    if (cand.remaining > 0 && prev && cand.line == *prev) {
                        pick = &cand;
                        break;
                    }
                if (!pick)
                    for (auto& cand : it->second)
                        if (cand.remaining > 0) {
                            pick = &cand;
                            break;
                        }
            }
            if (!pick)
                return trail;
            --pick->remaining;
            trail.push_back(pick->arc);
            v = network.arc_to(pick->arc);
            prev = &network.arcs()[pick->arc].line;
        }
    };

    std::vector<int> trail = greedy(start, nullptr);
    for (;;) {
        int insert_at = -1;
        for (std::size_t i = 0; i <= trail.size(); ++i) {
            int v = i == 0 ? start : network.arc_to(trail[i - 1]);
            auto it = out.find(v);
            if (it == out.end())
                continue;
            bool has = false;
            for (const auto& cand : it->second)
                if (cand.remaining > 0)
                    has = true;
            if (has) {
                insert_at = static_cast<int>(i);
                break;
            }
        }
        if (insert_at < 0)
            break;
        int v = insert_at == 0 ? start : network.arc_to(trail[insert_at - 1]);
        const LineId* prefer =
            insert_at == 0 ? nullptr : &network.arcs()[trail[insert_at - 1]].line;
        std::vector<int> sub = greedy(v, prefer);
        if (sub.empty() || network.arc_to(sub.back()) != v)
            throw std::invalid_argument("arc set is not walk-balanced (stuck subtour)");
        trail.insert(trail.begin() + insert_at, sub.begin(), sub.end());
    }

    if (trail.size() != arc_multiset.size())
        throw std::invalid_argument("arc set is disconnected");

    Journey journey;
    for (int a : trail)
        journey.steps.push_back(JourneyStep{network.arcs()[a].from, network.arcs()[a].to,
                                            network.arcs()[a].line});
    return journey;
}

ValidationReport validate_journey(const Journey& journey, const Network& network,
                                  const VariantConfig& variant) {
    ValidationReport report;
    VariantConfig v;
    try {
        v = normalize_variant(variant, network);
    } catch (const std::exception& e) {
        report.failures.push_back(e.what());
        return report;
    }

    std::vector<StationId> stations;  // canonical visit sequence
    std::set<LineId> lines_seen;
    StationId prev_arrival;
    for (std::size_t i = 0; i < journey.steps.size(); ++i) {
        const JourneyStep& step = journey.steps[i];
        auto dep = network.resolve_station(step.departure);
        auto arr = network.resolve_station(step.arrival);
        if (!dep)
            report.failures.push_back("step " + std::to_string(i + 1) + ": unknown station '" +
                                      step.departure + "'");
        if (!arr)
            report.failures.push_back("step " + std::to_string(i + 1) + ": unknown station '" +
                                      step.arrival + "'");
        if (!dep || !arr)
            continue;
        if (i == 0)
            stations.push_back(*dep);
        else if (*dep != prev_arrival)
            report.failures.push_back("step " + std::to_string(i + 1) + ": departs '" + *dep +
                                      "' but the previous step arrived at '" + prev_arrival +
                                      "'");
        stations.push_back(*arr);
        prev_arrival = *arr;

        bool arc_found = false;
        int from = network.station_index(*dep), to = network.station_index(*arr);
        if (from >= 0)
            for (int a : network.out_arcs(from))
                if (network.arc_to(a) == to && network.arcs()[a].line == step.line)
                    arc_found = true;
        if (!arc_found)
            report.failures.push_back("step " + std::to_string(i + 1) + ": no arc '" + *dep +
                                      "' -> '" + *arr + "' on line '" + step.line + "'");
        else
            lines_seen.insert(step.line);
    }

    for (const auto& line : v.required_colors) {
        if (lines_seen.count(line))
            report.covered.push_back(line);
        else
            report.failures.push_back("required line '" + line + "' is not covered");
    }

    bool cyclic = v.shape == Shape::cycle;
    if (cyclic && !journey.steps.empty() && stations.size() >= 2 &&
        stations.front() != stations.back())
        report.failures.push_back("cycle does not close: starts at '" + stations.front() +
                                  "', ends at '" + stations.back() + "'");

    if (v.forbid_station_reuse && !stations.empty()) {
        std::set<StationId> seen;
        for (std::size_t i = 0; i < stations.size(); ++i) {
            bool closing = cyclic && i + 1 == stations.size() && stations[i] == stations[0];
            if (closing)
                continue;
            if (!seen.insert(stations[i]).second)
                report.failures.push_back("station reused: '" + stations[i] + "'");
        }
    }

    if (v.forbid_line_reuse &&
        !journey_has_unique_line_runs(journey, v.required_colors, cyclic))
        report.failures.push_back("a required line is used in more than one run");

    return report;
}

namespace {

Journey report_journey(const std::vector<int>& arcset, const Network& network,
                       const VariantConfig& variant) {
    return reconstruct_walk(arcset, network, variant.shape, variant.anchor);
}

SolveReport make_report(const Network& network, const VariantConfig& variant, Backend backend,
                        std::vector<int> arcset, double seconds) {
    SolveReport report;
    report.variant = variant;
    report.backend = backend;
    report.arcset = std::move(arcset);
    report.objective = static_cast<std::int64_t>(report.arcset.size());
    report.journey = report_journey(report.arcset, network, variant);
    report.solve_seconds = seconds;
    return report;
}

}  // namespace

SolveReport solve_variant(const Network& network, const VariantConfig& variant, Backend backend,
                          const SolverConfig& solver, const OracleLimits& oracle_limits) {
    VariantConfig v = normalize_variant(variant, network);
    auto start = Clock::now();

    if (backend == Backend::oracle) {
        OracleSolveResult r = oracle_solve(network, v, oracle_limits);
        if (!r.feasible) {
            if (!r.proven)
                throw BackendError("oracle budget exhausted before a proof");
            throw Infeasible("no " + to_string(v.shape) + " covers the required lines");
        }
        SolveReport report = make_report(network, v, backend, r.arcset, seconds_since(start));
        return report;
    }

    // MILP backend
    auto run = [&](const IlpModel& model) {
        IlpSolution sol = metrocover::solve(model, solver);
        if (sol.status == SolveStatus::timeout)
            throw BackendError("solver hit the time limit");
        if (sol.status == SolveStatus::solver_error)
            throw BackendError("solver failed");
        return sol;
    };

    if (v.shape == Shape::cycle && !v.anchor) {
        std::optional<SolveReport> best;
        for (const auto& anchor : cycle_anchor_candidates(network, v)) {
            IlpModel model = build_cycle_model(network, v, anchor);
            IlpSolution sol = run(model);
            if (sol.status == SolveStatus::infeasible)
                continue;
            std::vector<int> arcs = extract_arcset(model, sol.rounded);
            if (!best || static_cast<std::int64_t>(arcs.size()) < best->objective)
                best = make_report(network, v, backend, arcs, seconds_since(start));
        }
        if (!best)
            throw Infeasible("no cycle covers the required lines");
        best->solve_seconds = seconds_since(start);
        return *best;
    }

    IlpModel model = v.shape == Shape::cycle ? build_cycle_model(network, v, *v.anchor)
                                             : build_base_model(network, v);
    IlpSolution sol = run(model);
    if (sol.status == SolveStatus::infeasible)
        throw Infeasible("no " + to_string(v.shape) + " covers the required lines");
    return make_report(network, v, backend, extract_arcset(model, sol.rounded),
                       seconds_since(start));
}

EnumerationOutcome enumerate_solutions(const Network& network, const VariantConfig& variant,
                                       Backend backend, const SolverConfig& solver,
                                       const EnumerateLimits& limits) {
    VariantConfig v = normalize_variant(variant, network);
    auto start = Clock::now();
    EnumerationOutcome outcome;
    outcome.stop_reason = "exhausted";

    auto over_limits = [&](std::size_t count) {
        if (static_cast<int>(count) >= limits.max_solutions) {
            outcome.truncated = true;
            outcome.stop_reason = "solution limit";
            return true;
        }
        if (seconds_since(start) > limits.max_seconds) {
            outcome.truncated = true;
            outcome.stop_reason = "time limit";
            return true;
        }
        return false;
    };

    if (backend == Backend::oracle) {
        EnumerationResult r = enumerate_optimal_arcsets(network, v, limits.oracle);
        if (!r.complete) {
            outcome.truncated = true;
            outcome.stop_reason = "oracle budget";
        }
        for (const auto& set : r.arcsets) {
            if (over_limits(outcome.reports.size()))
                break;
            outcome.reports.push_back(
                make_report(network, v, backend, set, seconds_since(start)));
        }
    } else {
        std::set<std::vector<int>> found;
        std::optional<std::int64_t> best_objective;

        auto enumerate_one_model = [&](IlpModel model) {
            for (const auto& set : found)
                model = add_nogood_cut(std::move(model), set);
            for (;;) {
                if (over_limits(found.size()))
                    return;
                IlpSolution sol = metrocover::solve(model, solver);
                if (sol.status == SolveStatus::infeasible)
                    return;
                if (sol.status != SolveStatus::optimal) {
                    outcome.truncated = true;
                    outcome.stop_reason = "solver " + to_string(sol.status);
                    return;
                }
                if (best_objective && sol.objective > *best_objective)
                    return;  // strictly worse: this model is exhausted
                if (!best_objective)
                    best_objective = sol.objective;
                std::vector<int> arcs = extract_arcset(model, sol.rounded);
                found.insert(arcs);
                model = add_nogood_cut(std::move(model), arcs);
            }
        };

        if (v.shape == Shape::cycle && !v.anchor) {
            // cheapest anchor first so the global optimum is known before the
            // full per-anchor sweeps
            std::vector<StationId> anchors = cycle_anchor_candidates(network, v);
            std::vector<std::pair<std::int64_t, StationId>> scored;
            for (const auto& anchor : anchors) {
                IlpModel model = build_cycle_model(network, v, anchor);
                IlpSolution sol = metrocover::solve(model, solver);
                if (sol.status == SolveStatus::infeasible)
                    continue;
                if (sol.status != SolveStatus::optimal) {
                    outcome.truncated = true;
                    outcome.stop_reason = "solver " + to_string(sol.status);
                    continue;
                }
                scored.emplace_back(sol.objective, anchor);
            }
            std::sort(scored.begin(), scored.end());
            if (!scored.empty())
                best_objective = scored.front().first;
            for (const auto& [objective, anchor] : scored) {
                if (objective > *best_objective)
                    break;
                enumerate_one_model(build_cycle_model(network, v, anchor));
                if (outcome.truncated)
                    break;
            }
        } else {
            IlpModel model = v.shape == Shape::cycle ? build_cycle_model(network, v, *v.anchor)
                                                     : build_base_model(network, v);
            enumerate_one_model(std::move(model));
        }

        for (const auto& set : found)
            outcome.reports.push_back(make_report(network, v, backend, set, 0.0));
    }

    // deterministic order: by arc set; all share the optimal objective
    std::sort(outcome.reports.begin(), outcome.reports.end(),
              [](const SolveReport& a, const SolveReport& b) { return a.arcset < b.arcset; });
    double total = seconds_since(start);
    for (std::size_t i = 0; i < outcome.reports.size(); ++i) {
        outcome.reports[i].enumeration_index = static_cast<int>(i) + 1;
        outcome.reports[i].solve_seconds = total;
    }
    return outcome;
}

std::string export_table(const Journey& journey) {
    std::vector<std::array<std::string, 4>> rows;
    rows.push_back({"Step", "Departure", "Arrival", "Line"});
    for (std::size_t i = 0; i < journey.steps.size(); ++i)
        rows.push_back({std::to_string(i + 1), journey.steps[i].departure,
                        journey.steps[i].arrival, journey.steps[i].line});
    std::array<std::size_t, 4> width{};
    for (const auto& row : rows)
        for (int c = 0; c < 4; ++c)
            width[c] = std::max(width[c], row[c].size());

    std::ostringstream out;
    for (const auto& row : rows) {
        for (int c = 0; c < 4; ++c) {
            out << row[c];
            if (c < 3)
                out << std::string(width[c] - row[c].size() + 2, ' ');
        }
        out << "\n";
    }
    return out.str();
}

std::string export_tsv(const Journey& journey) {
    std::ostringstream out;
    for (std::size_t i = 0; i < journey.steps.size(); ++i)
        out << (i + 1) << "\t" << journey.steps[i].departure << "\t" << journey.steps[i].arrival
            << "\t" << journey.steps[i].line << "\n";
    return out.str();
}

Journey parse_journey_tsv(const std::string& text) {
    Journey journey;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;
        std::vector<std::string> fields;
        std::size_t pos = 0;
        while (true) {
            std::size_t tab = line.find('\t', pos);
            if (tab == std::string::npos) {
                fields.push_back(line.substr(pos));
                break;
            }
            fields.push_back(line.substr(pos, tab - pos));
            pos = tab + 1;
        }
        if (fields.size() == 4 && fields[0] == "Step")
            continue;  // header row
        if (fields.size() != 4)
            throw ParseError("journey rows need 4 tab-separated fields "
                             "(step, departure, arrival, line)",
                             line_no);
        journey.steps.push_back(JourneyStep{fields[1], fields[2], fields[3]});
    }
    return journey;
}

std::string export_geojson(const Journey& journey, const Network& network) {
    using json = nlohmann::ordered_json;

    std::vector<StationId> missing;
    auto coords = [&](const StationId& name) -> std::optional<GeoPoint> {
        auto canonical = network.resolve_station(name);
        if (!canonical)
            return std::nullopt;
        auto it = network.coordinates().find(*canonical);
        if (it == network.coordinates().end())
            return std::nullopt;
        return it->second;
    };
    for (const auto& step : journey.steps) {
        for (const auto* name : {&step.departure, &step.arrival})
            if (!coords(*name) &&
                std::find(missing.begin(), missing.end(), *name) == missing.end())
                missing.push_back(*name);
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& name : missing)
            list += (list.empty() ? "" : ", ") + name;
        throw std::invalid_argument("stations without coordinates: " + list);
    }

    json features = json::array();
    for (std::size_t i = 0; i < journey.steps.size(); ++i) {
        const auto& step = journey.steps[i];
        GeoPoint a = *coords(step.departure), b = *coords(step.arrival);
        features.push_back(json{
            {"type", "Feature"},
            {"geometry", {{"type", "LineString"},
                          {"coordinates", {{a.lon, a.lat}, {b.lon, b.lat}}}}},
            {"properties", {{"step", i + 1},
                            {"line", step.line},
                            {"departure", step.departure},
                            {"arrival", step.arrival}}}});
    }
    if (!journey.steps.empty()) {
        GeoPoint s = *coords(journey.steps.front().departure);
        GeoPoint e = *coords(journey.steps.back().arrival);
        features.push_back(json{{"type", "Feature"},
                                {"geometry", {{"type", "Point"}, {"coordinates", {s.lon, s.lat}}}},
                                {"properties", {{"role", "start"},
                                                {"station", journey.steps.front().departure}}}});
        features.push_back(json{{"type", "Feature"},
                                {"geometry", {{"type", "Point"}, {"coordinates", {e.lon, e.lat}}}},
                                {"properties", {{"role", "end"},
                                                {"station", journey.steps.back().arrival}}}});
    }
    json doc{{"type", "FeatureCollection"}, {"features", features}};
    return doc.dump(2) + "\n";
}

}  // namespace metrocover
