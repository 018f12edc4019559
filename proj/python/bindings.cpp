#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "metrocover/ingest.hpp"
#include "metrocover/milp_backend.hpp"
#include "metrocover/network.hpp"
#include "metrocover/oracle.hpp"
#include "metrocover/solution.hpp"

namespace py = pybind11;
using namespace metrocover;

namespace {

VariantConfig variant_from_args(const Network& network, const std::string& shape,
                                const std::optional<std::vector<std::string>>& require,
                                bool no_station_reuse, bool no_line_reuse,
                                const std::optional<std::string>& anchor) {
    VariantConfig v;
    v.shape = shape == "path" ? Shape::path : shape == "cycle" ? Shape::cycle : Shape::walk;
    if (shape != "walk" && shape != "path" && shape != "cycle")
        throw std::invalid_argument("shape must be walk, path or cycle");
    v.required_colors = require ? *require : network.lines();
    v.forbid_station_reuse = no_station_reuse;
    v.forbid_line_reuse = no_line_reuse;
    if (anchor)
        v.anchor = *anchor;
    return normalize_variant(v, network);
}

SolverConfig solver_from_args(const std::optional<std::string>& solver_cmd, double time_limit) {
    SolverConfig config;
    config.command_template = solver_cmd ? *solver_cmd : default_solver_command();
    config.time_limit_s = time_limit;
    return config;
}

Backend backend_from_args(const std::string& name, const Network& network,
                          const VariantConfig& v) {
    if (name == "oracle")
        return Backend::oracle;
    if (name == "milp")
        return Backend::milp;
    if (name != "auto")
        throw std::invalid_argument("backend must be auto, oracle or milp");
    if ((v.shape == Shape::walk || v.shape == Shape::cycle) && !v.forbid_station_reuse &&
        !v.forbid_line_reuse && v.required_colors.size() <= 26 &&
        (static_cast<std::uint64_t>(network.stations().size())
         << v.required_colors.size()) <= (2ull << 30))
        return Backend::oracle;
    return Backend::milp;
}

py::list journey_to_list(const Journey& journey) {
    py::list steps;
    for (const auto& s : journey.steps)
        steps.append(py::make_tuple(s.departure, s.arrival, s.line));
    return steps;
}

Journey journey_from_list(const py::sequence& steps) {
    Journey j;
    for (auto item : steps) {
        auto t = item.cast<py::sequence>();
        if (py::len(t) != 3)
            throw std::invalid_argument("each step is (departure, arrival, line)");
        j.steps.push_back(JourneyStep{t[0].cast<std::string>(), t[1].cast<std::string>(),
                                      t[2].cast<std::string>()});
    }
    return j;
}

py::dict report_to_dict(const SolveReport& report) {
    py::dict d;
    d["objective"] = report.objective;
    d["backend"] = to_string(report.backend);
    d["shape"] = to_string(report.variant.shape);
    d["steps"] = journey_to_list(report.journey);
    d["solve_seconds"] = report.solve_seconds;
    if (report.enumeration_index)
        d["index"] = *report.enumeration_index;
    return d;
}

}  // namespace

PYBIND11_MODULE(_metrocover, m) {
    m.doc() = "exact line-covering journey search on transit networks";

    py::class_<Network>(m, "Network")
        .def_property_readonly("stations", &Network::stations)
        .def_property_readonly("lines", &Network::lines)
        .def_property_readonly("arc_count",
                               [](const Network& n) { return n.arcs().size(); })
        .def("resolve_station", &Network::resolve_station)
        .def("__repr__", [](const Network& n) {
            return "<Network " + std::to_string(n.stations().size()) + " stations, " +
                   std::to_string(n.lines().size()) + " lines, " +
                   std::to_string(n.arcs().size()) + " arcs>";
        });

    m.def("parse_network", [](const std::string& text) {
        return build_network(parse_network_file(text));
    }, py::arg("text"), "build a network from file-format text");

    m.def("load_network", [](const std::string& path) {
        return build_network(load_network_file(path));
    }, py::arg("path"), "build a network from a file");

    m.def("canonical_text", &canonical_serialize, py::arg("network"),
          "deterministic file-format text for the network");

    m.def("prune", [](const Network& network) {
        PruneResult r = prune_termini(network);
        return py::make_tuple(r.network,
                              std::vector<std::string>(r.removed.begin(), r.removed.end()));
    }, py::arg("network"), "recursively remove single-neighbour termini");

    m.def("solve",
          [](const Network& network, const std::string& shape,
             const std::optional<std::vector<std::string>>& require, bool no_station_reuse,
             bool no_line_reuse, const std::optional<std::string>& anchor,
             const std::string& backend, const std::optional<std::string>& solver_cmd,
             double time_limit) {
              VariantConfig v = variant_from_args(network, shape, require, no_station_reuse,
                                                  no_line_reuse, anchor);
              SolveReport report = solve_variant(network, v, backend_from_args(backend, network, v),
                                                 solver_from_args(solver_cmd, time_limit));
              return report_to_dict(report);
          },
          py::arg("network"), py::arg("shape") = "walk", py::arg("require") = std::nullopt,
          py::arg("no_station_reuse") = false, py::arg("no_line_reuse") = false,
          py::arg("anchor") = std::nullopt, py::arg("backend") = "auto",
          py::arg("solver_cmd") = std::nullopt, py::arg("time_limit") = 600.0,
          "find one optimal journey; raises RuntimeError when infeasible");

    m.def("enumerate_solutions",
          [](const Network& network, const std::string& shape,
             const std::optional<std::vector<std::string>>& require, bool no_station_reuse,
             bool no_line_reuse, const std::optional<std::string>& anchor,
             const std::string& backend, const std::optional<std::string>& solver_cmd,
             double time_limit, int max_solutions, double max_seconds) {
              VariantConfig v = variant_from_args(network, shape, require, no_station_reuse,
                                                  no_line_reuse, anchor);
              EnumerateLimits limits;
              limits.max_solutions = max_solutions;
              limits.max_seconds = max_seconds;
              EnumerationOutcome outcome = enumerate_solutions(
                  network, v, backend_from_args(backend, network, v),
                  solver_from_args(solver_cmd, time_limit), limits);
              py::dict d;
              py::list reports;
              for (const auto& r : outcome.reports)
                  reports.append(report_to_dict(r));
              d["solutions"] = reports;
              d["truncated"] = outcome.truncated;
              d["stop_reason"] = outcome.stop_reason;
              return d;
          },
          py::arg("network"), py::arg("shape") = "walk", py::arg("require") = std::nullopt,
          py::arg("no_station_reuse") = false, py::arg("no_line_reuse") = false,
          py::arg("anchor") = std::nullopt, py::arg("backend") = "auto",
          py::arg("solver_cmd") = std::nullopt, py::arg("time_limit") = 600.0,
          py::arg("max_solutions") = 1000000, py::arg("max_seconds") = 86400.0,
          "list every optimal journey");

    m.def("validate",
          [](const Network& network, const py::sequence& steps, const std::string& shape,
             const std::optional<std::vector<std::string>>& require, bool no_station_reuse,
             bool no_line_reuse, const std::optional<std::string>& anchor) {
              VariantConfig v = variant_from_args(network, shape, require, no_station_reuse,
                                                  no_line_reuse, anchor);
              ValidationReport report = validate_journey(journey_from_list(steps), network, v);
              return report.failures;
          },
          py::arg("network"), py::arg("steps"), py::arg("shape") = "walk",
          py::arg("require") = std::nullopt, py::arg("no_station_reuse") = false,
          py::arg("no_line_reuse") = false, py::arg("anchor") = std::nullopt,
          "check a journey; returns the list of failures (empty = valid)");

    m.def("export_geojson",
          [](const Network& network, const py::sequence& steps) {
              return export_geojson(journey_from_list(steps), network);
          },
          py::arg("network"), py::arg("steps"));

    m.def("export_table",
          [](const py::sequence& steps) { return export_table(journey_from_list(steps)); },
          py::arg("steps"));

    py::register_exception<Infeasible>(m, "InfeasibleError");
    py::register_exception<BackendError>(m, "SolverBackendError");
}
