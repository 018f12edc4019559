#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "metrocover/ingest.hpp"
#include "metrocover/milp_backend.hpp"
#include "metrocover/network.hpp"
#include "metrocover/oracle.hpp"
#include "metrocover/solution.hpp"

namespace {

using namespace metrocover;

struct CommonArgs {
    std::string network_path;
    std::string variant_shape = "walk";
    std::string require_lines = "all";
    bool no_station_reuse = false;
    bool no_line_reuse = false;
    std::string anchor;
    std::string backend = "auto";
    std::string solver_cmd;
    std::string solver_config_path;
    double time_limit = 600.0;
    int threads = 1;
    double oracle_memory_gb = 2.0;
    std::string format = "table";
    std::string journey_path;
    int max_solutions = 1000000;
    double max_seconds = 86400.0;
};

void add_network_option(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--network", args.network_path, "network description file")->required();
}

void add_variant_options(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--variant", args.variant_shape, "walk, path or cycle")
        ->check(CLI::IsMember({"walk", "path", "cycle"}));
    cmd->add_option("--require-lines", args.require_lines,
                    "comma-separated line ids, or 'all'");
    cmd->add_flag("--no-station-reuse", args.no_station_reuse,
                  "forbid visiting a station twice");
    cmd->add_flag("--no-line-reuse", args.no_line_reuse,
                  "force each required line into one contiguous run");
    cmd->add_option("--anchor", args.anchor, "cycle start station");
}

void add_backend_options(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--backend", args.backend, "auto, oracle or milp")
        ->check(CLI::IsMember({"auto", "oracle", "milp"}));
    cmd->add_option("--solver-cmd", args.solver_cmd,
                    "solver command template with {model} and {solution}");
    cmd->add_option("--config", args.solver_config_path, "JSON file with solver settings");
    cmd->add_option("--time-limit", args.time_limit, "solver time limit in seconds");
    cmd->add_option("--threads", args.threads, "solver threads");
    cmd->add_option("--oracle-memory-gb", args.oracle_memory_gb,
                    "memory budget for the search backend");
}

VariantConfig make_variant(const CommonArgs& args, const Network& network) {
    VariantConfig v;
    v.shape = args.variant_shape == "path"    ? Shape::path
              : args.variant_shape == "cycle" ? Shape::cycle
                                              : Shape::walk;
    if (args.require_lines == "all") {
        v.required_colors = network.lines();
    } else {
        std::string token;
        std::istringstream in(args.require_lines);
        while (std::getline(in, token, ','))
            if (!token.empty())
                v.required_colors.push_back(token);
    }
    v.forbid_station_reuse = args.no_station_reuse;
    v.forbid_line_reuse = args.no_line_reuse;
    if (!args.anchor.empty())
        v.anchor = args.anchor;
    return normalize_variant(v, network);
}

SolverConfig make_solver(const CommonArgs& args) {
    SolverConfig config;
    if (!args.solver_config_path.empty()) {
        std::ifstream in(args.solver_config_path);
        if (!in)
            throw std::invalid_argument("cannot open solver config: " + args.solver_config_path);
        nlohmann::json doc = nlohmann::json::parse(in);
        config.command_template = doc.value("command", "");
        config.time_limit_s = doc.value("time_limit_s", config.time_limit_s);
        config.threads = doc.value("threads", config.threads);
        config.workdir = doc.value("workdir", config.workdir);
    }
    if (!args.solver_cmd.empty())
        config.command_template = args.solver_cmd;
    if (config.command_template.empty())
        config.command_template = default_solver_command();
    config.time_limit_s = args.time_limit;
    config.threads = args.threads;
    return config;
}

OracleLimits make_oracle_limits(const CommonArgs& args) {
    OracleLimits limits;
    limits.memory_budget_bytes =
        static_cast<std::uint64_t>(args.oracle_memory_gb * (1ull << 30));
    return limits;
}

Backend pick_backend(const CommonArgs& args, const Network& network, const VariantConfig& v) {
    if (args.backend == "oracle")
        return Backend::oracle;
    if (args.backend == "milp")
        return Backend::milp;
    // plain walk/cycle fit the search backend when the state table fits
    if ((v.shape == Shape::walk || v.shape == Shape::cycle) && !v.forbid_station_reuse &&
        !v.forbid_line_reuse) {
        std::uint64_t states = static_cast<std::uint64_t>(network.stations().size())
                               << std::min<std::size_t>(v.required_colors.size(), 63);
        if (v.required_colors.size() <= 26 &&
            states <= make_oracle_limits(args).memory_budget_bytes)
            return Backend::oracle;
    }
    return Backend::milp;
}

void print_report(const SolveReport& report, const Network& network, const std::string& format) {
    if (format == "tsv") {
        std::cout << export_tsv(report.journey);
    } else if (format == "geojson") {
        std::cout << export_geojson(report.journey, network);
    } else {
        std::cout << "objective: " << report.objective << "\n"
                  << "shape: " << to_string(report.variant.shape) << "\n"
                  << "backend: " << to_string(report.backend) << "\n"
                  << "required lines: " << report.variant.required_colors.size() << "\n\n"
                  << export_table(report.journey);
    }
    std::cerr << "solve time: " << report.solve_seconds << "s\n";
}

int run_solve(const CommonArgs& args) {
    Network network = build_network(load_network_file(args.network_path));
    VariantConfig variant = make_variant(args, network);
    Backend backend = pick_backend(args, network, variant);
    SolveReport report =
        solve_variant(network, variant, backend, make_solver(args), make_oracle_limits(args));
    print_report(report, network, args.format);
    return 0;
}

int run_enumerate(const CommonArgs& args) {
    Network network = build_network(load_network_file(args.network_path));
    VariantConfig variant = make_variant(args, network);
    Backend backend = pick_backend(args, network, variant);
    EnumerateLimits limits;
    limits.max_solutions = args.max_solutions;
    limits.max_seconds = args.max_seconds;
    limits.oracle = make_oracle_limits(args);
    EnumerationOutcome outcome =
        enumerate_solutions(network, variant, backend, make_solver(args), limits);

    for (const auto& report : outcome.reports) {
        std::cout << "solution " << *report.enumeration_index << ": objective "
                  << report.objective << "\n";
        if (args.format == "tsv")
            std::cout << export_tsv(report.journey);
        else
            std::cout << export_table(report.journey);
        std::cout << "\n";
    }
    std::cout << "solutions: " << outcome.reports.size() << "\n"
              << "stop: " << outcome.stop_reason << "\n";
    if (outcome.truncated)
        std::cout << "truncated: yes\n";
    if (outcome.reports.empty())
        return 1;
    return 0;
}

int run_validate(const CommonArgs& args) {
    Network network = build_network(load_network_file(args.network_path));
    VariantConfig variant = make_variant(args, network);
    std::ifstream in(args.journey_path);
    if (!in)
        throw std::invalid_argument("cannot open journey file: " + args.journey_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    Journey journey = parse_journey_tsv(buf.str());
    ValidationReport report = validate_journey(journey, network, variant);
    if (report.ok()) {
        std::cout << "valid: " << journey.length() << " steps, " << report.covered.size()
                  << " required lines covered\n";
        return 0;
    }
    std::cout << "invalid: " << report.failures.size() << " problem(s)\n";
    for (const auto& f : report.failures)
        std::cout << "  " << f << "\n";
    return 1;
}

int run_export(const CommonArgs& args) {
    Network network = build_network(load_network_file(args.network_path));
    std::ifstream in(args.journey_path);
    if (!in)
        throw std::invalid_argument("cannot open journey file: " + args.journey_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    Journey journey = parse_journey_tsv(buf.str());
    if (args.format == "geojson")
        std::cout << export_geojson(journey, network);
    else if (args.format == "tsv")
        std::cout << export_tsv(journey);
    else
        std::cout << export_table(journey);
    return 0;
}

int run_prune(const CommonArgs& args) {
    Network network = build_network(load_network_file(args.network_path));
    PruneResult result = prune_termini(network);
    std::cout << "# pruned: removed " << result.removed.size() << " of "
              << network.stations().size() << " stations\n";
    for (const auto& s : result.removed)
        std::cout << "# removed: " << s << "\n";
    std::cout << canonical_serialize(result.network);
    return 0;
}

int run_info(const CommonArgs& args) {
    Network network = build_network(load_network_file(args.network_path));
    std::size_t merged_members = 0;
    for (const auto& [canonical, members] : network.merged_names())
        merged_members += members.size();
    std::cout << "stations: " << network.stations().size() << "\n"
              << "lines: " << network.lines().size() << "\n"
              << "arcs: " << network.arcs().size() << "\n"
              << "corridor groups: " << network.merged_names().size() << "\n"
              << "merged station names: " << merged_members << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"shortest line-covering journeys on transit networks"};
    app.require_subcommand(1);
    CommonArgs args;

    CLI::App* solve = app.add_subcommand("solve", "find one optimal journey");
    add_network_option(solve, args);
    add_variant_options(solve, args);
    add_backend_options(solve, args);
    solve->add_option("--format", args.format, "table, tsv or geojson")
        ->check(CLI::IsMember({"table", "tsv", "geojson"}));

    CLI::App* enumerate = app.add_subcommand("enumerate", "list every optimal journey");
    add_network_option(enumerate, args);
    add_variant_options(enumerate, args);
    add_backend_options(enumerate, args);
    enumerate->add_option("--format", args.format, "table or tsv")
        ->check(CLI::IsMember({"table", "tsv"}));
    enumerate->add_option("--max-solutions", args.max_solutions, "stop after this many");
    enumerate->add_option("--max-seconds", args.max_seconds, "wall-clock budget");

    CLI::App* validate = app.add_subcommand("validate", "check a journey file");
    add_network_option(validate, args);
    add_variant_options(validate, args);
    validate->add_option("--journey", args.journey_path, "journey file (tsv)")->required();

    CLI::App* exporter = app.add_subcommand("export", "re-format a journey file");
    add_network_option(exporter, args);
    exporter->add_option("--journey", args.journey_path, "journey file (tsv)")->required();
    exporter->add_option("--format", args.format, "table, tsv or geojson")
        ->check(CLI::IsMember({"table", "tsv", "geojson"}));

    CLI::App* prune = app.add_subcommand("prune", "apply terminus pruning and print the result");
    add_network_option(prune, args);

    CLI::App* info = app.add_subcommand("info", "print network counts");
    add_network_option(info, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (solve->parsed())
            return run_solve(args);
        if (enumerate->parsed())
            return run_enumerate(args);
        if (validate->parsed())
            return run_validate(args);
        if (exporter->parsed())
            return run_export(args);
        if (prune->parsed())
            return run_prune(args);
        if (info->parsed())
            return run_info(args);
    } catch (const Infeasible& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 1;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const BackendError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return 3;
    } catch (const OracleBudgetError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
