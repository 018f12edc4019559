#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "metrocover/formulation.hpp"

namespace metrocover {

// External solver invocation. The template names an executable plus
// arguments; {model} and {solution} must appear exactly once each and are
// replaced by the LP file path and the expected solution file path. The
// time limit and thread count are exported to the child process as
// METROCOVER_TIME_LIMIT / METROCOVER_THREADS; the process is killed a grace
// period after the limit regardless.
struct SolverConfig {
    std::string command_template;
    double time_limit_s = 600.0;
    int threads = 1;
    std::string workdir;  // empty: a fresh temp directory per solve
    bool keep_files = false;
};

enum class SolveStatus { optimal, feasible, infeasible, timeout, solver_error };

std::string to_string(SolveStatus status);

struct IlpSolution {
    SolveStatus status = SolveStatus::solver_error;
    std::int64_t objective = 0;
    // raw values aligned with model.vars; absent variables default to 0
    std::vector<double> values;
    // values rounded to integers (tolerance 1e-6); empty when no assignment
    std::vector<std::int64_t> rounded;
};

class BackendError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Reads a solver solution file. Dialects are auto-detected: CBC-style
// ("Optimal - objective value N" then indexed rows), GLPK glpsol print
// output (Status/Objective header plus a column activity table), or the
// generic fallback ("status <word>", "objective <n>", then "name value"
// lines, zeros omitted).
IlpSolution parse_solver_output(const std::string& text, const IlpModel& model);

// Serialises the model, runs the configured solver process on it, parses
// the solution file and re-checks every constraint in exact integer
// arithmetic. Throws BackendError on spawn failure, nonzero exit,
// unparsable output, or a failed re-check.
IlpSolution solve(const IlpModel& model, const SolverConfig& config);

// nullopt when the rounded assignment satisfies all rows, cuts and bounds;
// otherwise a description of the first violation.
std::optional<std::string> verify_assignment(const IlpModel& model,
                                             const std::vector<std::int64_t>& rounded);

// Network arc indexes whose x variable is 1.
std::vector<int> extract_arcset(const IlpModel& model, const std::vector<std::int64_t>& rounded);

// Default solver command: the METROCOVER_SOLVER environment variable, else
// a bundled solve_lp.py found near the executable or the working directory.
std::string default_solver_command();

}  // namespace metrocover
