#include "metrocover/milp_backend.hpp"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>

extern char** environ;

namespace metrocover {

namespace fs = std::filesystem;

std::string to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::feasible: return "feasible";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::timeout: return "timeout";
        case SolveStatus::solver_error: return "solver_error";
    }
    return "?";
}

namespace {

constexpr double kIntegralityTolerance = 1e-6;

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok)
        out.push_back(tok);
    return out;
}

bool parse_value(const std::string& tok, double& out) {
    try {
        std::size_t used = 0;
        out = std::stod(tok, &used);
        return used == tok.size() && std::isfinite(out);
    } catch (const std::exception&) {
        return false;
    }
}

SolveStatus map_status_token(const std::string& token) {
    std::string t;
    for (char c : token)
        t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (t == "optimal" || t == "integer_optimal")
        return SolveStatus::optimal;
    if (t == "feasible")
        return SolveStatus::feasible;
    if (t == "infeasible")
        return SolveStatus::infeasible;
    if (t == "timeout" || t == "time_limit" || t == "stopped")
        return SolveStatus::timeout;
    if (t == "solver_error" || t == "unbounded" || t == "error" || t == "unknown")
        return SolveStatus::solver_error;
    throw BackendError("unknown status token: " + token);
}

struct NameResolver {
    std::unordered_map<std::string, int> index;
    explicit NameResolver(const IlpModel& model) {
        index.reserve(model.vars.size() * 2);
        for (std::size_t i = 0; i < model.vars.size(); ++i)
            index[model.vars[i].name] = static_cast<int>(i);
    }
    int resolve(const std::string& name) const {
        auto it = index.find(name);
        if (it == index.end())
            throw BackendError("variable not in catalog: " + name);
        return it->second;
    }
};

IlpSolution parse_generic(const std::vector<std::string>& lines, const IlpModel& model) {
    IlpSolution sol;
    sol.values.assign(model.vars.size(), 0.0);
    NameResolver names(model);
    bool have_status = false;
    bool have_objective = false;
    double objective = 0;
    for (const auto& line : lines) {
        auto tok = split_ws(line);
        if (tok.empty() || tok[0][0] == '#')
            continue;
        if (tok[0] == "status" && tok.size() == 2) {
            sol.status = map_status_token(tok[1]);
            have_status = true;
        } else if (tok[0] == "objective" && tok.size() == 2) {
            if (!parse_value(tok[1], objective))
                throw BackendError("bad objective value: " + tok[1]);
            have_objective = true;
        } else if (tok.size() == 2) {
            double v = 0;
            if (!parse_value(tok[1], v))
                throw BackendError("bad value for " + tok[0] + ": " + tok[1]);
            sol.values[names.resolve(tok[0])] = v;
        } else {
            throw BackendError("unparsable solution line: " + line);
        }
    }
    if (!have_status)
        throw BackendError("solution file has no status line");
    if (have_objective)
        sol.objective = static_cast<std::int64_t>(std::llround(objective));
    return sol;
}

IlpSolution parse_cbc(const std::vector<std::string>& lines, const IlpModel& model) {
    IlpSolution sol;
    sol.values.assign(model.vars.size(), 0.0);
    NameResolver names(model);

    auto header = split_ws(lines.front());
    const std::string& word = header[0];
    if (word == "Optimal")
        sol.status = SolveStatus::optimal;
    else if (word == "Infeasible" || word == "Integer" /* "Integer infeasible" */)
        sol.status = SolveStatus::infeasible;
    else if (word == "Unbounded")
        sol.status = SolveStatus::solver_error;
    else if (word == "Stopped")
        sol.status = SolveStatus::timeout;
    else
        throw BackendError("unknown status token: " + word);
    for (std::size_t i = 0; i + 1 < header.size(); ++i)
        if (header[i] == "value") {
            double obj = 0;
            if (parse_value(header[i + 1], obj))
                sol.objective = static_cast<std::int64_t>(std::llround(obj));
        }

    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto tok = split_ws(lines[i]);
        if (tok.empty())
            continue;
        // "<index> <name> <value> [<reduced cost>]"; a leading ** marks
        // an infeasible row in some CBC builds
        std::size_t base = (tok[0] == "**") ? 1 : 0;
        if (tok.size() < base + 3)
            throw BackendError("unparsable solution line: " + lines[i]);
        double v = 0;
        if (!parse_value(tok[base + 2], v))
            throw BackendError("bad value for " + tok[base + 1] + ": " + tok[base + 2]);
        sol.values[names.resolve(tok[base + 1])] = v;
    }
    return sol;
}

IlpSolution parse_glpsol(const std::vector<std::string>& lines, const IlpModel& model) {
    IlpSolution sol;
    sol.values.assign(model.vars.size(), 0.0);
    NameResolver names(model);

    bool have_status = false;
    std::size_t i = 0;
    for (; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        if (line.rfind("Status:", 0) == 0) {
            std::string rest = line.substr(7);
            auto tok = split_ws(rest);
            std::string status;
            for (const auto& t : tok)
                status += (status.empty() ? "" : " ") + t;
            if (status == "INTEGER OPTIMAL" || status == "OPTIMAL")
                sol.status = SolveStatus::optimal;
            else if (status == "INTEGER NON-OPTIMAL" || status == "FEASIBLE")
                sol.status = SolveStatus::feasible;
            else if (status == "INTEGER EMPTY" || status == "INFEASIBLE (FINAL)" ||
                     status == "PRIMAL INFEASIBLE")
                sol.status = SolveStatus::infeasible;
            else if (status == "INTEGER UNDEFINED" || status == "UNDEFINED")
                sol.status = SolveStatus::solver_error;
            else
                throw BackendError("unknown status token: " + status);
            have_status = true;
        } else if (line.rfind("Objective:", 0) == 0) {
            // "Objective:  obj = 26 (MINimum)"
            auto tok = split_ws(line);
            for (std::size_t j = 0; j + 1 < tok.size(); ++j)
                if (tok[j] == "=") {
                    double obj = 0;
                    if (parse_value(tok[j + 1], obj))
                        sol.objective = static_cast<std::int64_t>(std::llround(obj));
                }
        } else if (line.find("Column name") != std::string::npos) {
            break;
        }
    }
    if (!have_status)
        throw BackendError("solution file has no status line");
    if (i == lines.size())
        return sol;

    i += 2;  // separator row of dashes
    for (; i < lines.size(); ++i) {
        auto tok = split_ws(lines[i]);
        if (tok.empty())
            break;
        if (tok.size() == 2 && tok[1][0] != '*') {
            // long names overflow: "<no.> <name>" with the numbers on the
            // following line
            if (i + 1 >= lines.size())
                throw BackendError("unparsable solution line: " + lines[i]);
            auto next = split_ws(lines[++i]);
            if (next.empty())
                throw BackendError("unparsable solution line: " + lines[i]);
            std::size_t base = next[0] == "*" ? 1 : 0;
            double v = 0;
            if (next.size() <= base || !parse_value(next[base], v))
                throw BackendError("bad value for " + tok[1]);
            sol.values[names.resolve(tok[1])] = v;
            continue;
        }
        if (tok.size() < 3)
            throw BackendError("unparsable solution line: " + lines[i]);
        std::size_t vi = tok[2] == "*" ? 3 : 2;
        double v = 0;
        if (tok.size() <= vi || !parse_value(tok[vi], v))
            throw BackendError("bad value for " + tok[1]);
        sol.values[names.resolve(tok[1])] = v;
    }
    return sol;
}

}  // namespace

IlpSolution parse_solver_output(const std::string& text, const IlpModel& model) {
    std::vector<std::string> lines;
    {
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
                line.pop_back();
            lines.push_back(line);
        }
        while (!lines.empty() && split_ws(lines.front()).empty())
            lines.erase(lines.begin());
    }
    if (lines.empty())
        throw BackendError("empty solution file");

    IlpSolution sol;
    auto first = split_ws(lines.front());
    bool glpsol = false;
    for (const auto& line : lines)
        if (line.rfind("Status:", 0) == 0 || line.rfind("Problem:", 0) == 0)
            glpsol = true;
    if (glpsol)
        sol = parse_glpsol(lines, model);
    else if (first[0] == "Optimal" || first[0] == "Infeasible" || first[0] == "Unbounded" ||
             first[0] == "Stopped" || first[0] == "Integer")
        sol = parse_cbc(lines, model);
    else
        sol = parse_generic(lines, model);

    if (sol.status != SolveStatus::optimal && sol.status != SolveStatus::feasible) {
        sol.values.clear();
        sol.rounded.clear();
        return sol;
    }

    sol.rounded.resize(sol.values.size());
    for (std::size_t i = 0; i < sol.values.size(); ++i)
        sol.rounded[i] = static_cast<std::int64_t>(std::llround(sol.values[i]));
    return sol;
}

std::optional<std::string> verify_assignment(const IlpModel& model,
                                             const std::vector<std::int64_t>& rounded) {
    if (rounded.size() != model.vars.size())
        return "assignment size does not match the variable catalog";
    for (std::size_t i = 0; i < model.vars.size(); ++i) {
        const IlpVar& v = model.vars[i];
        std::int64_t val = rounded[i];
        if (val < 0)
            return "negative value for " + v.name;
        std::int64_t upper =
            v.kind == IlpVar::Kind::binary ? 1 : v.upper.value_or(INT64_MAX);
        if (v.upper && v.kind == IlpVar::Kind::binary)
            upper = std::min<std::int64_t>(1, *v.upper);
        if (val > upper)
            return "value above upper bound for " + v.name;
    }
    auto check = [&](const IlpConstraint& c) -> std::optional<std::string> {
        std::int64_t lhs = 0;
        for (const auto& t : c.terms)
            lhs += t.coef * rounded[t.var];
        bool ok = c.sense == IlpConstraint::Sense::le   ? lhs <= c.rhs
                  : c.sense == IlpConstraint::Sense::ge ? lhs >= c.rhs
                                                        : lhs == c.rhs;
        if (!ok)
            return "constraint violated: " + c.name;
        return std::nullopt;
    };
    for (const auto& c : model.rows)
        if (auto err = check(c))
            return err;
    for (const auto& c : model.cuts)
        if (auto err = check(c))
            return err;
    return std::nullopt;
}

std::vector<int> extract_arcset(const IlpModel& model, const std::vector<std::int64_t>& rounded) {
    std::vector<int> arcs;
    for (const auto& arc : model.arcs)
        if (arc.net_arc >= 0 && rounded[arc.x_var] >= 1)
            arcs.push_back(arc.net_arc);
    std::sort(arcs.begin(), arcs.end());
    return arcs;
}

namespace {

std::vector<std::string> substitute_template(const std::string& command_template,
                                             const std::string& model_path,
                                             const std::string& solution_path) {
    auto tokens = split_ws(command_template);
    if (tokens.empty())
        throw BackendError("empty solver command template");
    int model_seen = 0, solution_seen = 0;
    for (auto& t : tokens) {
        if (t == "{model}") {
            t = model_path;
            ++model_seen;
        } else if (t == "{solution}") {
            t = solution_path;
            ++solution_seen;
        }
    }
    if (model_seen != 1 || solution_seen != 1)
        throw BackendError(
            "solver command template must contain {model} and {solution} exactly once: " +
            command_template);
    return tokens;
}

}  // namespace

IlpSolution solve(const IlpModel& model, const SolverConfig& config) {
    if (config.command_template.empty())
        throw BackendError(
            "no solver configured; set METROCOVER_SOLVER or pass a command template");

    fs::path workdir;
    bool own_workdir = config.workdir.empty();
    if (own_workdir) {
        std::string tmpl = (fs::temp_directory_path() / "metrocover-XXXXXX").string();
        std::vector<char> buf(tmpl.begin(), tmpl.end());
        buf.push_back('\0');
        if (!mkdtemp(buf.data()))
            throw BackendError("cannot create solver workdir: " + std::string(strerror(errno)));
        workdir = buf.data();
    } else {
        workdir = config.workdir;
        fs::create_directories(workdir);
    }

    fs::path model_path = workdir / "model.lp";
    fs::path solution_path = workdir / "solution.sol";
    fs::path log_path = workdir / "solver.log";
    {
        std::ofstream out(model_path, std::ios::binary);
        out << serialize_lp(model);
        if (!out)
            throw BackendError("cannot write model file: " + model_path.string());
    }

    auto argv_strings =
        substitute_template(config.command_template, model_path.string(), solution_path.string());
    std::vector<char*> argv;
    for (auto& s : argv_strings)
        argv.push_back(s.data());
    argv.push_back(nullptr);

    // child environment: parent's plus the cooperative limit hints
    std::vector<std::string> env_strings;
    for (char** e = environ; *e; ++e) {
        if (std::strncmp(*e, "METROCOVER_TIME_LIMIT=", 22) == 0 ||
            std::strncmp(*e, "METROCOVER_THREADS=", 19) == 0)
            continue;
        env_strings.emplace_back(*e);
    }
    env_strings.push_back("METROCOVER_TIME_LIMIT=" + std::to_string(config.time_limit_s));
    env_strings.push_back("METROCOVER_THREADS=" + std::to_string(config.threads));
    std::vector<char*> envp;
    for (auto& s : env_strings)
        envp.push_back(s.data());
    envp.push_back(nullptr);

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, log_path.c_str(),
                                     O_WRONLY | O_CREAT | O_TRUNC, 0644);
    posix_spawn_file_actions_adddup2(&actions, STDOUT_FILENO, STDERR_FILENO);

    pid_t pid = -1;
    int rc = posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), envp.data());
    posix_spawn_file_actions_destroy(&actions);
    if (rc != 0)
        throw BackendError("cannot spawn solver '" + argv_strings[0] +
                           "': " + std::string(strerror(rc)));

    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::milliseconds(static_cast<std::int64_t>(
                              (config.time_limit_s + 10.0) * 1000.0));
    int wait_status = 0;
    bool killed = false;
    for (;;) {
        pid_t r = waitpid(pid, &wait_status, WNOHANG);
        if (r == pid)
            break;
        if (r < 0)
            throw BackendError("waitpid failed: " + std::string(strerror(errno)));
        if (std::chrono::steady_clock::now() > deadline) {
            kill(pid, SIGKILL);
            killed = true;
            waitpid(pid, &wait_status, 0);
            break;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }

    auto read_file = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };

    auto cleanup = [&]() {
        if (own_workdir && !config.keep_files) {
            std::error_code ec;
            fs::remove_all(workdir, ec);
        }
    };

    if (killed) {
        cleanup();
        return IlpSolution{SolveStatus::timeout, 0, {}, {}};
    }
    if (!WIFEXITED(wait_status) || WEXITSTATUS(wait_status) != 0) {
        std::string log = read_file(log_path);
        std::ostringstream msg;
        msg << "solver exited with ";
        if (WIFEXITED(wait_status))
            msg << "code " << WEXITSTATUS(wait_status);
        else
            msg << "signal " << WTERMSIG(wait_status);
        msg << "; files kept in " << workdir.string();
        if (!log.empty())
            msg << "\n--- solver log ---\n" << log;
        throw BackendError(msg.str());
    }

    std::string text = read_file(solution_path);
    IlpSolution sol;
    try {
        sol = parse_solver_output(text, model);
    } catch (const BackendError& e) {
        throw BackendError(std::string(e.what()) + "; files kept in " + workdir.string());
    }

    if (sol.status == SolveStatus::optimal || sol.status == SolveStatus::feasible) {
        for (std::size_t i = 0; i < sol.values.size(); ++i)
            if (std::fabs(sol.values[i] - static_cast<double>(sol.rounded[i])) >
                kIntegralityTolerance)
                throw BackendError("non-integral value for " + model.vars[i].name + ": " +
                                   std::to_string(sol.values[i]) + "; files kept in " +
                                   workdir.string());
        if (auto err = verify_assignment(model, sol.rounded))
            throw BackendError("solution re-check failed: " + *err + "; files kept in " +
                               workdir.string());
        std::int64_t objective = 0;
        for (std::size_t i = 0; i < model.vars.size(); ++i)
            objective += model.vars[i].objective * sol.rounded[i];
        sol.objective = objective;
    }

    cleanup();
    return sol;
}

std::string default_solver_command() {
    if (const char* env = std::getenv("METROCOVER_SOLVER"); env && *env)
        return env;
    std::vector<fs::path> candidates;
    std::error_code ec;
    fs::path self = fs::read_symlink("/proc/self/exe", ec);
    if (!ec) {
        candidates.push_back(self.parent_path() / "solve_lp.py");
        candidates.push_back(self.parent_path().parent_path() / "tools" / "solve_lp.py");
        candidates.push_back(self.parent_path() / "tools" / "solve_lp.py");
    }
    candidates.push_back(fs::path("tools") / "solve_lp.py");
    for (const auto& c : candidates)
        if (fs::exists(c, ec))
            return "python3 " + fs::absolute(c).string() + " {model} {solution}";
    return {};
}

}  // namespace metrocover
