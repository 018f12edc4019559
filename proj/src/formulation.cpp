#include "metrocover/formulation.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace metrocover {

namespace {

constexpr const char* kFakeSource = ".s";
constexpr const char* kFakeTarget = ".t";
constexpr const char* kFakeLine = ".none";

bool is_required(const VariantConfig& variant, const LineId& line) {
    return std::binary_search(variant.required_colors.begin(), variant.required_colors.end(),
                              line);
}

std::string model_vertex_token(const Network& network, int v) {
    int nv = static_cast<int>(network.stations().size());
    if (v < nv)
        return encode_name_component(network.stations()[v]);
    return v == nv ? kFakeSource : kFakeTarget;
}

}  // namespace

std::string to_string(Shape shape) {
    switch (shape) {
        case Shape::walk: return "walk";
        case Shape::path: return "path";
        case Shape::cycle: return "cycle";
    }
    return "?";
}

VariantConfig normalize_variant(VariantConfig variant, const Network& network) {
    if (variant.shape == Shape::path)
        variant.forbid_station_reuse = true;
    if (variant.shape == Shape::walk && variant.forbid_station_reuse)
        variant.shape = Shape::path;
    if (variant.required_colors.empty())
        throw std::invalid_argument("variant requires at least one line");
    std::sort(variant.required_colors.begin(), variant.required_colors.end());
    variant.required_colors.erase(
        std::unique(variant.required_colors.begin(), variant.required_colors.end()),
        variant.required_colors.end());
    for (const auto& line : variant.required_colors)
        if (network.line_index(line) < 0)
            throw std::invalid_argument("required line not in network: " + line);
    if (variant.anchor && network.station_index(*variant.anchor) < 0)
        throw std::invalid_argument("anchor not in network: " + *variant.anchor);
    if (variant.anchor && variant.shape != Shape::cycle)
        throw std::invalid_argument("anchor is only meaningful for the cycle shape");
    return variant;
}

std::string encode_name_component(const std::string& raw) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    out.reserve(raw.size());
    for (unsigned char c : raw) {
        if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 0xF];
        }
    }
    return out;
}

std::string decode_name_component(const std::string& encoded) {
    auto hexval = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        return -1;
    };
    std::string out;
    for (std::size_t i = 0; i < encoded.size(); ++i) {
        if (encoded[i] == '%' && i + 2 < encoded.size()) {
            int hi = hexval(encoded[i + 1]), lo = hexval(encoded[i + 2]);
            if (hi >= 0 && lo >= 0) {
                out += static_cast<char>(hi * 16 + lo);
                i += 2;
                continue;
            }
        }
        out += encoded[i];
    }
    return out;
}

std::vector<std::string> split_var_name(const std::string& name) {
    std::vector<std::string> parts;
    std::size_t pos = 0;
    while (true) {
        std::size_t next = name.find("__", pos);
        if (next == std::string::npos) {
            parts.push_back(name.substr(pos));
            break;
        }
        parts.push_back(name.substr(pos, next - pos));
        pos = next + 2;
    }
    return parts;
}

int IlpModel::var_index(const std::string& name) const {
    for (std::size_t i = 0; i < vars.size(); ++i)
        if (vars[i].name == name)
            return static_cast<int>(i);
    return -1;
}

namespace {

struct Builder {
    const Network& net;
    const VariantConfig& variant;
    IlpModel model;
    int nv;  // real vertex count

    std::string vertex_token(int v) const {
        if (v < nv)
            return encode_name_component(net.stations()[v]);
        return v == nv ? kFakeSource : kFakeTarget;
    }
    std::string line_token(int line) const {
        return line < 0 ? kFakeLine : encode_name_component(net.lines()[line]);
    }

    int add_var(std::string name, IlpVar::Kind kind, std::int64_t objective) {
        model.vars.push_back(IlpVar{std::move(name), kind, std::nullopt, objective});
        return static_cast<int>(model.vars.size()) - 1;
    }

    void add_model_arc(int from_v, int to_v, int line, int net_arc) {
        int k = net_arc >= 0 ? net.arcs()[net_arc].arc_index : 0;
        std::string suffix = vertex_token(from_v) + "__" + vertex_token(to_v) + "__" +
                             line_token(line) + "__" + std::to_string(k);
        int x = add_var("x__" + suffix, IlpVar::Kind::binary, net_arc >= 0 ? 1 : 0);
        model.arcs.push_back(IlpModel::ModelArc{from_v, to_v, line, net_arc, x, -1});
    }

    void finish_arcs_and_core_rows(int source_v, bool walk) {
        // flow variables, after every x so the catalogue groups by role
        for (auto& arc : model.arcs) {
            std::string name = model.vars[arc.x_var].name;
            name[0] = 'f';
            arc.f_var = add_var(std::move(name), IlpVar::Kind::integer, 0);
        }
        for (int v = 0; v < model.vertex_count; ++v)
            model.y_var.push_back(
                add_var("y__" + vertex_token(v), IlpVar::Kind::integer, 0));

        std::vector<std::vector<int>> in(model.vertex_count), out(model.vertex_count);
        for (std::size_t i = 0; i < model.arcs.size(); ++i) {
            out[model.arcs[i].from_v].push_back(static_cast<int>(i));
            in[model.arcs[i].to_v].push_back(static_cast<int>(i));
        }

        // degree balance at every real vertex (fake arcs included in the sums)
        for (int v = 0; v < nv; ++v) {
            IlpConstraint c{"bal__" + vertex_token(v), {}, IlpConstraint::Sense::eq, 0};
            for (int a : in[v]) c.terms.push_back({1, model.arcs[a].x_var});
            for (int a : out[v]) c.terms.push_back({-1, model.arcs[a].x_var});
            model.rows.push_back(std::move(c));
        }

        // exactly one source arc and one target arc; with the balance rows the
        // two sums are already equal, so one row pins both
        if (walk) {
            IlpConstraint c{"endpoints", {}, IlpConstraint::Sense::eq, 2};
            for (int a : out[nv]) c.terms.push_back({1, model.arcs[a].x_var});
            for (int a : in[nv + 1]) c.terms.push_back({1, model.arcs[a].x_var});
            model.rows.push_back(std::move(c));
        }

        // every required colour at least once
        for (const auto& line : variant.required_colors) {
            int li = net.line_index(line);
            IlpConstraint c{"cover__" + encode_name_component(line), {},
                            IlpConstraint::Sense::ge, 1};
            bool any = false;
            for (const auto& arc : model.arcs)
                if (arc.line == li) {
                    c.terms.push_back({1, arc.x_var});
                    any = true;
                }
            if (!any)
                throw std::invalid_argument("required line has no arcs: " + line);
            model.rows.push_back(std::move(c));
        }

        // connectivity flow: arcs carry flow only when chosen, every vertex in
        // the solution consumes at least its visit degree, the source generates
        for (const auto& arc : model.arcs) {
            std::string name = model.vars[arc.x_var].name;
            name.replace(0, 1, "cap");
            model.rows.push_back(IlpConstraint{std::move(name),
                                               {{model.big_m, arc.x_var}, {-1, arc.f_var}},
                                               IlpConstraint::Sense::ge,
                                               0});
        }
        for (int v = 0; v < model.vertex_count; ++v) {
            if (v == source_v)
                continue;
            IlpConstraint c{"flow__" + vertex_token(v), {}, IlpConstraint::Sense::ge, 0};
            for (int a : in[v]) c.terms.push_back({1, model.arcs[a].f_var});
            for (int a : out[v]) c.terms.push_back({-1, model.arcs[a].f_var});
            c.terms.push_back({-1, model.y_var[v]});
            model.rows.push_back(std::move(c));
        }
        for (int v = 0; v < model.vertex_count; ++v) {
            IlpConstraint c{"vis__" + vertex_token(v), {}, IlpConstraint::Sense::ge, 0};
            c.terms.push_back({1, model.y_var[v]});
            for (int a : in[v]) c.terms.push_back({-1, model.arcs[a].x_var});
            for (int a : out[v]) c.terms.push_back({-1, model.arcs[a].x_var});
            model.rows.push_back(std::move(c));
        }
    }
};

std::int64_t pick_big_m(const ModelOptions& options, std::int64_t model_arcs,
                        std::int64_t model_vertices) {
    if (options.big_m == ModelOptions::BigM::paper)
        return model_vertices;
    return model_arcs + model_vertices;
}

}  // namespace

IlpModel build_base_model(const Network& network, const VariantConfig& variant,
                          const ModelOptions& options) {
    VariantConfig v = normalize_variant(variant, network);
    if (v.shape == Shape::cycle) {
        std::vector<StationId> anchors =
            v.anchor ? std::vector<StationId>{*v.anchor} : cycle_anchor_candidates(network, v);
        return build_cycle_model(network, v, anchors.front(), options);
    }
    if (network.stations().empty())
        throw std::invalid_argument("empty network");

    Builder b{network, v, {}, static_cast<int>(network.stations().size())};
    b.model.shape = v.shape;
    b.model.vertex_count = b.nv + 2;
    b.model.source_v = b.nv;
    b.model.target_v = b.nv + 1;

    for (int a = 0; a < static_cast<int>(network.arcs().size()); ++a)
        b.add_model_arc(network.arc_from(a), network.arc_to(a), network.arc_line(a), a);
    for (int s = 0; s < b.nv; ++s)
        b.add_model_arc(b.nv, s, -1, -1);
    for (int s = 0; s < b.nv; ++s)
        b.add_model_arc(s, b.nv + 1, -1, -1);

    b.model.big_m = pick_big_m(options, static_cast<std::int64_t>(b.model.arcs.size()),
                               b.model.vertex_count);
    b.finish_arcs_and_core_rows(b.model.source_v, /*walk=*/true);

    IlpModel model = std::move(b.model);
    if (v.forbid_station_reuse)
        model = apply_path_restriction(std::move(model));
    if (v.forbid_line_reuse)
        model = apply_line_contiguity(std::move(model), network, v);
    return model;
}

IlpModel build_cycle_model(const Network& network, const VariantConfig& variant,
                           const StationId& anchor, const ModelOptions& options) {
    VariantConfig v = normalize_variant(variant, network);
    int anchor_v = network.station_index(anchor);
    if (anchor_v < 0)
        throw std::invalid_argument("anchor not in network: " + anchor);

    Builder b{network, v, {}, static_cast<int>(network.stations().size())};
    b.model.shape = Shape::cycle;
    b.model.vertex_count = b.nv;
    b.model.source_v = anchor_v;

    for (int a = 0; a < static_cast<int>(network.arcs().size()); ++a)
        b.add_model_arc(network.arc_from(a), network.arc_to(a), network.arc_line(a), a);

    b.model.big_m = pick_big_m(options, static_cast<std::int64_t>(b.model.arcs.size()),
                               b.model.vertex_count);
    b.finish_arcs_and_core_rows(anchor_v, /*walk=*/false);

    IlpModel model = std::move(b.model);
    if (v.forbid_station_reuse)
        model = apply_path_restriction(std::move(model));
    if (v.forbid_line_reuse)
        model = apply_line_contiguity(std::move(model), network, v);
    return model;
}

IlpModel apply_path_restriction(IlpModel model) {
    for (int y : model.y_var)
        model.vars[y].upper = 2;
    return model;
}

IlpModel apply_line_contiguity(IlpModel model, const Network& network,
                               const VariantConfig& variant) {
    VariantConfig v = variant;
    std::sort(v.required_colors.begin(), v.required_colors.end());

    const int middle_count =
        model.shape == Shape::cycle ? model.vertex_count : model.vertex_count - 2;
    std::vector<std::vector<int>> in(model.vertex_count), out(model.vertex_count);
    for (std::size_t i = 0; i < model.arcs.size(); ++i) {
        out[model.arcs[i].from_v].push_back(static_cast<int>(i));
        in[model.arcs[i].to_v].push_back(static_cast<int>(i));
    }

    auto line_name = [&](int line) {
        return line < 0 ? std::string(kFakeLine) : network.lines()[line];
    };
    auto required = [&](int line) {
        return line >= 0 && is_required(v, network.lines()[line]);
    };

    // z = 1 exactly when both arcs of a consecutive pair are chosen; pairs of
    // one line with itself carry no information and are skipped
    std::map<LineId, std::vector<int>> transitions;  // required line -> z vars
    int n = 0;
    for (int mid = 0; mid < middle_count; ++mid) {
        for (int a : in[mid]) {
            for (int bidx : out[mid]) {
                const auto& arc_in = model.arcs[a];
                const auto& arc_out = model.arcs[bidx];
                if (arc_in.line == arc_out.line)
                    continue;
                bool r1 = required(arc_in.line), r2 = required(arc_out.line);
                if (!r1 && !r2)
                    continue;
                std::string name =
                    "z__" + model_vertex_token(network, arc_in.from_v) + "__" +
                    model_vertex_token(network, mid) + "__" +
                    model_vertex_token(network, arc_out.to_v) + "__" +
                    (arc_in.line < 0 ? kFakeLine
                                     : encode_name_component(network.lines()[arc_in.line])) +
                    "__" +
                    (arc_out.line < 0 ? kFakeLine
                                      : encode_name_component(network.lines()[arc_out.line]));
                model.vars.push_back(IlpVar{name, IlpVar::Kind::binary, std::nullopt, 0});
                int z = static_cast<int>(model.vars.size()) - 1;
                std::string tag = std::to_string(n++);
                model.rows.push_back(IlpConstraint{
                    "zle1__" + tag, {{1, z}, {-1, arc_in.x_var}}, IlpConstraint::Sense::le, 0});
                model.rows.push_back(IlpConstraint{
                    "zle2__" + tag, {{1, z}, {-1, arc_out.x_var}}, IlpConstraint::Sense::le, 0});
                model.rows.push_back(
                    IlpConstraint{"zge__" + tag,
                                  {{1, z}, {-1, arc_in.x_var}, {-1, arc_out.x_var}},
                                  IlpConstraint::Sense::ge,
                                  -1});
                if (r1)
                    transitions[line_name(arc_in.line)].push_back(z);
                if (r2)
                    transitions[line_name(arc_out.line)].push_back(z);
            }
        }
    }

    // one entry plus one exit transition per required line
    for (const auto& line : v.required_colors) {
        IlpConstraint c{"ctg__" + encode_name_component(line), {}, IlpConstraint::Sense::eq, 2};
        for (int z : transitions[line])
            c.terms.push_back({1, z});
        model.rows.push_back(std::move(c));
    }
    return model;
}

IlpModel add_nogood_cut(IlpModel model, const std::vector<int>& solution_arcs) {
    if (solution_arcs.empty())
        throw std::invalid_argument("no-good cut over an empty solution");
    std::map<int, int> net_to_x;
    for (const auto& arc : model.arcs)
        if (arc.net_arc >= 0)
            net_to_x[arc.net_arc] = arc.x_var;

    IlpConstraint c{"cut__" + std::to_string(model.cuts.size()), {}, IlpConstraint::Sense::le,
                    static_cast<std::int64_t>(solution_arcs.size()) - 1};
    for (int a : solution_arcs) {
        auto it = net_to_x.find(a);
        if (it == net_to_x.end())
            throw std::invalid_argument("solution arc outside the model");
        c.terms.push_back({1, it->second});
    }
    model.cuts.push_back(std::move(c));
    return model;
}

std::vector<StationId> cycle_anchor_candidates(const Network& network,
                                               const VariantConfig& variant) {
    VariantConfig v = variant;
    std::sort(v.required_colors.begin(), v.required_colors.end());

    const LineId* best = nullptr;
    std::set<int> best_vertices;
    for (const auto& line : v.required_colors) {
        int li = network.line_index(line);
        std::set<int> vertices;
        for (int a : network.line_arcs(li)) {
            vertices.insert(network.arc_from(a));
            vertices.insert(network.arc_to(a));
        }
        if (!best || vertices.size() < best_vertices.size()) {
            best = &line;
            best_vertices = std::move(vertices);
        }
    }
    std::vector<StationId> out;
    for (int s : best_vertices)
        out.push_back(network.stations()[s]);
    return out;  // station order = sorted names
}

namespace {

void append_terms(std::ostringstream& out, const std::vector<IlpTerm>& terms,
                  const std::vector<IlpVar>& vars) {
    int on_line = 0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        std::int64_t c = terms[i].coef;
        if (i == 0) {
            if (c == -1)
                out << "- ";
            else if (c != 1)
                out << c << " ";
        } else {
            out << (c < 0 ? " - " : " + ");
            std::int64_t a = c < 0 ? -c : c;
            if (a != 1)
                out << a << " ";
        }
        out << vars[terms[i].var].name;
        if (++on_line == 8 && i + 1 < terms.size()) {
            out << "\n   ";
            on_line = 0;
        }
    }
}

}  // namespace

std::string serialize_lp(const IlpModel& model) {
    // injective percent-encoding makes collisions impossible; check anyway
    {
        std::set<std::string> seen;
        for (const auto& v : model.vars)
            if (!seen.insert(v.name).second)
                throw std::runtime_error("variable name collision: " + v.name);
    }

    std::ostringstream out;
    out << "Minimize\n obj: ";
    std::vector<IlpTerm> objective;
    for (std::size_t i = 0; i < model.vars.size(); ++i)
        if (model.vars[i].objective != 0)
            objective.push_back({model.vars[i].objective, static_cast<int>(i)});
    append_terms(out, objective, model.vars);
    out << "\nSubject To\n";

    auto emit_row = [&](const IlpConstraint& c) {
        out << " " << c.name << ": ";
        append_terms(out, c.terms, model.vars);
        switch (c.sense) {
            case IlpConstraint::Sense::le: out << " <= "; break;
            case IlpConstraint::Sense::ge: out << " >= "; break;
            case IlpConstraint::Sense::eq: out << " = "; break;
        }
        out << c.rhs << "\n";
    };
    for (const auto& c : model.rows)
        emit_row(c);
    for (const auto& c : model.cuts)
        emit_row(c);

    bool any_bound = false;
    for (const auto& v : model.vars)
        if (v.upper && v.kind != IlpVar::Kind::binary)
            any_bound = true;
    if (any_bound) {
        out << "Bounds\n";
        for (const auto& v : model.vars)
            if (v.upper && v.kind != IlpVar::Kind::binary)
                out << " " << v.name << " <= " << *v.upper << "\n";
    }

    out << "Generals\n";
    int on_line = 0;
    for (const auto& v : model.vars)
        if (v.kind == IlpVar::Kind::integer) {
            out << " " << v.name;
            if (++on_line == 8) {
                out << "\n";
                on_line = 0;
            }
        }
    if (on_line)
        out << "\n";
    out << "Binaries\n";
    on_line = 0;
    for (const auto& v : model.vars)
        if (v.kind == IlpVar::Kind::binary) {
            out << " " << v.name;
            if (++on_line == 8) {
                out << "\n";
                on_line = 0;
            }
        }
    if (on_line)
        out << "\n";
    out << "End\n";
    return out.str();
}

}  // namespace metrocover
