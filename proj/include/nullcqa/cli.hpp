#ifndef NULLCQA_CLI_HPP
#define NULLCQA_CLI_HPP

// Command-line front end. Needs CLI11.hpp and nlohmann/json (json.hpp) on the
// include path, unlike the rest of the library.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nullcqa/nullcqa.hpp"

namespace nullcqa::cli {

using json = nlohmann::ordered_json;

enum Exit : int { Ok = 0, Verdict = 1, Usage = 2, Cap = 3 };

inline int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::CandidateSpaceTooLarge:
        case ErrorKind::GroundingTooLarge:
        case ErrorKind::SearchCapExceeded:
        case ErrorKind::UnsupportedConstraintForm:
        case ErrorKind::ConflictingICSet:
        case ErrorKind::CyclicRICSet:
        case ErrorKind::NotHCF: return Cap;
        case ErrorKind::NoStableModels: return Verdict;
        default: return Usage;
    }
}

inline json to_json(const Value& v) {
    if (v.is_null()) return nullptr;
    if (v.is_integer()) return v.as_integer();
    return v.as_symbol();
}

inline json to_json(const std::vector<Value>& row) {
    json out = json::array();
    for (const auto& v : row) out.push_back(to_json(v));
    return out;
}

inline json to_json(const Instance& d) {
    json out = json::array();
    for (const auto& a : d) out.push_back(to_string(a));
    return out;
}

inline json to_json(const StableModel& m) {
    json out = json::array();
    for (const auto& a : m) out.push_back(to_string(a));
    return out;
}

inline json to_json(const AnswerSet& a) {
    json out;
    out["boolean"] = a.boolean();
    if (a.boolean()) {
        out["answer"] = a.yes();
    } else {
        json rows = json::array();
        for (const auto& t : a.tuples) rows.push_back(to_json(t));
        out["tuples"] = rows;
    }
    return out;
}

/// One table per relation, null printed as `null`.
inline std::string render_tables(const Instance& d) {
    std::ostringstream out;
    std::map<std::string, std::vector<const Atom*>> by_pred;
    for (const auto& a : d) by_pred[a.predicate].push_back(&a);
    for (const auto& [pred, atoms] : by_pred) {
        std::vector<std::size_t> width(atoms.front()->args.size(), 0);
        for (const auto* a : atoms) {
            for (std::size_t i = 0; i < a->args.size(); ++i) width[i] = std::max(width[i], to_string(a->args[i]).size());
        }
        bool first = true;
        for (const auto* a : atoms) {
            out << (first ? pred : std::string(pred.size(), ' '));
            first = false;
            for (std::size_t i = 0; i < a->args.size(); ++i) {
                auto cell = to_string(a->args[i]);
                out << " | " << cell << std::string(width[i] - cell.size(), ' ');
            }
            out << "\n";
        }
    }
    if (by_pred.empty()) out << "(empty)\n";
    return out.str();
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Inputs {
    std::string schema_path, constraints_path, data_path;
};

struct Loaded {
    Schema schema;
    ConstraintSet ic;
    Instance data;
};

inline Loaded load(const Inputs& in, bool need_data) {
    Loaded out;
    if (!in.schema_path.empty()) out.schema = parse_schema(read_file(in.schema_path));
    if (!in.constraints_path.empty()) out.ic = parse_constraints(read_file(in.constraints_path), out.schema);
    if (need_data && in.data_path.empty()) throw Error(ErrorKind::Io, "--data is required");
    if (!in.data_path.empty()) out.data = parse_instance(read_file(in.data_path), out.schema);
    Schema merged = out.schema;
    merged.merge(out.ic.schema());
    merged.merge(infer_schema(out.data));
    out.schema = merged;
    out.ic = ConstraintSet(merged, out.ic.constraints());
    return out;
}

inline std::optional<std::size_t> env_cap(const char* name) {
    const char* v = std::getenv(name);
    if (!v || !*v) return std::nullopt;
    try {
        auto n = std::stoll(v);
        if (n <= 0) throw std::invalid_argument("non-positive");
        return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
        throw Error(ErrorKind::Syntax, std::string(name) + " must be a positive integer");
    }
}

inline json report_json(const ConstraintReport& r) {
    json c;
    c["label"] = r.label;
    c["kind"] = r.kind == ConstraintKind::UIC   ? "uic"
                : r.kind == ConstraintKind::RIC ? "ric"
                : r.kind == ConstraintKind::NNC ? "nnc"
                                                : "general";
    c["constraint"] = r.text;
    c["satisfied"] = r.satisfied;
    json viol = json::array();
    for (const auto& v : r.violations) {
        json row = json::object();
        for (const auto& [name, val] : v) row[name] = to_json(val);
        viol.push_back(row);
    }
    for (const auto& a : r.null_witnesses) viol.push_back(to_string(a));
    c["violations"] = viol;
    return c;
}

/// Runs one command line; args excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"null-aware integrity constraints, repairs and consistent query answering", "nullcqa"};
    app.require_subcommand(1);
    Inputs in;
    bool text = false;
    std::size_t max_candidates = RepairOptions{}.max_candidates;
    std::size_t max_ground = GroundOptions{}.max_rules;
    std::size_t max_nodes = SolveOptions{}.max_nodes;

    auto common = [&](CLI::App* sub, bool with_caps) {
        sub->add_option("--schema", in.schema_path, "schema file (R/2. or R(a,b).)");
        sub->add_option("--constraints", in.constraints_path, "constraint file");
        sub->add_option("--data", in.data_path, "database instance file");
        sub->add_flag("--text", text, "human-readable output instead of JSON");
        if (with_caps) {
            sub->add_option("--max-candidates", max_candidates, "cap on candidate atoms for repair enumeration")
                ->check(CLI::Range(std::size_t{1}, std::size_t{62}));
            sub->add_option("--max-ground", max_ground, "cap on ground rules")->check(CLI::PositiveNumber);
            sub->add_option("--max-nodes", max_nodes, "cap on stable-model search nodes")->check(CLI::PositiveNumber);
        }
    };

    auto* check = app.add_subcommand("check", "null-aware consistency check");
    common(check, false);
    auto* graph = app.add_subcommand("graph", "dependency graph and RIC-acyclicity");
    common(graph, false);
    bool contracted = false, dot = false;
    graph->add_flag("--contracted", contracted, "contract UIC-connected predicates");
    graph->add_flag("--dot", dot, "print Graphviz DOT");
    auto* rep = app.add_subcommand("repairs", "enumerate all repairs");
    common(rep, true);
    auto* comp = app.add_subcommand("compile", "emit the repair program");
    common(comp, false);
    bool allow_cyclic = false, provenance = false;
    comp->add_flag("--allow-cyclic", allow_cyclic, "compile non-RIC-acyclic sets with a warning");
    comp->add_flag("--annotate-provenance", provenance, "comment each rule with its source constraint");
    auto* solve = app.add_subcommand("solve", "stable models of a program");
    common(solve, true);
    std::string program_path;
    bool shifted = false, extract = false;
    solve->add_option("--program", program_path, "program text; default compiles --constraints/--data");
    solve->add_flag("--shifted", shifted, "solve the shifted (non-disjunctive) program");
    solve->add_flag("--extract", extract, "print extracted databases instead of models");
    solve->add_flag("--allow-cyclic", allow_cyclic, "compile non-RIC-acyclic sets with a warning");
    auto* cqa = app.add_subcommand("cqa", "consistent answers to a query");
    common(cqa, true);
    std::string query_text, route = "enum";
    bool no_nulls = false;
    cqa->add_option("--query", query_text, "e.g. \"ans(X,Y) <- S(X,Y).\"")->required();
    cqa->add_option("--route", route, "enum | program | both")->check(CLI::IsMember({"enum", "program", "both"}));
    cqa->add_flag("--no-nulls", no_nulls, "drop answer tuples containing null");

    auto fail = [&](const std::string& kind, const std::string& msg, int code) {
        json e;
        e["error"] = kind;
        e["message"] = msg;
        err << e.dump() << "\n";
        return code;
    };

    try {
        if (auto cap = env_cap("NULLCQA_MAX_CANDIDATES")) max_candidates = *cap;
    } catch (const Error& e) {
        return fail(to_string(e.kind()), e.what(), Usage);
    }

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return Ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return Ok;
    } catch (const CLI::ParseError& e) {
        return fail("usage", e.what(), Usage);
    }

    RepairOptions ropts;
    ropts.max_candidates = max_candidates;
    GroundOptions gopts{max_ground};
    SolveOptions sopts{max_nodes};

    try {
        if (check->parsed()) {
            auto l = load(in, true);
            auto r = satisfies_all(l.data, l.ic);
            if (text) {
                out << (r.satisfied ? "consistent" : "inconsistent") << "\n";
                for (const auto& c : r.constraints) {
                    out << c.label << " " << (c.satisfied ? "satisfied" : "violated") << ": " << c.text << "\n";
                    for (const auto& v : c.violations) out << "  " << to_string(v) << "\n";
                    for (const auto& a : c.null_witnesses) out << "  " << to_string(a) << "\n";
                }
            } else {
                json j;
                j["consistent"] = r.satisfied;
                j["constraints"] = json::array();
                for (const auto& c : r.constraints) j["constraints"].push_back(report_json(c));
                out << j.dump(2) << "\n";
            }
            return r.satisfied ? Ok : Verdict;
        }
        if (graph->parsed()) {
            auto l = load(in, false);
            auto g = contracted ? contracted_graph(l.ic) : dependency_graph(l.ic);
            auto acyc = is_ric_acyclic(l.ic);
            if (dot) {
                out << to_dot(g, contracted ? "contracted" : "dependency");
                return Ok;
            }
            if (text) {
                for (const auto& e : g.edges) {
                    out << g.vertex_name(e.from) << " -> " << g.vertex_name(e.to) << " [" << e.label << "]\n";
                }
                out << (acyc.acyclic ? "RIC-acyclic" : "not RIC-acyclic") << "\n";
                return Ok;
            }
            json j;
            j["vertices"] = json::array();
            for (std::size_t v = 0; v < g.vertices.size(); ++v) j["vertices"].push_back(g.vertex_name(v));
            j["edges"] = json::array();
            for (const auto& e : g.edges) {
                j["edges"].push_back({{"from", g.vertex_name(e.from)}, {"to", g.vertex_name(e.to)}, {"label", e.label}});
            }
            j["ric_acyclic"] = acyc.acyclic;
            if (acyc.cycle) {
                json cyc = json::array();
                for (auto v : acyc.cycle->vertices) cyc.push_back(acyc.contracted.vertex_name(v));
                j["cycle"] = cyc;
            }
            out << j.dump(2) << "\n";
            return Ok;
        }
        if (rep->parsed()) {
            auto l = load(in, true);
            bool consistent = satisfies_all(l.data, l.ic).satisfied;
            auto rs = repairs(l.data, l.ic, ropts);
            if (text) {
                out << (consistent ? "consistent" : "inconsistent") << ", " << rs.repairs.size() << " repair(s)\n";
                for (std::size_t i = 0; i < rs.repairs.size(); ++i) {
                    out << "\nD" << i + 1 << "  delta " << to_string(rs.repairs[i].delta) << "\n";
                    out << render_tables(rs.repairs[i].instance);
                }
            } else {
                json j;
                j["consistent"] = consistent;
                j["candidate_atoms"] = rs.candidate_atoms;
                j["repairs"] = json::array();
                for (const auto& r : rs.repairs) {
                    j["repairs"].push_back({{"instance", to_json(r.instance)}, {"delta", to_json(r.delta)}});
                }
                out << j.dump(2) << "\n";
            }
            return consistent ? Ok : Verdict;
        }
        if (comp->parsed()) {
            auto l = load(in, true);
            auto p = compile(l.data, l.ic, CompileOptions{allow_cyclic});
            out << emit_text(p, EmitOptions{provenance});
            return Ok;
        }
        if (solve->parsed()) {
            LogicProgram p;
            std::set<Value> universe;
            if (!program_path.empty()) {
                p = parse_program(read_file(program_path));
                universe = program_constants(p);
            } else {
                auto l = load(in, true);
                p = compile(l.data, l.ic, CompileOptions{allow_cyclic});
                universe = active_domain(l.data, l.ic);
            }
            auto g = ground(p, universe, gopts);
            auto models = stable_models(shifted ? shift(g) : g, sopts);
            if (extract) {
                std::set<Instance> dbs;
                for (const auto& m : models) dbs.insert(extract_database(m, p.schema_names));
                if (text) {
                    for (const auto& d : dbs) out << to_string(d) << "\n";
                } else {
                    json j;
                    j["databases"] = json::array();
                    for (const auto& d : dbs) j["databases"].push_back(to_json(d));
                    out << j.dump(2) << "\n";
                }
                return Ok;
            }
            if (text) {
                for (std::size_t i = 0; i < models.size(); ++i) {
                    out << (i ? "\n" : "") << "model " << i + 1 << "\n";
                    for (const auto& a : models[i]) out << "  " << to_string(a) << "\n";
                }
            } else {
                json j;
                j["count"] = models.size();
                j["models"] = json::array();
                for (const auto& m : models) j["models"].push_back(to_json(m));
                out << j.dump(2) << "\n";
            }
            return Ok;
        }
        if (cqa->parsed()) {
            auto l = load(in, true);
            auto q = parse_query(query_text);
            check_query(q, l.schema);
            std::optional<AnswerSet> by_enum, by_program;
            if (route != "program") by_enum = consistent_answers(l.data, l.ic, q, ropts);
            if (route != "enum") {
                ProgramRouteOptions popts;
                popts.ground = gopts;
                popts.solve = sopts;
                by_program = consistent_answers_via_program(l.data, l.ic, q, popts);
            }
            if (no_nulls) {
                if (by_enum) by_enum = without_nulls(*by_enum);
                if (by_program) by_program = without_nulls(*by_program);
            }
            bool agree = !(by_enum && by_program) || *by_enum == *by_program;
            const auto& answer = by_enum ? *by_enum : *by_program;
            if (text) {
                auto show = [&](const AnswerSet& a) {
                    if (a.boolean()) {
                        out << (a.yes() ? "yes" : "no") << "\n";
                        return;
                    }
                    for (const auto& t : a.tuples) {
                        out << "(";
                        for (std::size_t i = 0; i < t.size(); ++i) out << (i ? ", " : "") << to_string(t[i]);
                        out << ")\n";
                    }
                };
                show(answer);
                if (!agree) {
                    out << "routes disagree; program route:\n";
                    show(*by_program);
                }
            } else {
                json j;
                j["query"] = to_string(q);
                j["route"] = route;
                auto a = to_json(answer);
                for (auto it = a.begin(); it != a.end(); ++it) j[it.key()] = it.value();
                if (by_enum && by_program) {
                    j["routes_agree"] = agree;
                    if (!agree) j["program_route"] = to_json(*by_program);
                }
                out << j.dump(2) << "\n";
            }
            return agree ? Ok : Verdict;
        }
    } catch (const Error& e) {
        return fail(to_string(e.kind()), e.what(), exit_code(e.kind()));
    } catch (const std::exception& e) {
        return fail("internal", e.what(), Usage);
    }
    return Usage;
}

}  // namespace nullcqa::cli

#endif  // NULLCQA_CLI_HPP
