#ifndef NULLCQA_COMPILER_HPP
#define NULLCQA_COMPILER_HPP

#include <cctype>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "nullcqa/analysis.hpp"
#include "nullcqa/constraint.hpp"
#include "nullcqa/program.hpp"
#include "nullcqa/relational.hpp"
#include "nullcqa/satisfaction.hpp"

namespace nullcqa {

struct CompileOptions {
    bool allow_cyclic = false;
};

namespace detail {

/// Renames constraint variables to program variables (capitalised), keeping
/// them distinct within one constraint.
class VarRenamer {
public:
    explicit VarRenamer(const Constraint& c) {
        std::vector<std::string> names = c.universal_vars();
        for (const auto& z : c.existentials) names.push_back(z);
        std::set<std::string> used;
        for (const auto& n : names) {
            std::string cand = n;
            cand[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(cand[0])));
            if (cand[0] == '_') cand = "V" + cand;
            std::string base = cand;
            for (int k = 2; used.count(cand); ++k) cand = base + std::to_string(k);
            used.insert(cand);
            map_[n] = cand;
        }
    }

    Term operator()(const Term& t) const { return t.is_var() ? Term::var(map_.at(t.var_name())) : t; }
    std::string name(const std::string& v) const { return map_.at(v); }

private:
    std::map<std::string, std::string> map_;
};

inline ProgramAtom annotated(const DbAtom& a, const VarRenamer& ren, std::optional<Annotation> ann) {
    ProgramAtom out{program_predicate(a.predicate), {}, ann};
    for (const auto& t : a.terms) out.args.push_back(ren(t));
    return out;
}

inline BuiltinAtom not_null(const std::string& var) { return {Term::var(var), CompareOp::Ne, Term::constant(Value::null())}; }

inline std::vector<Term> generic_vars(std::size_t arity) {
    static const char* small[] = {"X", "Y", "Z"};
    std::vector<Term> out;
    for (std::size_t i = 0; i < arity; ++i) {
        out.push_back(Term::var(arity <= 3 ? std::string(small[i]) : "X" + std::to_string(i + 1)));
    }
    return out;
}

inline void compile_uic(const Constraint& c, LogicProgram& p) {
    VarRenamer ren(c);
    auto guards = transform(c).guards;
    const std::size_t n = c.consequent.size();
    std::vector<ProgramAtom> head;
    for (const auto& a : c.antecedent) head.push_back(annotated(a, ren, Annotation::Fa));
    for (const auto& q : c.consequent) head.push_back(annotated(q, ren, Annotation::Ta));
    // Q' = atoms whose bit is set, checked through fa; the rest (Q'') through absence from D.
    for (std::size_t m = (std::size_t{1} << n); m-- > 0;) {
        ProgramRule r;
        r.kind = RuleKind::Uic;
        r.provenance = c.label;
        r.head = head;
        for (const auto& a : c.antecedent) r.positive.push_back(annotated(a, ren, Annotation::Ts));
        for (std::size_t j = 0; j < n; ++j) {
            bool in_q_prime = m & (std::size_t{1} << (n - 1 - j));
            if (in_q_prime) {
                r.positive.push_back(annotated(c.consequent[j], ren, Annotation::Fa));
            } else {
                r.negative.push_back(annotated(c.consequent[j], ren, std::nullopt));
            }
        }
        for (const auto& b : c.builtins) r.builtins.push_back({ren(b.lhs), negate(b.op), ren(b.rhs)});
        for (const auto& g : guards) r.builtins.push_back(not_null(ren.name(g)));
        p.rules.push_back(std::move(r));
    }
}

inline void compile_ric(const Constraint& c, std::size_t index, LogicProgram& p) {
    VarRenamer ren(c);
    const auto& from = c.antecedent.front();
    const auto& to = c.consequent.front();
    std::string aux = "aux_" + std::to_string(index);

    ProgramAtom aux_atom{aux, {}, std::nullopt};
    std::vector<BuiltinAtom> shared_not_null;
    for (const auto& t : c.shared_terms()) {
        aux_atom.args.push_back(ren(t));
        shared_not_null.push_back(not_null(ren(t).var_name()));
    }

    ProgramAtom insert{program_predicate(to.predicate), {}, Annotation::Ta};
    for (const auto& t : to.terms) {
        insert.args.push_back(c.is_existential(t.var_name()) ? Term::constant(Value::null()) : ren(t));
    }

    ProgramRule r;
    r.kind = RuleKind::Ric;
    r.provenance = c.label;
    r.head = {annotated(from, ren, Annotation::Fa), insert};
    r.positive = {annotated(from, ren, Annotation::Ts)};
    r.negative = {aux_atom};
    r.builtins = shared_not_null;
    p.rules.push_back(std::move(r));

    for (const auto& t : to.terms) {
        if (!c.is_existential(t.var_name())) continue;
        ProgramRule a;
        a.kind = RuleKind::RicAux;
        a.provenance = c.label;
        a.head = {aux_atom};
        a.positive = {annotated(to, ren, Annotation::Ts)};
        a.negative = {annotated(to, ren, Annotation::Fa)};
        a.builtins = shared_not_null;
        a.builtins.push_back(not_null(ren.name(t.var_name())));
        p.rules.push_back(std::move(a));
    }
}

inline void compile_nnc(const Constraint& c, LogicProgram& p) {
    VarRenamer ren(c);
    const auto& atom = c.antecedent.front();
    ProgramRule r;
    r.kind = RuleKind::Nnc;
    r.provenance = c.label;
    r.head = {annotated(atom, ren, Annotation::Fa)};
    r.positive = {annotated(atom, ren, Annotation::Ts)};
    r.builtins = {{Term::var(ren.name(*c.null_guard)), CompareOp::Eq, Term::constant(Value::null())}};
    p.rules.push_back(std::move(r));
}

inline void compile_scaffolding(const std::string& predicate, std::size_t arity, LogicProgram& p) {
    auto name = program_predicate(predicate);
    auto vars = generic_vars(arity);
    auto at = [&](std::optional<Annotation> ann) { return ProgramAtom{name, vars, ann}; };
    p.rules.push_back({{at(Annotation::Ts)}, {at(std::nullopt)}, {}, {}, RuleKind::Annotation, ""});
    p.rules.push_back({{at(Annotation::Ts)}, {at(Annotation::Ta)}, {}, {}, RuleKind::Annotation, ""});
    p.rules.push_back({{at(Annotation::Tss)}, {at(Annotation::Ts)}, {at(Annotation::Fa)}, {}, RuleKind::Interpretation, ""});
    p.rules.push_back({{}, {at(Annotation::Ta), at(Annotation::Fa)}, {}, {}, RuleKind::Denial, ""});
}

}  // namespace detail

/// D atoms that already satisfy a RIC with null in every existential
/// position. The aux rules ignore such atoms, so the program can produce
/// models whose databases are not minimal; callers should treat these inputs
/// as outside the model/repair correspondence.
inline std::vector<std::pair<std::string, Atom>> null_existential_targets(const Instance& d, const ConstraintSet& ic) {
    std::vector<std::pair<std::string, Atom>> out;
    for (const auto* c : ic.rics()) {
        auto ex = c->existential_positions();
        for (const auto& a : d.atoms_of(c->consequent.front().predicate)) {
            bool all_null = true, shared_ok = true;
            for (std::size_t i = 0; i < a.args.size(); ++i) {
                bool is_ex = std::find(ex.begin(), ex.end(), i + 1) != ex.end();
                if (is_ex) all_null = all_null && a.args[i].is_null();
                else shared_ok = shared_ok && !a.args[i].is_null();
            }
            if (all_null && shared_ok) out.emplace_back(c->label, a);
        }
    }
    return out;
}

/// Builds the annotated disjunctive repair program for (D, IC).
///
/// Throws UnsupportedConstraintForm for general-form constraints,
/// ConflictingICSet, and CyclicRICSet unless `allow_cyclic` is set (in which
/// case a warning is attached instead).
inline LogicProgram compile(const Instance& d, const ConstraintSet& ic, const CompileOptions& opts = {}) {
    for (const auto& c : ic) {
        if (c.kind == ConstraintKind::General) {
            throw Error(ErrorKind::UnsupportedConstraintForm,
                        c.label + " (" + to_string(c) + ") is not a universal, referential or NOT NULL constraint");
        }
    }
    if (auto cs = conflicts(ic); !cs.empty()) {
        throw Error(ErrorKind::ConflictingICSet,
                    cs.front().nnc + " forbids null at " + to_string(cs.front().position) + " which " +
                        cs.front().referential + " quantifies existentially");
    }
    LogicProgram p;
    if (auto acyc = is_ric_acyclic(ic); !acyc.acyclic) {
        std::string cycle;
        for (auto v : acyc.cycle->vertices) cycle += acyc.contracted.vertex_name(v) + " -> ";
        cycle += acyc.contracted.vertex_name(acyc.cycle->vertices.front());
        if (!opts.allow_cyclic) {
            throw Error(ErrorKind::CyclicRICSet, "constraint set is not RIC-acyclic: " + cycle);
        }
        p.warnings.push_back("constraint set is not RIC-acyclic (" + cycle +
                             "); stable models need not correspond to repairs");
    }
    for (const auto& [label, atom] : null_existential_targets(d, ic)) {
        p.warnings.push_back(to_string(atom) + " satisfies " + label +
                             " only through nulls; models may extract to non-minimal instances");
    }

    Schema schema = ic.schema();
    schema.merge(infer_schema(d));
    for (const auto& [name, decl] : schema.predicates()) {
        auto prog = program_predicate(name);
        auto [it, fresh] = p.schema_names.emplace(prog, name);
        if (!fresh) {
            throw Error(ErrorKind::Schema, "predicates " + it->second + " and " + name + " map to the same program name " + prog);
        }
    }

    for (const auto& a : d) {
        ProgramAtom fact{program_predicate(a.predicate), {}, std::nullopt};
        for (const auto& v : a.args) fact.args.push_back(Term::constant(v));
        p.rules.push_back({{std::move(fact)}, {}, {}, {}, RuleKind::Fact, ""});
    }
    std::size_t ric_index = 0;
    for (const auto& c : ic) {
        switch (c.kind) {
            case ConstraintKind::UIC: detail::compile_uic(c, p); break;
            case ConstraintKind::RIC: detail::compile_ric(c, ++ric_index, p); break;
            case ConstraintKind::NNC: detail::compile_nnc(c, p); break;
            case ConstraintKind::General: break;
        }
    }
    for (const auto& [name, decl] : schema.predicates()) detail::compile_scaffolding(name, decl.arity, p);
    return p;
}

/// The database read off a model: P(a) for every P_(a, tss) in it.
inline Instance extract_database(const StableModel& m, const std::map<std::string, std::string>& schema_names = {}) {
    Instance out;
    for (const auto& a : m) {
        if (a.annotation != Annotation::Tss) continue;
        std::string name;
        if (auto it = schema_names.find(a.predicate); it != schema_names.end()) {
            name = it->second;
        } else {
            name = a.predicate;
            if (!name.empty() && name.back() == '_') name.pop_back();
        }
        out.insert(Atom{name, a.args});
    }
    return out;
}

}  // namespace nullcqa

#endif  // NULLCQA_COMPILER_HPP
