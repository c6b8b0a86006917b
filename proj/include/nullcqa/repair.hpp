#ifndef NULLCQA_REPAIR_HPP
#define NULLCQA_REPAIR_HPP

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "nullcqa/analysis.hpp"
#include "nullcqa/constraint.hpp"
#include "nullcqa/relational.hpp"
#include "nullcqa/satisfaction.hpp"

namespace nullcqa {

/// Symmetric difference (D \ D') u (D' \ D).
inline Instance delta(const Instance& d, const Instance& other) {
    std::vector<Atom> out;
    std::set_symmetric_difference(d.begin(), d.end(), other.begin(), other.end(), std::back_inserter(out));
    return Instance(out);
}

/// True iff `b` agrees with `a` at every non-null position of `a`.
inline bool covers_non_null_part(const Atom& a, const Atom& b) {
    if (a.predicate != b.predicate || a.args.size() != b.args.size()) return false;
    for (std::size_t i = 0; i < a.args.size(); ++i) {
        if (!a.args[i].is_null() && a.args[i] != b.args[i]) return false;
    }
    return true;
}

/// How a null-containing change in D1 is matched against D2's changes.
///  - Reflexive: the same atom in delta(D, D2) matches it, or some atom with the
///    same non-null part that is in delta(D, D2) but not in delta(D, D1).
///  - Literal: only the second alternative.
/// The literal reading is not reflexive and leaves spurious minimal instances
/// (redundant null insertions are never dominated), so Reflexive is the default.
enum class LeqReading { Reflexive, Literal };

/// D1 <=_D D2.
inline bool leq(const Instance& d1, const Instance& d2, const Instance& base, LeqReading reading = LeqReading::Reflexive) {
    auto delta1 = delta(base, d1);
    auto delta2 = delta(base, d2);
    for (const auto& a : delta1) {
        if (!a.has_null()) {
            if (!delta2.contains(a)) return false;
            continue;
        }
        if (reading == LeqReading::Reflexive && delta2.contains(a)) continue;
        bool found = false;
        for (const auto& b : delta2.atoms_of(a.predicate)) {
            if (covers_non_null_part(a, b) && !delta1.contains(b)) {
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

/// D1 <_D D2.
inline bool less(const Instance& d1, const Instance& d2, const Instance& base, LeqReading reading = LeqReading::Reflexive) {
    return leq(d1, d2, base, reading) && !leq(d2, d1, base, reading);
}

struct RepairOptions {
    std::size_t max_candidates = 24;
    LeqReading reading = LeqReading::Reflexive;
};

struct Repair {
    Instance instance;
    Instance delta;

    friend bool operator==(const Repair&, const Repair&) = default;
};

struct RepairSet {
    std::vector<Repair> repairs;
    std::size_t candidate_atoms = 0;      // size of the enumerated atom universe
    std::size_t consistent_candidates = 0;

    bool contains(const Instance& d) const {
        return std::any_of(repairs.begin(), repairs.end(), [&](const Repair& r) { return r.instance == d; });
    }
    std::set<Instance> instances() const {
        std::set<Instance> out;
        for (const auto& r : repairs) out.insert(r.instance);
        return out;
    }
};

namespace detail {

inline void require_non_conflicting(const ConstraintSet& ic) {
    auto cs = conflicts(ic);
    if (cs.empty()) return;
    std::string msg = "conflicting constraint set:";
    for (const auto& c : cs) msg += " " + c.nnc + " forbids null at " + to_string(c.position) + " quantified by " + c.referential + ";";
    throw Error(ErrorKind::ConflictingICSet, msg);
}

/// Every atom that can appear in a repair beyond D itself. Starting from D,
/// repeatedly add, for each unguarded antecedent match whose builtins fail,
/// every atom matching one of the consequent atoms (existential variables
/// ranging over the active domain). A repair never contains an inserted atom
/// outside this closure: dropping such atoms keeps consistency and yields a
/// strictly smaller instance under <=_D.
inline std::set<Atom> support_closure(const Instance& d, const ConstraintSet& ic, std::size_t limit) {
    auto domain = active_domain(d, ic);
    std::vector<Value> values(domain.begin(), domain.end());
    Instance current = d;

    std::vector<std::pair<const Constraint*, TransformedConstraint>> cs;
    for (const auto& c : ic) {
        if (c.kind != ConstraintKind::NNC && !c.consequent.empty()) cs.emplace_back(&c, transform(c));
    }

    bool changed = true;
    while (changed) {
        changed = false;
        std::vector<Atom> fresh;
        for (const auto& [c, t] : cs) {
            Binding binding;
            auto emit = [&]() {
                for (const auto& g : t.guards) {
                    if (binding.at(g).is_null()) return;
                }
                for (const auto& b : c->builtins) {
                    if (compare(b.op, eval_term(b.lhs, binding), eval_term(b.rhs, binding))) return;
                }
                for (const auto& q : c->consequent) {
                    std::vector<std::string> ex_vars;
                    for (const auto& term : q.terms) {
                        if (term.is_var() && c->is_existential(term.var_name()) &&
                            std::find(ex_vars.begin(), ex_vars.end(), term.var_name()) == ex_vars.end()) {
                            ex_vars.push_back(term.var_name());
                        }
                    }
                    std::vector<std::size_t> pick(ex_vars.size(), 0);
                    while (true) {
                        Binding local = binding;
                        for (std::size_t i = 0; i < ex_vars.size(); ++i) local[ex_vars[i]] = values[pick[i]];
                        Atom a{q.predicate, {}};
                        for (const auto& term : q.terms) a.args.push_back(eval_term(term, local));
                        if (!current.contains(a)) fresh.push_back(std::move(a));
                        std::size_t k = 0;
                        while (k < pick.size() && ++pick[k] == values.size()) pick[k++] = 0;
                        if (k == pick.size()) break;
                    }
                }
            };
            auto join = [&](auto& self, std::size_t k) -> void {
                if (k == c->antecedent.size()) {
                    emit();
                    return;
                }
                const auto& atom = c->antecedent[k];
                for (const auto& row : current.atoms_of(atom.predicate)) {
                    std::vector<std::string> bound;
                    if (unify_row(atom, row.args, binding, bound)) self(self, k + 1);
                    for (const auto& v : bound) binding.erase(v);
                }
            };
            join(join, 0);
        }
        for (auto& a : fresh) {
            if (current.insert(std::move(a))) changed = true;
        }
        if (current.size() - d.size() > limit) break;
    }
    return current.atoms();
}

/// Candidate instances as bit masks over an atom universe; bit i set means
/// atom i is toggled relative to D, so the mask is exactly delta(D, candidate).
class CandidateSpace {
public:
    CandidateSpace(const Instance& base, std::vector<Atom> universe) : base_(&base), universe_(std::move(universe)) {
        const auto n = universe_.size();
        match_.assign(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            if (universe_[i].has_null()) {
                null_atoms_.push_back(i);
            } else {
                non_null_ |= bit(i);
            }
            for (std::size_t j = 0; j < n; ++j) {
                if (i != j && covers_non_null_part(universe_[i], universe_[j])) match_[i] |= bit(j);
            }
        }
    }

    std::size_t size() const { return universe_.size(); }

    Instance instance(std::uint64_t mask) const {
        Instance out;
        for (std::size_t i = 0; i < universe_.size(); ++i) {
            bool in_base = base_->contains(universe_[i]);
            if (in_base != bool(mask & bit(i))) out.insert(universe_[i]);
        }
        return out;
    }

    Instance delta(std::uint64_t mask) const {
        Instance out;
        for (std::size_t i = 0; i < universe_.size(); ++i) {
            if (mask & bit(i)) out.insert(universe_[i]);
        }
        return out;
    }

    std::uint64_t mask_of(const Instance& d) const {
        std::uint64_t m = 0;
        for (std::size_t i = 0; i < universe_.size(); ++i) {
            if (base_->contains(universe_[i]) != d.contains(universe_[i])) m |= bit(i);
        }
        return m;
    }

    bool leq(std::uint64_t a, std::uint64_t b, LeqReading reading) const {
        if (a & non_null_ & ~b) return false;
        for (auto i : null_atoms_) {
            if (!(a & bit(i))) continue;
            if (reading == LeqReading::Reflexive && (b & bit(i))) continue;
            if (!(b & ~a & match_[i])) return false;
        }
        return true;
    }

    bool less(std::uint64_t a, std::uint64_t b, LeqReading reading) const {
        return leq(a, b, reading) && !leq(b, a, reading);
    }

    static std::uint64_t bit(std::size_t i) { return std::uint64_t{1} << i; }

private:
    const Instance* base_;
    std::vector<Atom> universe_;
    std::vector<std::uint64_t> match_;
    std::vector<std::size_t> null_atoms_;
    std::uint64_t non_null_ = 0;
};

inline std::vector<std::uint64_t> consistent_masks(const CandidateSpace& space, const ConsistencyChecker& checker) {
    std::vector<std::uint64_t> out;
    const std::uint64_t limit = CandidateSpace::bit(space.size());
    for (std::uint64_t m = 0; m < limit; ++m) {
        if (checker.consistent(space.instance(m))) out.push_back(m);
    }
    return out;
}

inline std::vector<Atom> bounded_universe(const Instance& d, const ConstraintSet& ic, const RepairOptions& opts,
                                          const Instance* extra = nullptr) {
    std::size_t hard_cap = std::min<std::size_t>(opts.max_candidates, 62);
    auto closure = support_closure(d, ic, hard_cap);
    if (extra) closure.insert(extra->begin(), extra->end());
    if (closure.size() > hard_cap) {
        throw Error(ErrorKind::CandidateSpaceTooLarge,
                    "candidate space has at least " + std::to_string(closure.size()) + " atoms; cap is " +
                        std::to_string(hard_cap));
    }
    return {closure.begin(), closure.end()};
}

}  // namespace detail

/// All <=_D-minimal instances satisfying IC under null-aware satisfaction.
///
/// The search ranges over subsets of the support closure of D, a finite
/// subset of the atoms over adom(D) u const(IC) u {null}. Throws
/// ConflictingICSet and CandidateSpaceTooLarge.
inline RepairSet repairs(const Instance& d, const ConstraintSet& ic, const RepairOptions& opts = {}) {
    detail::require_non_conflicting(ic);
    detail::CandidateSpace space(d, detail::bounded_universe(d, ic, opts));
    ConsistencyChecker checker(ic);
    auto masks = detail::consistent_masks(space, checker);

    RepairSet out;
    out.candidate_atoms = space.size();
    out.consistent_candidates = masks.size();
    for (auto m : masks) {
        bool minimal = std::none_of(masks.begin(), masks.end(),
                                    [&](std::uint64_t other) { return other != m && space.less(other, m, opts.reading); });
        if (minimal) out.repairs.push_back({space.instance(m), space.delta(m)});
    }
    std::sort(out.repairs.begin(), out.repairs.end(),
              [](const Repair& a, const Repair& b) { return a.instance < b.instance; });
    return out;
}

/// True iff `candidate` satisfies IC and no IC-satisfying instance is strictly
/// below it.
inline bool verify_repair(const Instance& d, const ConstraintSet& ic, const Instance& candidate,
                          const RepairOptions& opts = {}) {
    detail::require_non_conflicting(ic);
    ConsistencyChecker checker(ic);
    if (!checker.consistent(candidate)) return false;
    detail::CandidateSpace space(d, detail::bounded_universe(d, ic, opts, &candidate));
    auto target = space.mask_of(candidate);
    const std::uint64_t limit = detail::CandidateSpace::bit(space.size());
    for (std::uint64_t m = 0; m < limit; ++m) {
        if (m == target || !space.less(m, target, opts.reading)) continue;
        if (checker.consistent(space.instance(m))) return false;
    }
    return true;
}

}  // namespace nullcqa

#endif  // NULLCQA_REPAIR_HPP
