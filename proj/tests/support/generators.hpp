#pragma once

// Hand-rolled random term generators and small exhaustive enumerators.

#include <random>
#include <string>
#include <vector>

#include "acre/term.hpp"

namespace acre::gen {

struct TermGen {
    std::mt19937_64 rng;
    std::vector<std::string> constants{"a", "b", "lot1", "40", "doc123", "hello world", "quote\"d", "?x",
                                       "f(x)", "back\\slash", "tab\there", "-", "3.14"};
    std::vector<std::string> functors{"f", "g", "bid", "process"};
    std::vector<std::string> vars{"x", "y", "item", "amount"};
    int max_depth = 4;

    explicit TermGen(std::uint64_t seed) : rng(seed) {}

    std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
    bool chance(double p) { return std::bernoulli_distribution(p)(rng); }

    Term ground(int depth = 0) {
        if (depth + 1 >= max_depth || chance(0.45)) return Term::constant(constants[pick(constants.size())]);
        std::vector<Term> args(1 + pick(3), Term::anonymous());
        for (auto& a : args) a = ground(depth + 1);
        return Term::function(functors[pick(functors.size())], std::move(args));
    }

    Term variable() {
        if (chance(0.2)) return Term::anonymous();
        return Term::variable(vars[pick(vars.size())], chance(0.3) ? Mutability::Mutable : Mutability::Immutable);
    }

    Term any(int depth = 0) {
        if (depth + 1 >= max_depth || chance(0.45))
            return chance(0.4) ? variable() : Term::constant(constants[pick(constants.size())]);
        std::vector<Term> args(1 + pick(3), Term::anonymous());
        for (auto& a : args) a = any(depth + 1);
        return Term::function(functors[pick(functors.size())], std::move(args));
    }

    /// A pattern that matches `g`: random sub-terms are replaced by
    /// variables, reusing a name only for an equal sub-term.
    Term generalize(const Term& g, std::vector<std::pair<std::string, Term>>& used) {
        if (chance(0.3)) {
            if (chance(0.25)) return Term::anonymous();
            for (const auto& [name, value] : used)
                if (value == g && chance(0.5)) return Term::variable(name, chance(0.3) ? Mutability::Mutable : Mutability::Immutable);
            std::string name = "v" + std::to_string(used.size());
            used.emplace_back(name, g);
            return Term::variable(name, chance(0.3) ? Mutability::Mutable : Mutability::Immutable);
        }
        if (!g.is_function()) return g;
        std::vector<Term> args;
        for (const auto& a : g.args()) args.push_back(generalize(a, used));
        return Term::function(g.text(), std::move(args));
    }

    BindingSet bindings() {
        BindingSet b;
        for (const auto& v : vars)
            if (chance(0.5)) b.bind(v, ground(1));
        return b;
    }
};

/// Every term up to `depth` over the given atoms, with functions of arity 1
/// and 2 over `functors`.
inline std::vector<Term> enumerate(const std::vector<Term>& atoms, const std::vector<std::string>& functors,
                                   int depth) {
    std::vector<Term> level = atoms;
    for (int d = 1; d < depth; ++d) {
        std::vector<Term> next = atoms;
        for (const auto& f : functors) {
            for (const auto& a : level) next.push_back(Term::function(f, {a}));
            for (const auto& a : level)
                for (const auto& b : level) next.push_back(Term::function(f, {a, b}));
        }
        level = std::move(next);
    }
    return level;
}

}  // namespace acre::gen
