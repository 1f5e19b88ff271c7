#pragma once

// Exterior differential systems: closure, integral elements, polar spaces,
// characters, prolongation and the Cartan-Kuranishi loop.

#include "cartan/forms.hpp"

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace cartan {

class NotSolvable : public std::runtime_error {
public:
    explicit NotSolvable(const std::string& w) : std::runtime_error("not solvable: " + w) {}
};
class NotIntegralFlag : public std::runtime_error {
public:
    NotIntegralFlag() : std::runtime_error("flag is not made of integral elements") {}
};
class NotCoordinateSolvable : public std::runtime_error {
public:
    explicit NotCoordinateSolvable(const std::string& w)
        : std::runtime_error("zero-form is not coordinate-solvable: " + w) {}
};
class BudgetExhausted : public std::runtime_error {
public:
    explicit BudgetExhausted(const std::string& w) : std::runtime_error("budget exhausted: " + w) {}
};

struct ExteriorSystem {
    ChartPtr chart;
    std::vector<DiffForm> generators;
    std::vector<Expr> zero_forms;
    std::vector<Symbol> independence;
    bool closed = false;
};

std::string describe(const ExteriorSystem& s);

// Normal form modulo the algebraic ideal.  Degree-one generators are solved
// for fiber differentials; higher generators rewrite their leading monomial.
DiffForm algebraic_reduce(const ExteriorSystem& s, const DiffForm& a);
// Exact ideal membership test at a generic point (linear algebra).
bool in_algebraic_ideal(const ExteriorSystem& s, const DiffForm& a, uint64_t seed = 1);
ExteriorSystem differential_closure(const ExteriorSystem& s);

struct Branch {
    std::string id;
    std::map<Symbol, Expr> solved;          // graph symbol -> value
    std::map<Symbol, Expr> coordinate_bindings;  // coordinates fixed by zero-forms
    std::vector<Expr> zero_forms;           // equations in the coordinates alone
    std::vector<Expr> residual_equations;   // unresolved equations with graph symbols
    std::vector<Expr> assumptions;          // expressions assumed nonzero
    std::vector<std::string> flags;
    bool analyzed = true;

    // All defining equations as polynomials (numerators).
    std::vector<Expr> defining_equations() const;
};

struct IntegralVariety {
    ExteriorSystem system;
    int n = 0;
    std::vector<Symbol> fibers;                    // rows of graph_symbols
    std::vector<std::vector<Symbol>> graph_symbols;  // [fiber][base direction]
    std::vector<Expr> equations;                   // generator evaluations
    std::vector<Branch> branches;
    std::vector<std::string> warnings;

    bool is_graph_symbol(Symbol s) const;
};

IntegralVariety integral_variety(const ExteriorSystem& s, int n, uint64_t seed = 1);

struct Flag {
    Point point;                                  // coordinates and graph symbols
    std::vector<std::vector<Rational>> vectors;   // components over chart coords
    std::vector<int> order;                       // base directions in flag order
};

// A generic point on a branch and the graph vectors there, ordered by `order`
// (a permutation of base positions; empty = declared order).
Flag make_flag(const IntegralVariety& v, size_t branch, uint64_t seed, const std::vector<int>& order = {});

// Same point, but the flag runs along random linear combinations of the base
// directions (for coordinates that are not delta-regular).
Flag make_generic_flag(const IntegralVariety& v, size_t branch, uint64_t seed);

struct PolarSpace {
    std::vector<std::vector<Rational>> basis;
    int codim = 0;
    int reduced_codim = 0;
};
// H(E_k): the polar space of the first k flag vectors.
PolarSpace polar_space(const ExteriorSystem& s, const Flag& f, size_t k);

struct CharacterReport {
    std::vector<int> characters;
    std::vector<int> reduced_characters;
    int variety_codim = 0;
    int cartan_sum = 0;
    bool involutive_at_flag = false;
    std::string branch_id;
    bool stable = true;            // agreement across seeds
    bool nested = true;            // polar spaces shrink along the flag
    std::vector<std::string> notes;
};

CharacterReport characters(const ExteriorSystem& s, const Flag& f, const Branch& b, const IntegralVariety& v);
// Characters at three seeds, checking agreement.
CharacterReport characters(const IntegralVariety& v, size_t branch, uint64_t seed = 1,
                           const std::vector<int>& order = {});

// Pick the branch the Cartan-Kuranishi loop follows: first analyzed branch
// without unresolved equations.
size_t principal_branch(const IntegralVariety& v);

ExteriorSystem prolong(const IntegralVariety& v, size_t branch);
ExteriorSystem prolong(const ExteriorSystem& s, int n, uint64_t seed = 1);
// Zero-forms forced along the way (coefficients of generators that become
// semibasic) are appended to `derived` when given.
ExteriorSystem restrict_zero_forms(const ExteriorSystem& s, std::vector<Expr>* derived = nullptr);

struct SurfacedZeroForm {
    int step;
    Expr expr;
};

struct KuranishiResult {
    ExteriorSystem final;
    std::vector<CharacterReport> trace;
    std::vector<SurfacedZeroForm> surfaced_zero_forms;
    bool involutive = false;
    bool budget_exhausted = false;
};
KuranishiResult cartan_kuranishi(const ExteriorSystem& s, int n, int max_steps, uint64_t seed = 1);

ExteriorSystem slice_eds(const ExteriorSystem& s, Symbol time_coord, const Rational& value);

// Display name for a jet label, e.g. phi_xxy.
std::string jet_display(const Chart& c, const JetLabel& j);

// Evaluate a form on vectors (components over chart coords).
Expr evaluate_on(const DiffForm& f, const std::vector<std::vector<Expr>>& vecs);

}  // namespace cartan
