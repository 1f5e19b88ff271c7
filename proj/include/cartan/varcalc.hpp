#pragma once

// Variational layer: Euler-Lagrange and Hamilton-Cartan systems, local
// Lepage equivalents, slice dynamics and a formal Gotay-Nester algorithm
// over differential polynomials.

#include "cartan/eds.hpp"
#include "cartan/linalg.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cartan {

class SyzygyDetected : public std::runtime_error {
public:
    explicit SyzygyDetected(const std::string& w) : std::runtime_error("degree-n syzygy among generators: " + w) {}
};
class GeneratorNotZ1 : public std::runtime_error {
public:
    explicit GeneratorNotZ1(const std::string& w)
        : std::runtime_error("generator is not killed by two vertical contractions: " + w) {}
};
class NotUltralocal : public std::runtime_error {
public:
    explicit NotUltralocal(const std::string& w) : std::runtime_error("presymplectic form is not ultralocal: " + w) {}
};
class TauInvarianceFailed : public std::runtime_error {
public:
    explicit TauInvarianceFailed(const std::string& w)
        : std::runtime_error("Lie derivative along the time field leaves the ideal: " + w) {}
};
// Raised only internally; gotay_nester turns it into a warning.
class LeadingDerivativeUnsolvable : public std::runtime_error {
public:
    explicit LeadingDerivativeUnsolvable(const std::string& w)
        : std::runtime_error("constraint has no leading derivative to solve for: " + w) {}
};

struct VariationalProblem {
    ChartPtr chart;
    ExteriorSystem prolongation;  // may have no generators
    DiffForm lagrangian;          // degree n
    int lepage_sign = -1;
    // Optional names for the multipliers, one entry per prolongation
    // generator.  Components follow increasing base-position subsets.
    std::vector<std::string> multiplier_families;
    std::vector<std::vector<Symbol>> multiplier_names;
};

struct LepageProblem {
    ChartPtr chart;  // the problem chart with multiplier coordinates appended
    DiffForm lepage_form;
    std::vector<std::vector<Symbol>> multiplier_symbols;
    int n = 0;
};

ExteriorSystem euler_lagrange_eds(const VariationalProblem& p);
LepageProblem build_lepage_local(const VariationalProblem& p, uint64_t seed = 1);
// lepage_form minus lepage_sign * lagrangian, evaluated on a random integral
// element of the prolongation system extended by random multiplier rates.
// Zero when the Lepage contract holds there.
Rational lepage_contract_defect(const VariationalProblem& p, const LepageProblem& l, uint64_t seed);
// The contractions V -| d(lepage form) over vertical V, before closure.  Torsion
// of the system is measured against the algebraic ideal of these.
ExteriorSystem hamilton_cartan_contractions(const LepageProblem& l);
// Differential closure of the contractions; degree-n semibasic generators also
// contribute their coefficients as zero-forms.
ExteriorSystem hamilton_cartan(const LepageProblem& l);

// Differential polynomials.  Derivative symbols are interned once per
// (field, multi-index) and carry display names such as phi_xxy.
class JetSpace {
public:
    struct Jet {
        Symbol field;
        std::vector<int> counts;  // aligned with coords()
        int order() const;
    };

    JetSpace() = default;
    JetSpace(std::vector<Symbol> coords, std::vector<Symbol> fields);

    const std::vector<Symbol>& coords() const { return coords_; }
    const std::vector<Symbol>& fields() const { return fields_; }
    void add_field(Symbol f);
    int field_index(Symbol f) const;
    bool is_field(Symbol f) const { return field_index(f) >= 0; }

    Symbol jet(Symbol field, const std::vector<int>& counts) const;
    Symbol jet(Symbol field, Symbol coord) const;
    // Field or derivative symbol of a known field.
    std::optional<Jet> split(Symbol s) const;
    // Jets of `field` that occur in e.
    std::vector<Jet> jets_of(const Expr& e, Symbol field) const;
    // Does e involve any field or derivative symbol?
    bool involves_fields(const Expr& e) const;

    Expr total_derivative(const Expr& e, Symbol coord) const;
    Expr total_derivative(const Expr& e, const std::vector<int>& counts) const;
    // Variational derivative sum_J (-1)^|J| D_J (de/d field_J).
    Expr euler(const Expr& e, Symbol field) const;

    // Ranking: field position (later is higher), then order, then multi-index.
    // Returns true when a ranks above b.  Symbols that are not jets rank lowest.
    bool ranks_above(Symbol a, Symbol b) const;

private:
    std::vector<Symbol> coords_;
    std::vector<Symbol> fields_;
};

struct Density {
    std::vector<Symbol> slice_fields;
    Expr expression;
};

struct SliceDynamics {
    JetSpace jets;
    std::vector<Symbol> field_order;
    ExprMatrix omega;  // omega(X, Y) = sum_ab omega[a][b] X^a Y^b
    Density hamiltonian;
    ChartPtr slice_chart;
    Symbol time_coord;
    Rational time_value;
};

SliceDynamics slice_dynamics(const LepageProblem& l, Symbol time_coord, const Rational& value);

struct KernelBasis {
    std::vector<std::vector<Expr>> vectors;  // components over field_order
    std::vector<Expr> assumptions;           // nonvanishing denominators
};
KernelBasis kernel_omega(const SliceDynamics& s);

struct HamiltonianVector {
    Symbol test_symbol;
    Expr generator;                  // the density whose flow this is
    std::vector<Expr> components;    // over field_order
};
// Solves omega^T X = grad of the integral of f * constraint (f = test_symbol,
// registered as a field of the jet space).  nullopt when inconsistent or when
// X needs derivatives of f beyond max_ibp_order.
std::optional<HamiltonianVector> hamiltonian_vector(const SliceDynamics& s, const Expr& constraint, Symbol test_symbol,
                                                    int max_ibp_order);

// Oriented substitution field_J -> rhs, applied to every derivative of field_J.
struct SubstitutionRule {
    Symbol lhs;
    Expr rhs;
    size_t source = 0;  // index of the constraint it came from
};

// Repeated application of rules (and their total derivatives) up to a fixpoint.
Expr reduce_density(const JetSpace& jets, const std::vector<SubstitutionRule>& rules, const Expr& e,
                    long skip_source = -1);
// Solve e for its highest-ranked jet that occurs linearly with a nonzero
// constant coefficient.  Throws LeadingDerivativeUnsolvable.
SubstitutionRule orient(const JetSpace& jets, const Expr& e);

enum class RoundStatus { continuing, terminated, singular_split, budget };
std::string to_string(RoundStatus s);

struct ConstraintRound {
    std::vector<Density> new_constraints;
    std::vector<HamiltonianVector> complement_vectors;
    std::vector<Density> consequences_used;
    RoundStatus status = RoundStatus::continuing;
    std::vector<Expr> split_factors;  // residues that split into several field factors
};

struct ConstraintChain {
    JetSpace jets;
    std::vector<ConstraintRound> rounds;
    std::vector<SubstitutionRule> rules;
    std::vector<std::string> warnings;

    std::vector<Expr> constraints() const;  // all rounds, in order
    RoundStatus status() const { return rounds.empty() ? RoundStatus::continuing : rounds.back().status; }
};

struct GotayNesterOptions {
    int max_rounds = 12;
    int consequence_order = 2;
    int max_ibp_order = 8;
    std::vector<Expr> initial_constraints;  // imposed up front with the primary ones
};

ConstraintChain gotay_nester(const SliceDynamics& s, const GotayNesterOptions& opt = {});
ConstraintChain gotay_nester(const SliceDynamics& s, int max_rounds, int consequence_order);

struct Projection {
    std::vector<Expr> constraints;
    std::vector<std::string> notes;
};
// Eliminate the fields outside `keep` by linear substitution chains.
Projection eliminate_auxiliary(const JetSpace& jets, const std::vector<Expr>& constraints,
                               const std::vector<Symbol>& keep);
Projection eliminate_auxiliary(const ConstraintChain& chain, const std::vector<Symbol>& keep);

// Hamilton's equations on the final constraint set of a chain:
// sum_a omega[a][b] X^a = E_b(H), with X^a the time derivative of field a,
// plus tangency X(c) = 0 for every constraint free of slice derivatives.
// Coefficients are reduced by the chain rules and the system is brought to
// reduced echelon form, one equation per determined velocity.
struct EvolutionEquations {
    std::vector<Symbol> velocities;    // aligned with field_order
    std::vector<Symbol> determined;    // pivot velocity of each equation
    std::vector<Expr> values;          // determined[i] = values[i]
    std::vector<Symbol> undetermined;  // velocities left free
    std::vector<Expr> assumptions;
    bool consistent = true;

    std::vector<Expr> equations() const;  // determined[i] - values[i]
};
EvolutionEquations evolution_equations(const SliceDynamics& s, const ConstraintChain& ch);

// Drop members that reduce to zero modulo the others, keeping the first of
// each dependent pair; the rest is returned with unit leading coefficient.
std::vector<Expr> minimal_constraints(const JetSpace& jets, const std::vector<Expr>& cs);
// Both lists generate the same constraints: minimal sets agree up to scalars.
bool same_constraints(const JetSpace& jets, const std::vector<Expr>& a, const std::vector<Expr>& b);

struct DiracResult {
    ExteriorSystem slice_system;
    KuranishiResult kuranishi;
    ExteriorSystem hamilton_cartan;
};
DiracResult dirac_via_eds(const VariationalProblem& p, Symbol time_coord, const Rational& value, int max_steps,
                          uint64_t seed = 1);

// Densities forcing a section of the slice chart to be integral: the
// coefficients of each generator pulled back along the section, plus the
// zero-forms.
std::vector<Expr> section_constraints(const ExteriorSystem& slice, const JetSpace& jets);
JetSpace slice_jet_space(const ChartPtr& slice);

}  // namespace cartan
