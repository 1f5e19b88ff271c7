#pragma once

// Exterior algebra and calculus on coordinate charts.

#include "cartan/symkernel.hpp"

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace cartan {

class ChartMismatch : public std::runtime_error {
public:
    ChartMismatch() : std::runtime_error("forms live on different charts") {}
};
class DegreeZero : public std::runtime_error {
public:
    DegreeZero() : std::runtime_error("interior product of a 0-form") {}
};
class NoMetric : public std::runtime_error {
public:
    NoMetric() : std::runtime_error("chart has no metric") {}
};
class NotSemibasic : public std::runtime_error {
public:
    NotSemibasic() : std::runtime_error("form is not semibasic") {}
};
class BadChartLabeling : public std::runtime_error {
public:
    explicit BadChartLabeling(const std::string& w) : std::runtime_error("bad chart labeling: " + w) {}
};

// A fiber coordinate that stands for a component of a base form, e.g. F01
// is the dx0^dx1 component of the family F.  `label` holds base positions.
struct FamilyMember {
    Symbol coord;
    std::vector<int> label;
};

// Jet coordinate: the derivative of `root` along the base positions `multi`.
struct JetLabel {
    Symbol root;
    std::vector<int> multi;  // sorted base positions
};

struct Chart {
    std::string name;
    std::vector<Symbol> coords;
    std::vector<Symbol> base;       // ordered; orientation follows this order
    std::vector<Rational> metric;   // diagonal, aligned with base; empty if none
    std::vector<std::string> family_order;
    std::map<std::string, std::vector<FamilyMember>> families;
    std::map<uint32_t, JetLabel> jets;  // keyed by symbol id

    int index(Symbol s) const;          // position in coords, -1 if absent
    int base_position(Symbol s) const;  // position in base, -1 if absent
    bool has(Symbol s) const { return index(s) >= 0; }
    bool is_base(Symbol s) const { return base_position(s) >= 0; }
    std::vector<Symbol> fibers() const;
    size_t dim() const { return coords.size(); }
    bool same_as(const Chart& o) const { return coords == o.coords && base == o.base; }
    // Which family (and label) a coordinate belongs to; nullptr if none.
    const FamilyMember* family_member(Symbol s, std::string* family = nullptr) const;
};

using ChartPtr = std::shared_ptr<const Chart>;

ChartPtr make_chart(const std::string& name, const std::vector<Symbol>& base, const std::vector<Symbol>& fibers,
                    const std::vector<Rational>& metric = {});

// Chart with the coordinate `coord` removed (a coordinate slice).
ChartPtr slice_chart(const ChartPtr& c, Symbol coord);

using Index = std::vector<uint16_t>;

class DiffForm {
public:
    DiffForm() = default;
    DiffForm(ChartPtr chart, int degree) : chart_(std::move(chart)), degree_(degree) {}
    static DiffForm scalar(ChartPtr chart, const Expr& f);
    static DiffForm d_coord(ChartPtr chart, Symbol s);
    static DiffForm basis(ChartPtr chart, const Index& idx, const Expr& c);

    const ChartPtr& chart() const { return chart_; }
    int degree() const { return degree_; }
    const std::map<Index, Expr>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    Expr coefficient(const Index& idx) const;
    // the 0-form value (pre: degree 0)
    Expr value() const;
    void add_term(const Index& idx, const Expr& c);  // idx must be increasing

    DiffForm operator-() const;
    friend DiffForm operator+(const DiffForm& a, const DiffForm& b);
    friend DiffForm operator-(const DiffForm& a, const DiffForm& b);
    friend DiffForm operator*(const Expr& f, const DiffForm& a);
    DiffForm& operator+=(const DiffForm& b) { return *this = *this + b; }
    friend bool operator==(const DiffForm& a, const DiffForm& b);
    friend bool operator!=(const DiffForm& a, const DiffForm& b) { return !(a == b); }

    // Coefficient-level substitution (does not transform differentials).
    DiffForm substitute_coefficients(const Bindings& b) const;
    DiffForm evaluate_coefficients(const Point& p) const;
    DiffForm on_chart(ChartPtr other) const;  // re-index onto a chart containing all used coords

    bool is_semibasic() const;
    bool uses_differential(Symbol s) const;
    std::vector<Symbol> differentials_used() const;
    std::vector<uint32_t> coefficient_variables() const;

    // Sign-normalized copy (leading numeric coefficient positive).
    DiffForm sign_normalized() const;
    std::string str() const;

private:
    ChartPtr chart_;
    int degree_ = 0;
    std::map<Index, Expr> terms_;
};

std::ostream& operator<<(std::ostream& os, const DiffForm& f);

// Sign of merging two sorted disjoint index tuples, 0 if they overlap.
int merge_sign(const Index& a, const Index& b, Index& out);

struct VectorField {
    ChartPtr chart;
    std::map<Symbol, Expr> components;
    static VectorField coordinate(ChartPtr chart, Symbol s);
    Expr apply(const Expr& f) const;  // X(f)
};

struct ChartMap {
    ChartPtr source;
    ChartPtr target;
    std::map<Symbol, Expr> images;  // target coord -> expression on source
};

DiffForm wedge(const DiffForm& a, const DiffForm& b);
DiffForm exterior_derivative(const DiffForm& a);
inline DiffForm d(const DiffForm& a) { return exterior_derivative(a); }
DiffForm interior_product(const VectorField& X, const DiffForm& a);
DiffForm lie_derivative(const VectorField& X, const DiffForm& a);
DiffForm pullback(const ChartMap& f, const DiffForm& a);
ChartMap compose(const ChartMap& f, const ChartMap& g);  // f after g
ChartMap slice_inclusion(const ChartPtr& chart, Symbol coord, const Rational& value);
DiffForm restrict_to_slice(const DiffForm& a, Symbol coord, const Rational& value);
DiffForm hodge_star_semibasic(const DiffForm& a);
DiffForm canonical_form(const ChartPtr& chart, const std::string& family);
DiffForm canonical_form(const ChartPtr& chart, int k);

}  // namespace cartan
