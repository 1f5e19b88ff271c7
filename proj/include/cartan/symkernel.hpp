#pragma once

// Exact scalar arithmetic: multivariate polynomials and rational functions
// over arbitrary precision rationals.

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cartan {

using Rational = mpq_class;

class DivisionByZero : public std::runtime_error {
public:
    DivisionByZero() : std::runtime_error("division by the zero function") {}
};

class ZeroDenominatorAfterSubstitution : public std::runtime_error {
public:
    explicit ZeroDenominatorAfterSubstitution(const std::string& what)
        : std::runtime_error("zero denominator after substitution: " + what) {}
};

class GenericPointExhausted : public std::runtime_error {
public:
    GenericPointExhausted() : std::runtime_error("generic point search exhausted its retry budget") {}
};

// Interned symbol.  Ids are handed out in creation order, and the monomial
// order treats a smaller id as a larger variable, so declaring chart
// coordinates first makes grlex follow the declared order.
class Symbol {
public:
    Symbol() = default;
    explicit Symbol(const std::string& name);
    static Symbol from_id(uint32_t id);

    uint32_t id() const { return id_; }
    const std::string& name() const;
    bool valid() const { return id_ != invalid_id; }

    friend bool operator==(Symbol a, Symbol b) { return a.id_ == b.id_; }
    friend bool operator!=(Symbol a, Symbol b) { return a.id_ != b.id_; }
    friend bool operator<(Symbol a, Symbol b) { return a.id_ < b.id_; }

    static bool valid_name(const std::string& name);

private:
    static constexpr uint32_t invalid_id = 0xffffffffu;
    uint32_t id_ = invalid_id;
};

std::ostream& operator<<(std::ostream& os, Symbol s);

// Monomial: sorted (variable id, exponent) pairs, exponents > 0.
using Monomial = std::vector<std::pair<uint32_t, uint32_t>>;

unsigned total_degree(const Monomial& m);
// grlex: +1 if a > b, -1 if a < b, 0 if equal.
int grlex_compare(const Monomial& a, const Monomial& b);
Monomial mono_mul(const Monomial& a, const Monomial& b);
std::optional<Monomial> mono_div(const Monomial& a, const Monomial& b);
uint32_t mono_exponent(const Monomial& m, uint32_t var);

class Poly {
public:
    struct Term {
        Monomial mono;
        Rational coef;
    };

    Poly() = default;
    Poly(const Rational& c);
    Poly(long c) : Poly(Rational(c)) {}
    Poly(int c) : Poly(Rational(c)) {}
    explicit Poly(Symbol s);
    static Poly monomial(Monomial m, const Rational& c);
    static Poly from_terms(std::vector<Term> terms);

    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    bool is_one() const;
    bool is_monomial() const { return terms_.size() == 1; }
    Rational constant_value() const;  // pre: is_constant()
    const std::vector<Term>& terms() const { return terms_; }
    const Term& leading() const { return terms_.front(); }
    const Rational& leading_coef() const { return terms_.front().coef; }
    unsigned degree() const;
    unsigned degree_in(uint32_t var) const;
    std::vector<uint32_t> variables() const;
    bool contains(uint32_t var) const;

    Poly operator-() const;
    friend Poly operator+(const Poly& a, const Poly& b);
    friend Poly operator-(const Poly& a, const Poly& b);
    friend Poly operator*(const Poly& a, const Poly& b);
    Poly scaled(const Rational& c) const;
    Poly mul_monomial(const Monomial& m, const Rational& c) const;
    Poly pow(unsigned k) const;

    friend bool operator==(const Poly& a, const Poly& b);
    friend bool operator!=(const Poly& a, const Poly& b) { return !(a == b); }
    // total order used for deterministic containers
    static int compare(const Poly& a, const Poly& b);

    Poly partial(uint32_t var) const;
    Rational evaluate(const std::map<uint32_t, Rational>& point) const;
    // Evaluates only the bound variables.
    Poly evaluate_partial(const std::map<uint32_t, Rational>& point) const;

    // Coefficients as a polynomial in var: degree -> coefficient.
    std::map<unsigned, Poly> coefficients_in(uint32_t var) const;
    static Poly from_coefficients(uint32_t var, const std::map<unsigned, Poly>& coeffs);

    // Monomial content: the gcd of all monomials.
    Monomial monomial_content() const;
    // Scale so the leading coefficient is 1 (zero stays zero).
    Poly monic() const;

    std::string str() const;
    size_t hash() const;

private:
    std::vector<Term> terms_;  // sorted by grlex descending, no zero coefs
    void normalize();
};

// Exact division, nullopt if b does not divide a.
std::optional<Poly> divide_exact(const Poly& a, const Poly& b);
// Monic gcd of two polynomials (gcd(0,0) = 0).
Poly poly_gcd(const Poly& a, const Poly& b);

// Canonical rational function: gcd(num, den) = 1, den monic.
class Expr {
public:
    Expr() : num_(), den_(1) {}
    Expr(const Rational& c) : num_(c), den_(1) {}
    Expr(long c) : Expr(Rational(c)) {}
    Expr(int c) : Expr(Rational(c)) {}
    Expr(Symbol s) : num_(s), den_(1) {}
    Expr(Poly p) : num_(std::move(p)), den_(1) {}
    static Expr fraction(const Poly& num, const Poly& den);
    static Expr rational(long n, long d) { return Expr(Rational(n, d)); }

    const Poly& num() const { return num_; }
    const Poly& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }
    bool is_one() const { return num_.is_one() && den_.is_one(); }
    bool is_constant() const { return num_.is_constant() && den_.is_constant(); }
    bool is_polynomial() const { return den_.is_one(); }
    Rational constant_value() const;
    std::vector<uint32_t> variables() const;
    bool depends_on(Symbol s) const { return num_.contains(s.id()) || den_.contains(s.id()); }

    Expr operator-() const;
    friend Expr operator+(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b);
    friend Expr operator/(const Expr& a, const Expr& b);
    Expr& operator+=(const Expr& b) { return *this = *this + b; }
    Expr& operator-=(const Expr& b) { return *this = *this - b; }
    Expr& operator*=(const Expr& b) { return *this = *this * b; }
    Expr pow(int k) const;

    friend bool operator==(const Expr& a, const Expr& b) { return a.num_ == b.num_ && a.den_ == b.den_; }
    friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }
    static int compare(const Expr& a, const Expr& b);

    // Evaluation at a rational point.  Throws DivisionByZero on a pole.
    Rational evaluate(const std::map<uint32_t, Rational>& point) const;
    // Evaluates only bound variables.
    Expr evaluate_partial(const std::map<uint32_t, Rational>& point) const;

    std::string str() const;

private:
    Poly num_;
    Poly den_;
};

std::ostream& operator<<(std::ostream& os, const Expr& e);
std::ostream& operator<<(std::ostream& os, const Poly& p);

using Bindings = std::map<Symbol, Expr>;
using Point = std::map<uint32_t, Rational>;

Expr partial(const Expr& e, Symbol s);
Expr substitute(const Expr& e, const Bindings& bindings);
Point generic_point(const std::vector<Symbol>& symbols, const std::vector<Expr>& avoid, uint64_t seed);

struct Factorization {
    Rational unit;                 // numeric content
    std::vector<Expr> factors;     // with multiplicity, monic-normalized
    bool irreducible_flag = false;  // some factor could not be split further
};
Factorization factor_simple_full(const Expr& e);
std::vector<Expr> factor_simple(const Expr& e);

// Pretty name hook: symbols may carry a display name (e.g. jet labels).
void set_display_name(Symbol s, const std::string& display);
std::string display_name(Symbol s);

}  // namespace cartan
