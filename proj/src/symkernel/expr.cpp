#include "cartan/symkernel.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace cartan {

Expr Expr::fraction(const Poly& num, const Poly& den) {
    if (den.is_zero()) throw DivisionByZero();
    Expr r;
    if (num.is_zero()) return r;
    if (den.is_constant()) {
        r.num_ = num.scaled(1 / den.constant_value());
        return r;
    }
    Poly g = poly_gcd(num, den);
    Poly n = g.is_one() ? num : *divide_exact(num, g);
    Poly d = g.is_one() ? den : *divide_exact(den, g);
    Rational lc = d.leading_coef();
    if (lc != 1) {
        Rational inv = 1 / lc;
        n = n.scaled(inv);
        d = d.scaled(inv);
    }
    r.num_ = std::move(n);
    r.den_ = std::move(d);
    return r;
}

Rational Expr::constant_value() const { return num_.constant_value() / den_.constant_value(); }

std::vector<uint32_t> Expr::variables() const {
    auto a = num_.variables();
    auto b = den_.variables();
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

Expr Expr::operator-() const {
    Expr r = *this;
    r.num_ = -r.num_;
    return r;
}

Expr operator+(const Expr& a, const Expr& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.den_.is_one() && b.den_.is_one()) return Expr(a.num_ + b.num_);
    if (b.den_.is_one()) {
        // a/d + c = (a + c d)/d, still coprime
        Expr r;
        r.num_ = a.num_ + b.num_ * a.den_;
        r.den_ = r.num_.is_zero() ? Poly(1) : a.den_;
        return r;
    }
    if (a.den_.is_one()) return b + a;
    if (a.den_ == b.den_) return Expr::fraction(a.num_ + b.num_, a.den_);
    Poly g = poly_gcd(a.den_, b.den_);
    if (g.is_one()) return Expr::fraction(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
    Poly ad = *divide_exact(a.den_, g);
    Poly bd = *divide_exact(b.den_, g);
    return Expr::fraction(a.num_ * bd + b.num_ * ad, ad * b.den_);
}

Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

Expr operator*(const Expr& a, const Expr& b) {
    if (a.is_zero() || b.is_zero()) return Expr();
    if (a.den_.is_one() && b.den_.is_one()) return Expr(a.num_ * b.num_);
    if (a.is_constant()) {
        Expr r = b;
        r.num_ = r.num_.scaled(a.constant_value());
        return r;
    }
    if (b.is_constant()) return b * a;
    // cross cancellation keeps the result canonical
    Poly g1 = a.den_.is_one() ? Poly(1) : poly_gcd(b.num_, a.den_);
    Poly g2 = b.den_.is_one() ? Poly(1) : poly_gcd(a.num_, b.den_);
    Poly an = g2.is_one() ? a.num_ : *divide_exact(a.num_, g2);
    Poly bd = g2.is_one() ? b.den_ : *divide_exact(b.den_, g2);
    Poly bn = g1.is_one() ? b.num_ : *divide_exact(b.num_, g1);
    Poly ad = g1.is_one() ? a.den_ : *divide_exact(a.den_, g1);
    Poly n = an * bn;
    Poly d = ad * bd;
    Rational lc = d.leading_coef();
    Expr r;
    if (lc != 1) {
        n = n.scaled(1 / lc);
        d = d.scaled(1 / lc);
    }
    r.num_ = std::move(n);
    r.den_ = std::move(d);
    return r;
}

Expr operator/(const Expr& a, const Expr& b) {
    if (b.is_zero()) throw DivisionByZero();
    Expr inv;
    inv.num_ = b.den_;
    inv.den_ = b.num_;
    Rational lc = inv.den_.leading_coef();
    if (lc != 1) {
        inv.num_ = inv.num_.scaled(1 / lc);
        inv.den_ = inv.den_.scaled(1 / lc);
    }
    return a * inv;
}

Expr Expr::pow(int k) const {
    if (k < 0) return Expr(1) / pow(-k);
    Expr r;
    r.num_ = num_.pow(static_cast<unsigned>(k));
    r.den_ = den_.pow(static_cast<unsigned>(k));
    return r;
}

int Expr::compare(const Expr& a, const Expr& b) {
    int c = Poly::compare(a.num_, b.num_);
    if (c) return c;
    return Poly::compare(a.den_, b.den_);
}

Rational Expr::evaluate(const std::map<uint32_t, Rational>& point) const {
    Rational d = den_.evaluate(point);
    if (d == 0) throw DivisionByZero();
    return num_.evaluate(point) / d;
}

Expr Expr::evaluate_partial(const std::map<uint32_t, Rational>& point) const {
    if (den_.is_one()) return Expr(num_.evaluate_partial(point));
    Poly d = den_.evaluate_partial(point);
    if (d.is_zero()) throw DivisionByZero();
    return fraction(num_.evaluate_partial(point), d);
}

std::string Expr::str() const {
    if (den_.is_one()) return num_.str();
    std::ostringstream os;
    bool nt = num_.terms().size() > 1;
    bool dt = den_.terms().size() > 1 || (den_.terms().size() == 1 && den_.leading().mono.size() > 1) ||
              (den_.terms().size() == 1 && den_.leading().coef != 1 && !den_.leading().mono.empty());
    if (nt) os << "(";
    os << num_.str();
    if (nt) os << ")";
    os << "/";
    if (dt) os << "(";
    os << den_.str();
    if (dt) os << ")";
    return os.str();
}

std::ostream& operator<<(std::ostream& os, const Expr& e) { return os << e.str(); }

Expr partial(const Expr& e, Symbol s) {
    if (!e.depends_on(s)) return Expr();
    Poly dn = e.num().partial(s.id());
    if (e.den().is_one()) return Expr(dn);
    Poly dd = e.den().partial(s.id());
    return Expr::fraction(dn * e.den() - e.num() * dd, e.den() * e.den());
}

namespace {

Expr substitute_poly(const Poly& p, const Bindings& bindings, std::map<std::pair<uint32_t, uint32_t>, Expr>& powers) {
    // group terms whose substituted parts are polynomial to avoid gcds
    Poly poly_part;
    Expr frac_part;
    for (auto& t : p.terms()) {
        Poly term_poly = Poly::monomial({}, t.coef);
        Monomial kept;
        Expr term_frac(1);
        bool has_frac = false;
        for (auto& [v, e] : t.mono) {
            auto it = bindings.find(Symbol::from_id(v));
            if (it == bindings.end()) {
                kept.emplace_back(v, e);
                continue;
            }
            auto key = std::make_pair(v, e);
            auto pit = powers.find(key);
            if (pit == powers.end()) pit = powers.emplace(key, it->second.pow(static_cast<int>(e))).first;
            const Expr& val = pit->second;
            if (val.is_polynomial()) {
                term_poly = term_poly * val.num();
            } else {
                term_frac = term_frac * val;
                has_frac = true;
            }
        }
        term_poly = term_poly.mul_monomial(kept, 1);
        if (has_frac) frac_part = frac_part + term_frac * Expr(term_poly);
        else poly_part = poly_part + term_poly;
    }
    return frac_part + Expr(poly_part);
}

}  // namespace

Expr substitute(const Expr& e, const Bindings& bindings) {
    if (bindings.empty()) return e;
    bool touches = false;
    for (uint32_t v : e.variables())
        if (bindings.count(Symbol::from_id(v))) {
            touches = true;
            break;
        }
    if (!touches) return e;
    std::map<std::pair<uint32_t, uint32_t>, Expr> powers;
    Expr n = substitute_poly(e.num(), bindings, powers);
    if (e.den().is_one()) return n;
    Expr d = substitute_poly(e.den(), bindings, powers);
    if (d.is_zero()) throw ZeroDenominatorAfterSubstitution(e.str());
    return n / d;
}

Point generic_point(const std::vector<Symbol>& symbols, const std::vector<Expr>& avoid, uint64_t seed) {
    Point pt;
    if (symbols.empty()) {
        for (auto& a : avoid)
            if (a.is_zero()) throw GenericPointExhausted();
        return pt;
    }
    std::mt19937_64 rng(seed);
    long range = 9;
    for (int widen = 0; widen < 6; ++widen, range *= 4) {
        std::uniform_int_distribution<long> num(-range, range);
        std::uniform_int_distribution<long> den(1, std::max(2L, range / 3));
        for (int attempt = 0; attempt < 40; ++attempt) {
            pt.clear();
            for (auto s : symbols) {
                long n = 0;
                while (n == 0) n = num(rng);
                pt[s.id()] = Rational(n, den(rng));
                pt[s.id()].canonicalize();
            }
            bool ok = true;
            for (auto& a : avoid) {
                try {
                    if (a.evaluate_partial(pt).is_zero()) {
                        ok = false;
                        break;
                    }
                } catch (const DivisionByZero&) {
                    ok = false;
                    break;
                }
            }
            if (ok) return pt;
        }
    }
    throw GenericPointExhausted();
}

// ---- limited factorization ----

namespace {

void factor_rec(const Poly& p, Factorization& out) {
    if (p.is_constant()) {
        out.unit *= p.constant_value();
        return;
    }
    // monomial content
    Monomial mc = p.monomial_content();
    Poly q = p;
    if (!mc.empty()) {
        for (auto& [v, e] : mc)
            for (uint32_t i = 0; i < e; ++i) out.factors.push_back(Expr(Symbol::from_id(v)));
        q = *divide_exact(p, Poly::monomial(mc, 1));
        if (q.is_constant()) {
            out.unit *= q.constant_value();
            return;
        }
    }
    Rational lc = q.leading_coef();
    q = q.monic();
    out.unit *= lc;
    // P = A v + B with A, B free of v: gcd(A, B) splits off, P/g is irreducible
    for (uint32_t v : q.variables()) {
        if (q.degree_in(v) != 1) continue;
        auto cs = q.coefficients_in(v);
        Poly A = cs[1];
        Poly B = cs.count(0) ? cs[0] : Poly();
        Poly g = poly_gcd(A, B);
        Poly rest = g.is_one() ? q : *divide_exact(q, g);
        Rational rl = rest.leading_coef();
        out.factors.push_back(Expr(rest.monic()));
        out.unit *= rl;
        if (!g.is_one()) factor_rec(g, out);
        return;
    }
    out.factors.push_back(Expr(q));
    out.irreducible_flag = true;
}

}  // namespace

Factorization factor_simple_full(const Expr& e) {
    if (!e.is_polynomial()) throw std::invalid_argument("factor_simple: expression is not polynomial");
    Factorization f;
    f.unit = 1;
    if (e.is_zero()) {
        f.unit = 0;
        return f;
    }
    factor_rec(e.num(), f);
    std::stable_sort(f.factors.begin(), f.factors.end(),
                     [](const Expr& a, const Expr& b) { return Expr::compare(a, b) > 0; });
    return f;
}

std::vector<Expr> factor_simple(const Expr& e) {
    auto f = factor_simple_full(e);
    if (f.factors.empty()) return {e};
    return f.factors;
}

}  // namespace cartan
