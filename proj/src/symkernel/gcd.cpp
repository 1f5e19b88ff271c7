// Exact multivariate division and gcd (recursive primitive PRS).

#include "cartan/symkernel.hpp"

#include <algorithm>

namespace cartan {

std::optional<Poly> divide_exact(const Poly& a, const Poly& b) {
    if (b.is_zero()) throw DivisionByZero();
    if (a.is_zero()) return Poly();
    if (b.is_constant()) return a.scaled(1 / b.constant_value());
    if (b.is_monomial()) {
        std::vector<Poly::Term> ts;
        ts.reserve(a.terms().size());
        const auto& bt = b.leading();
        for (auto& t : a.terms()) {
            auto m = mono_div(t.mono, bt.mono);
            if (!m) return std::nullopt;
            ts.push_back({std::move(*m), t.coef / bt.coef});
        }
        return Poly::from_terms(std::move(ts));
    }
    // quick degree rejection
    for (uint32_t v : b.variables())
        if (a.degree_in(v) < b.degree_in(v)) return std::nullopt;
    Poly r = a;
    std::vector<Poly::Term> q;
    const auto& lt = b.leading();
    Rational inv = 1 / lt.coef;
    while (!r.is_zero()) {
        const auto& rt = r.leading();
        auto m = mono_div(rt.mono, lt.mono);
        if (!m) return std::nullopt;
        Rational c = rt.coef * inv;
        r = r - b.mul_monomial(*m, c);
        q.push_back({std::move(*m), c});
    }
    return Poly::from_terms(std::move(q));
}

namespace {

Poly monomial_gcd_poly(const Monomial& a, const Monomial& b) {
    Monomial g;
    for (auto& [v, e] : a) {
        uint32_t x = mono_exponent(b, v);
        if (x) g.emplace_back(v, std::min(e, x));
    }
    return Poly::monomial(g, 1);
}

Poly gcd_rec(const Poly& a, const Poly& b);

// gcd of all coefficients of p viewed as a polynomial in var, combined with g
Poly content_gcd(const Poly& p, uint32_t var, Poly g) {
    for (auto& [e, c] : p.coefficients_in(var)) {
        g = g.is_zero() ? c.monic() : gcd_rec(g, c);
        if (g.is_one()) break;
    }
    return g;
}

Poly pseudo_remainder(const Poly& a, const Poly& b, uint32_t var) {
    auto bc = b.coefficients_in(var);
    unsigned db = bc.rbegin()->first;
    Poly lb = bc.rbegin()->second;
    Poly r = a;
    while (!r.is_zero()) {
        unsigned dr = r.degree_in(var);
        if (dr < db) break;
        auto rc = r.coefficients_in(var);
        Poly lr = rc.rbegin()->second;
        Monomial xm;
        if (dr - db) xm.emplace_back(var, dr - db);
        r = r * lb - (b * lr).mul_monomial(xm, 1);
    }
    return r;
}

Poly primitive_part(const Poly& p, uint32_t var) {
    Poly c = content_gcd(p, var, Poly());
    if (c.is_one()) return p;
    auto q = divide_exact(p, c);
    return *q;
}

Poly gcd_rec(const Poly& a, const Poly& b) {
    if (a.is_zero()) return b.monic();
    if (b.is_zero()) return a.monic();
    if (a.is_constant() || b.is_constant()) return Poly(1);
    if (a == b) return a.monic();
    if (a.is_monomial() || b.is_monomial()) {
        const Poly& m = a.is_monomial() ? a : b;
        const Poly& o = a.is_monomial() ? b : a;
        return monomial_gcd_poly(m.leading().mono, o.monomial_content());
    }
    auto va = a.variables();
    auto vb = b.variables();
    // a variable occurring in one input only: gcd divides the content there
    for (uint32_t v : va)
        if (!std::binary_search(vb.begin(), vb.end(), v)) return content_gcd(a, v, b.monic());
    for (uint32_t v : vb)
        if (!std::binary_search(va.begin(), va.end(), v)) return content_gcd(b, v, a.monic());
    // common main variable: pick the one of smallest max degree
    uint32_t var = va[0];
    unsigned best = ~0u;
    for (uint32_t v : va) {
        unsigned d = std::max(a.degree_in(v), b.degree_in(v));
        if (d < best) {
            best = d;
            var = v;
        }
    }
    Poly ca = content_gcd(a, var, Poly());
    Poly cb = content_gcd(b, var, Poly());
    Poly cg = gcd_rec(ca, cb);
    Poly pa = ca.is_one() ? a : *divide_exact(a, ca);
    Poly pb = cb.is_one() ? b : *divide_exact(b, cb);
    if (pa.degree_in(var) < pb.degree_in(var)) std::swap(pa, pb);
    while (!pb.is_zero() && pb.degree_in(var) > 0) {
        Poly r = pseudo_remainder(pa, pb, var);
        pa = std::move(pb);
        pb = r.is_zero() ? r : primitive_part(r, var).monic();
    }
    Poly g;
    if (pb.is_zero()) g = primitive_part(pa, var);
    else g = Poly(1);  // remainder free of var: primitive parts are coprime
    return (g * cg).monic();
}

}  // namespace

Poly poly_gcd(const Poly& a, const Poly& b) { return gcd_rec(a, b); }

}  // namespace cartan
