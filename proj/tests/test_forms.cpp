#include "doctest.h"

#include "cartan/forms.hpp"
#include "test_util.hpp"

#include <random>

using namespace cartan;
using namespace cartan::testing;

TEST_CASE("wedge examples") {
    auto c = make_chart("R3", {Symbol("x"), Symbol("y")}, {Symbol("u")});
    auto dx = DiffForm::d_coord(c, Symbol("x"));
    auto dy = DiffForm::d_coord(c, Symbol("y"));
    auto dxdy = wedge(dx, dy);
    CHECK(dxdy.coefficient({0, 1}) == Expr(1));
    CHECK(wedge(dy, dx) == -dxdy);
    auto a = Expr(Symbol("u")) * dx + dy;
    CHECK(wedge(a, a).is_zero());
    auto other = make_chart("other", {Symbol("x")}, {});
    CHECK_THROWS_AS(wedge(dx, DiffForm::d_coord(other, Symbol("x"))), ChartMismatch);
}

TEST_CASE("multiplier wedge contact form gives the field theory n-form term") {
    // m = m0 dx1 - m1 dx0 (an n-1 form for n = 2), theta = du - u0 dx0 - u1 dx1
    Symbol x0("x0"), x1("x1"), u("u"), u0("u_0"), u1("u_1"), m0("m0"), m1("m1");
    auto c = make_chart("J1", {x0, x1}, {u, u0, u1, m0, m1});
    auto m = Expr(m0) * DiffForm::d_coord(c, x1) - Expr(m1) * DiffForm::d_coord(c, x0);
    auto th = DiffForm::d_coord(c, u) - Expr(u0) * DiffForm::d_coord(c, x0) - Expr(u1) * DiffForm::d_coord(c, x1);
    auto w = wedge(m, th);
    CHECK(w.degree() == 2);
    // the dx0^dx1 part is m0 u0 + m1 u1
    CHECK(w.coefficient({0, 1}) == Expr(m0) * Expr(u0) + Expr(m1) * Expr(u1));
}

TEST_CASE("exterior derivative examples") {
    Symbol x("x"), u("u"), q("q");
    auto c = make_chart("c", {x}, {u, q});
    auto th = DiffForm::d_coord(c, u) - Expr(q) * DiffForm::d_coord(c, x);
    auto dth = d(th);
    CHECK(dth == -wedge(DiffForm::d_coord(c, q), DiffForm::d_coord(c, x)));
    CHECK(d(d(Expr(u) * Expr(q) * DiffForm::d_coord(c, x))).is_zero());
}

TEST_CASE("exterior derivative of the failure-example Lepage form term by term") {
    Symbol x("x"), y("y"), u("u"), v("v"), q("q"), r("r"), a("a"), b("b"), m("m"), n("n");
    auto c = make_chart("L", {x, y}, {u, v, q, r, a, b, m, n});
    auto D = [&](Symbol s) { return DiffForm::d_coord(c, s); };
    auto alpha = Expr(a) * D(x) + Expr(b) * D(y);
    auto beta = Expr(m) * D(x) + Expr(n) * D(y);
    auto th1 = D(u) - Expr(q) * D(x);
    auto th2 = D(v) - Expr(q) * D(r);
    auto lt = wedge(alpha, th1) + wedge(beta, th2);
    auto expected = wedge(d(alpha), th1) + wedge(alpha, wedge(D(q), D(x))) + wedge(d(beta), th2) +
                    wedge(beta, wedge(D(q), D(r)));
    CHECK(d(lt) == expected);
}

TEST_CASE("interior product examples") {
    Symbol x0("x0"), x1("x1");
    auto c = make_chart("c", {x0, x1}, {});
    auto w = wedge(DiffForm::d_coord(c, x0), DiffForm::d_coord(c, x1));
    auto X = VectorField::coordinate(c, x0);
    CHECK(interior_product(X, w) == DiffForm::d_coord(c, x1));
    CHECK(interior_product(X, interior_product(X, w)).is_zero());
    CHECK_THROWS_AS(interior_product(X, DiffForm::scalar(c, Expr(1))), DegreeZero);
}

TEST_CASE("lie derivative examples") {
    Symbol x0("x0"), x1("x1"), u("u");
    auto c = make_chart("c", {x0, x1}, {u});
    auto X = VectorField::coordinate(c, x0);
    CHECK(lie_derivative(X, DiffForm::d_coord(c, x0)).is_zero());
    VectorField Y{c, {{u, Expr(x0)}, {x1, Expr(u)}}};
    std::mt19937_64 g(3);
    for (int i = 0; i < 20; ++i) {
        auto a = random_form(g, c, 1), b = random_form(g, c, 1);
        CHECK(lie_derivative(Y, wedge(a, b)) == wedge(lie_derivative(Y, a), b) + wedge(a, lie_derivative(Y, b)));
    }
}

TEST_CASE("lie derivative along a variation of the canonical form") {
    // L_V Theta_1 for a vertical variation V = dA_mu direction gives dA_mu dx^mu
    Symbol x0("x0"), x1("x1"), A0("A0"), A1("A1");
    auto c = std::make_shared<Chart>(*make_chart("T*M", {x0, x1}, {A0, A1}));
    c->families["A"] = {{A0, {0}}, {A1, {1}}};
    ChartPtr cp = c;
    auto th = canonical_form(cp, "A");
    VectorField V{cp, {{A0, Expr(Rational(3))}, {A1, Expr(x0)}}};
    auto lv = lie_derivative(V, th);
    CHECK(lv == Expr(3) * DiffForm::d_coord(cp, x0) + Expr(x0) * DiffForm::d_coord(cp, x1));
}

TEST_CASE("pullback examples") {
    Symbol x0("x0"), x1("x1"), u("u");
    auto c = make_chart("c", {x0, x1}, {u});
    auto inc = slice_inclusion(c, x0, 0);
    CHECK(pullback(inc, DiffForm::d_coord(c, x0)).is_zero());
    // section of the first-order jet chart
    Symbol x("x"), y("y"), z("z"), phi("phi"), p("p"), q("q"), r("r");
    auto J = make_chart("J", {x, y, z}, {phi, p, q, r});
    auto M = make_chart("M", {x, y, z}, {});
    Expr X(x), Y(y), Z(z);
    Expr f = X * X * Y + Z;
    ChartMap sigma{M, J, {{x, X}, {y, Y}, {z, Z}, {phi, f}, {p, partial(f, x)}, {q, partial(f, y)}, {r, Expr(0)}}};
    auto th = DiffForm::d_coord(J, phi) - Expr(p) * DiffForm::d_coord(J, x) - Expr(q) * DiffForm::d_coord(J, y) -
              Expr(r) * DiffForm::d_coord(J, z);
    auto pb = pullback(sigma, th);
    // phi_z = 1 but r = 0, so only the dz component survives
    CHECK(pb == DiffForm::d_coord(M, z));
    sigma.images[r] = Expr(1);
    CHECK(pullback(sigma, th).is_zero());
}

TEST_CASE("restrict_to_slice examples") {
    Symbol y("y"), x("x");
    auto c = make_chart("c", {x, y}, {});
    CHECK(restrict_to_slice(DiffForm::d_coord(c, y), y, 0).is_zero());
}

TEST_CASE("restriction of the PDE Lepage differential to z = 0") {
    Symbol x("x"), y("y"), z("z"), phi("phi"), p("p"), q("q"), r("r"), A("A"), B("B"), C("C"), lam("lambda"),
        mu("mu");
    auto c = make_chart("L", {x, y, z}, {phi, p, q, r, A, B, C, lam, mu});
    auto D = [&](Symbol s) { return DiffForm::d_coord(c, s); };
    auto alpha = Expr(A) * wedge(D(x), D(y)) + Expr(B) * wedge(D(x), D(z)) + Expr(C) * wedge(D(y), D(z));
    auto theta = D(phi) - Expr(p) * D(x) - Expr(q) * D(y) - Expr(r) * D(z);
    auto G1 = wedge(D(r), wedge(D(x), D(y))) + Expr(y) * wedge(D(p), wedge(D(y), D(z)));
    auto G2 = wedge(D(q), wedge(D(x), D(z)));
    auto lt = wedge(alpha, theta) + Expr(lam) * G1 + Expr(mu) * G2;
    auto res = restrict_to_slice(d(lt), z, 0);
    auto sc = res.chart();
    auto E = [&](Symbol s) { return DiffForm::d_coord(sc, s); };
    auto expected = wedge(wedge(E(A), E(x)), wedge(E(y), E(phi))) + wedge(wedge(E(lam), E(r)), wedge(E(x), E(y)));
    CHECK(res == expected);
}

TEST_CASE("slice restriction of the Poisson sigma contraction") {
    Symbol xi0("xi0"), xi1("xi1"), x1("x1"), x2("x2"), x3("x3");
    std::vector<Symbol> eta0{Symbol("eta01"), Symbol("eta02"), Symbol("eta03")};
    std::vector<Symbol> eta1{Symbol("eta11"), Symbol("eta12"), Symbol("eta13")};
    std::vector<Symbol> xs{x1, x2, x3};
    std::vector<Symbol> fib{x1, x2, x3};
    fib.insert(fib.end(), eta0.begin(), eta0.end());
    fib.insert(fib.end(), eta1.begin(), eta1.end());
    auto c = make_chart("S", {xi0, xi1}, fib);
    auto D = [&](Symbol s) { return DiffForm::d_coord(c, s); };
    // so(3) bivector pi^{ab} = eps^{abc} x_c
    auto pi = [&](int a, int b) -> Expr {
        if (a == b) return Expr(0);
        int cc = 3 - a - b;
        int s = ((b - a + 3) % 3 == 1) ? 1 : -1;
        return Expr(s) * Expr(xs[static_cast<size_t>(cc)]);
    };
    std::vector<std::vector<Symbol>> eta{eta0, eta1};
    std::vector<Symbol> xi{xi0, xi1};
    DiffForm lt(c, 2);
    for (int be = 0; be < 2; ++be)
        for (int nu = 0; nu < 3; ++nu)
            lt += -Expr(eta[be][nu]) * wedge(D(xs[nu]), D(xi[be]));
    for (int al = 0; al < 2; ++al)
        for (int be = 0; be < 2; ++be)
            for (int mu_ = 0; mu_ < 3; ++mu_)
                for (int nu = 0; nu < 3; ++nu)
                    lt += Expr(Rational(-1, 2)) * pi(mu_, nu) * Expr(eta[al][mu_]) * Expr(eta[be][nu]) *
                          wedge(D(xi[al]), D(xi[be]));
    auto contr = interior_product(VectorField::coordinate(c, xi0), lt);
    auto res = restrict_to_slice(contr, xi0, 0);
    auto sc = res.chart();
    DiffForm expected(sc, 1);
    for (int mu_ = 0; mu_ < 3; ++mu_) expected += Expr(eta0[mu_]) * DiffForm::d_coord(sc, xs[mu_]);
    for (int mu_ = 0; mu_ < 3; ++mu_)
        for (int nu = 0; nu < 3; ++nu)
            expected += -pi(mu_, nu) * Expr(eta0[mu_]) * Expr(eta1[nu]) * DiffForm::d_coord(sc, xi1);
    CHECK(res == expected);
}

TEST_CASE("hodge star on Minkowski space") {
    // orientation x1 x2 x3 x0 reproduces *(dxi^dxj) = star3(dxi^dxj)^dx0
    Symbol x0("x0"), x1("x1"), x2("x2"), x3("x3");
    auto c = make_chart("Mink", {x1, x2, x3, x0}, {}, {1, 1, 1, -1});
    auto D = [&](Symbol s) { return DiffForm::d_coord(c, s); };
    CHECK(hodge_star_semibasic(wedge(D(x1), D(x2))) == wedge(D(x3), D(x0)));
    CHECK(hodge_star_semibasic(wedge(D(x2), D(x3))) == wedge(D(x1), D(x0)));
    CHECK(hodge_star_semibasic(wedge(D(x3), D(x1))) == wedge(D(x2), D(x0)));
    // *(star3(dx1^dx2)^dx0) = -dx1^dx2
    CHECK(hodge_star_semibasic(wedge(D(x3), D(x0))) == -wedge(D(x1), D(x2)));
    auto fib = make_chart("nometric", {x0}, {});
    CHECK_THROWS_AS(hodge_star_semibasic(DiffForm::d_coord(fib, x0)), NoMetric);
    auto c2 = make_chart("c2", {x0}, {x1}, {1});
    CHECK_THROWS_AS(hodge_star_semibasic(DiffForm::d_coord(c2, x1)), NotSemibasic);
}

TEST_CASE("hodge star of F against an epsilon tensor oracle") {
    Symbol x0("x0"), x1("x1"), x2("x2"), x3("x3");
    std::vector<Symbol> xs{x0, x1, x2, x3};
    std::vector<Rational> g{-1, 1, 1, 1};
    std::vector<Symbol> F;
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            F.push_back(Symbol("F" + std::to_string(i) + std::to_string(j)));
            pairs.emplace_back(i, j);
        }
    auto c = make_chart("L", xs, F, g);
    DiffForm f(c, 2);
    for (size_t k = 0; k < F.size(); ++k)
        f += Expr(F[k]) * wedge(DiffForm::d_coord(c, xs[pairs[k].first]), DiffForm::d_coord(c, xs[pairs[k].second]));
    auto sf = hodge_star_semibasic(f);
    // oracle: (*F)_{kl} = 1/2 F^{ij} eps_{ijkl}, raising with the diagonal metric
    auto eps = [](std::array<int, 4> p) {
        int s = 1;
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) {
                if (p[i] == p[j]) return 0;
                if (p[i] > p[j]) s = -s;
            }
        return s;
    };
    auto Fcomp = [&](int i, int j) -> Expr {
        for (size_t k = 0; k < pairs.size(); ++k) {
            if (pairs[k] == std::make_pair(i, j)) return Expr(F[k]);
            if (pairs[k] == std::make_pair(j, i)) return -Expr(F[k]);
        }
        return Expr(0);
    };
    for (auto [k, l] : pairs) {
        Expr acc;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                int e = eps({i, j, k, l});
                if (!e) continue;
                acc += Expr(Rational(e, 2)) * Expr(1 / (g[static_cast<size_t>(i)] * g[static_cast<size_t>(j)])) *
                       Fcomp(i, j);
            }
        CHECK(sf.coefficient({static_cast<uint16_t>(k), static_cast<uint16_t>(l)}) == acc);
    }
}

TEST_CASE("canonical forms") {
    Symbol x0("x0"), x1("x1"), A0("A0"), A1("A1"), F01("F01");
    auto c = std::make_shared<Chart>(*make_chart("c", {x0, x1}, {F01, A0, A1}));
    c->families["A"] = {{A0, {0}}, {A1, {1}}};
    c->families["F"] = {{F01, {0, 1}}};
    ChartPtr cp = c;
    auto D = [&](Symbol s) { return DiffForm::d_coord(cp, s); };
    CHECK(canonical_form(cp, 1) == Expr(A0) * D(x0) + Expr(A1) * D(x1));
    CHECK(canonical_form(cp, 2) == Expr(F01) * wedge(D(x0), D(x1)));
    CHECK_THROWS_AS(canonical_form(cp, 3), BadChartLabeling);
}

TEST_CASE("canonical form differential on the mechanics chart") {
    // d(p dq) against the symplectic-potential differential dp^dq
    Symbol t("t"), q("q"), qd("qdot"), p("p");
    auto c = std::make_shared<Chart>(*make_chart("mech", {t}, {q, qd, p}));
    ChartPtr cp = c;
    auto theta = Expr(p) * DiffForm::d_coord(cp, q);
    auto dth = d(theta);
    CHECK(dth.terms().size() == 1);
    CHECK(dth == wedge(DiffForm::d_coord(cp, p), DiffForm::d_coord(cp, q)));
}

// ---- randomized properties ----

namespace {

ChartPtr prop_chart() {
    static ChartPtr c = make_chart("P", {Symbol("s"), Symbol("t")}, {Symbol("a"), Symbol("b"), Symbol("c")},
                                   {Rational(1), Rational(-1)});
    return c;
}

}  // namespace

TEST_CASE("d squared vanishes on random forms") {
    std::mt19937_64 g(101);
    for (int i = 0; i < 100; ++i) {
        auto f = random_form(g, prop_chart(), i % 4);
        CHECK(d(d(f)).is_zero());
    }
}

TEST_CASE("graded commutativity and graded leibniz on random forms") {
    std::mt19937_64 g(102);
    for (int i = 0; i < 100; ++i) {
        int p = i % 3, q = (i / 3) % 3;
        auto a = random_form(g, prop_chart(), p), b = random_form(g, prop_chart(), q);
        auto ab = wedge(a, b), ba = wedge(b, a);
        CHECK(((p * q) % 2 ? ab == -ba : ab == ba));
        auto lhs = d(ab);
        auto rhs = wedge(d(a), b) + (p % 2 ? -wedge(a, d(b)) : wedge(a, d(b)));
        CHECK(lhs == rhs);
    }
}

TEST_CASE("pullback commutes with d and wedge, and composes") {
    std::mt19937_64 g(103);
    auto tgt = prop_chart();
    auto src = make_chart("Q", {Symbol("u"), Symbol("v")}, {Symbol("w")});
    auto mid = make_chart("R", {Symbol("e"), Symbol("f")}, {});
    for (int i = 0; i < 100; ++i) {
        ChartMap f{src, tgt, {}};
        for (auto s : tgt->coords) f.images[s] = random_poly(g, src->coords, 2, 2);
        ChartMap h{mid, src, {}};
        for (auto s : src->coords) h.images[s] = random_poly(g, mid->coords, 2, 1);
        auto a = random_form(g, tgt, i % 3, 2), b = random_form(g, tgt, 1, 2);
        CHECK(pullback(f, d(a)) == d(pullback(f, a)));
        CHECK(pullback(f, wedge(a, b)) == wedge(pullback(f, a), pullback(f, b)));
        CHECK(pullback(compose(f, h), a) == pullback(h, pullback(f, a)));
    }
}

TEST_CASE("slice restriction equals pullback by the inclusion") {
    std::mt19937_64 g(104);
    auto c = prop_chart();
    for (int i = 0; i < 100; ++i) {
        auto a = random_form(g, c, i % 4);
        Symbol s = c->coords[static_cast<size_t>(i) % c->dim()];
        Rational v = small_rational(g);
        CHECK(restrict_to_slice(a, s, v) == pullback(slice_inclusion(c, s, v), a));
    }
}

TEST_CASE("double hodge dual sign on random semibasic forms") {
    std::mt19937_64 g(105);
    std::vector<std::vector<Rational>> metrics{{1, 1, 1}, {-1, 1, 1}, {1, -1, 2}};
    std::vector<ChartPtr> charts;
    for (size_t m = 0; m < metrics.size(); ++m)
        charts.push_back(make_chart("H" + std::to_string(m), {Symbol("x0"), Symbol("x1"), Symbol("x2")},
                                    {Symbol("w")}, metrics[m]));
    charts.push_back(make_chart("H4", {Symbol("x0"), Symbol("x1"), Symbol("x2"), Symbol("x3")}, {},
                                {Rational(-1), Rational(1), Rational(1), Rational(1)}));
    for (int i = 0; i < 120; ++i) {
        auto c = charts[static_cast<size_t>(i) % charts.size()];
        int n = static_cast<int>(c->base.size());
        int k = i % (n + 1);
        DiffForm a(c, k);
        for (auto& idx : subsets(static_cast<size_t>(n), static_cast<size_t>(k)))
            a.add_term(idx, random_poly(g, {Symbol("w")}, 1, 1));
        Rational det(1);
        for (auto& x : c->metric) det *= x;
        // the unnormalized star squares to (-1)^{k(n-k)} / det g
        Rational factor = Rational((k * (n - k)) % 2 ? -1 : 1) / det;
        CHECK(hodge_star_semibasic(hodge_star_semibasic(a)) == Expr(factor) * a);
    }
}
