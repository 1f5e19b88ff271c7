#include "cartan/varcalc.hpp"

#include <algorithm>

namespace cartan {

namespace {

// Subsets of {0..n-1} of size k, in lexicographic order.
std::vector<std::vector<int>> subsets(int n, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    auto rec = [&](auto& self, int start) -> void {
        if (static_cast<int>(cur.size()) == k) {
            out.push_back(cur);
            return;
        }
        for (int i = start; i < n; ++i) {
            cur.push_back(i);
            self(self, i + 1);
            cur.pop_back();
        }
    };
    rec(rec, 0);
    return out;
}

DiffForm base_monomial(const ChartPtr& c, const std::vector<int>& positions) {
    DiffForm f = DiffForm::scalar(c, Expr(1));
    for (int p : positions) f = wedge(f, DiffForm::d_coord(c, c->base.at(static_cast<size_t>(p))));
    return f;
}

bool contains_up_to_sign(const std::vector<DiffForm>& gs, const DiffForm& f) {
    for (auto& g : gs)
        if (g == f || g == -f) return true;
    return false;
}

// Psi with dx^I ^ Psi = w_I for every label I, when such a Psi exists.
std::optional<DiffForm> common_factor(const ChartPtr& c, const std::vector<FamilyMember>& members,
                                      const std::vector<DiffForm>& ws) {
    int deg = ws.front().degree() - static_cast<int>(members.front().label.size());
    if (deg < 0) return std::nullopt;
    std::map<Index, Expr> psi;
    for (size_t m = 0; m < members.size(); ++m) {
        Index lab;
        for (int p : members[m].label) lab.push_back(static_cast<uint16_t>(c->index(c->base.at(static_cast<size_t>(p)))));
        std::sort(lab.begin(), lab.end());
        for (auto& [idx, coef] : ws[m].terms()) {
            if (!std::includes(idx.begin(), idx.end(), lab.begin(), lab.end())) continue;
            Index rest;
            std::set_difference(idx.begin(), idx.end(), lab.begin(), lab.end(), std::back_inserter(rest));
            if (psi.count(rest)) continue;
            Index merged;
            int sg = merge_sign(lab, rest, merged);
            psi[rest] = sg > 0 ? coef : -coef;
        }
    }
    DiffForm out(c, deg);
    for (auto& [idx, coef] : psi) out.add_term(idx, coef);
    for (size_t m = 0; m < members.size(); ++m)
        if (wedge(base_monomial(c, members[m].label), out) != ws[m]) return std::nullopt;
    return out;
}

}  // namespace

ExteriorSystem euler_lagrange_eds(const VariationalProblem& p) {
    ExteriorSystem s;
    s.chart = p.chart;
    s.independence = p.chart->base;
    DiffForm dl = d(p.lagrangian.on_chart(p.chart));
    for (auto v : p.chart->fibers()) {
        auto g = interior_product(VectorField::coordinate(p.chart, v), dl);
        if (!g.is_zero() && !contains_up_to_sign(s.generators, g)) s.generators.push_back(g.sign_normalized());
    }
    for (auto& g : p.prolongation.generators) {
        auto h = g.on_chart(p.chart);
        if (!contains_up_to_sign(s.generators, h)) s.generators.push_back(h);
    }
    return differential_closure(s);
}

LepageProblem build_lepage_local(const VariationalProblem& p, uint64_t seed) {
    const ChartPtr& c = p.chart;
    int n = static_cast<int>(c->base.size());
    if (p.lagrangian.degree() != n && !p.lagrangian.is_zero())
        throw std::invalid_argument("lagrangian degree differs from the base dimension");

    // Z1: no term carries two fiber differentials
    for (auto& g : p.prolongation.generators) {
        auto gc = g.on_chart(c);
        for (auto& [idx, coef] : gc.terms()) {
            int fib = 0;
            for (auto i : idx)
                if (!c->is_base(c->coords[i])) ++fib;
            if (fib > 1) throw GeneratorNotZ1(g.str());
        }
        if (g.degree() > n) throw std::invalid_argument("prolongation generator of degree above n: " + g.str());
    }

    // multiplier coordinates, appended to the chart
    auto nc = std::make_shared<Chart>(*c);
    LepageProblem out;
    out.n = n;
    std::vector<std::vector<std::vector<int>>> labels;
    for (size_t j = 0; j < p.prolongation.generators.size(); ++j) {
        int m = n - p.prolongation.generators[j].degree();
        auto subs = subsets(n, m);
        std::string fam = j < p.multiplier_families.size() && !p.multiplier_families[j].empty()
                              ? p.multiplier_families[j]
                              : "beta" + std::to_string(j + 1);
        std::vector<Symbol> names;
        if (j < p.multiplier_names.size() && !p.multiplier_names[j].empty()) {
            names = p.multiplier_names[j];
            if (names.size() != subs.size())
                throw std::invalid_argument("multiplier " + fam + " needs " + std::to_string(subs.size()) +
                                            " components");
        } else {
            for (auto& sub : subs) {
                std::string nm = fam;
                if (!sub.empty()) {
                    nm += "_";
                    for (int q : sub) nm += c->base[static_cast<size_t>(q)].name();
                }
                names.emplace_back(nm);
            }
        }
        for (auto s : names) {
            if (nc->has(s)) throw std::invalid_argument("multiplier name clashes with a coordinate: " + s.name());
            nc->coords.push_back(s);
        }
        if (m > 0) {
            auto& mem = nc->families[fam];
            for (size_t k = 0; k < names.size(); ++k) mem.push_back({names[k], subs[k]});
            nc->family_order.push_back(fam);
        }
        out.multiplier_symbols.push_back(names);
        labels.push_back(subs);
    }
    ChartPtr cp = nc;
    out.chart = cp;

    // no degree-n syzygies: the map (beta_j) -> sum beta_j ^ g_j is injective
    std::vector<DiffForm> columns;
    for (size_t j = 0; j < labels.size(); ++j) {
        auto g = p.prolongation.generators[j].on_chart(cp);
        for (auto& sub : labels[j]) columns.push_back(wedge(base_monomial(cp, sub), g));
    }
    if (!columns.empty()) {
        Point pt = generic_point(cp->coords, {}, seed);
        std::map<Index, size_t> rows;
        for (auto& col : columns)
            for (auto& [idx, coef] : col.terms()) rows.emplace(idx, rows.size());
        RatMatrix m(rows.size(), std::vector<Rational>(columns.size()));
        for (size_t k = 0; k < columns.size(); ++k)
            for (auto& [idx, coef] : columns[k].terms()) m[rows[idx]][k] = coef.evaluate(pt);
        if (rank_rational(m) < columns.size()) throw SyzygyDetected("multiplier map has a kernel");
    }

    DiffForm lt = p.lagrangian.is_zero() ? DiffForm(cp, n) : Expr(p.lepage_sign) * p.lagrangian.on_chart(cp);
    for (size_t j = 0; j < labels.size(); ++j) {
        auto g = p.prolongation.generators[j].on_chart(cp);
        DiffForm beta(cp, static_cast<int>(labels[j].front().size()));
        for (size_t k = 0; k < labels[j].size(); ++k)
            beta += Expr(out.multiplier_symbols[j][k]) * base_monomial(cp, labels[j][k]);
        lt += wedge(beta, g);
    }
    out.lepage_form = lt;
    return out;
}

Rational lepage_contract_defect(const VariationalProblem& p, const LepageProblem& l, uint64_t seed) {
    const ChartPtr& c = p.chart;
    int n = static_cast<int>(c->base.size());
    ExteriorSystem pr = p.prolongation;
    pr.chart = c;
    pr.independence = c->base;
    for (auto& g : pr.generators) g = g.on_chart(c);
    if (!pr.closed) pr = differential_closure(pr);
    auto v = integral_variety(pr, n, seed);
    auto f = make_flag(v, principal_branch(v), seed);

    // extend the point and the vectors to the multiplier coordinates
    std::vector<Symbol> extra;
    for (auto s : l.chart->coords)
        if (!c->has(s)) extra.push_back(s);
    Point pt = f.point;
    Point ex = generic_point(extra, {}, seed + 17);
    pt.insert(ex.begin(), ex.end());
    std::vector<std::vector<Expr>> big, small;
    for (size_t i = 0; i < f.vectors.size(); ++i) {
        std::vector<Expr> vb(l.chart->dim()), vs(c->dim());
        for (size_t k = 0; k < c->dim(); ++k) vs[k] = Expr(f.vectors[i][k]);
        Point rates = generic_point(extra, {}, seed * 101 + i + 3);
        for (size_t k = 0; k < l.chart->dim(); ++k) {
            Symbol s = l.chart->coords[k];
            vb[k] = c->has(s) ? vs[static_cast<size_t>(c->index(s))] : Expr(rates.at(s.id()));
        }
        big.push_back(vb);
        small.push_back(vs);
    }
    Rational lhs = evaluate_on(l.lepage_form.evaluate_coefficients(pt), big).evaluate(pt);
    Rational rhs = p.lagrangian.is_zero()
                       ? Rational(0)
                       : Rational(p.lepage_sign) * evaluate_on(p.lagrangian.on_chart(c).evaluate_coefficients(pt), small)
                                                       .evaluate(pt);
    return lhs - rhs;
}

ExteriorSystem hamilton_cartan_contractions(const LepageProblem& l) {
    const ChartPtr& c = l.chart;
    DiffForm dl = d(l.lepage_form);
    ExteriorSystem s;
    s.chart = c;
    s.independence = c->base;
    auto add = [&](const DiffForm& g) {
        if (g.is_zero()) return;
        auto h = g.sign_normalized();
        if (!contains_up_to_sign(s.generators, h)) s.generators.push_back(h);
    };
    std::set<std::string> done;
    for (auto v : c->fibers()) {
        std::string fam;
        if (c->family_member(v, &fam)) {
            if (!done.insert(fam).second) continue;
            const auto& members = c->families.at(fam);
            std::vector<DiffForm> ws;
            for (auto& m : members) ws.push_back(interior_product(VectorField::coordinate(c, m.coord), dl));
            bool all_zero = std::all_of(ws.begin(), ws.end(), [](const DiffForm& w) { return w.is_zero(); });
            if (all_zero) continue;
            auto psi = common_factor(c, members, ws);
            if (psi) {
                add(*psi);
            } else {
                for (auto& w : ws) add(w);
            }
        } else {
            add(interior_product(VectorField::coordinate(c, v), dl));
        }
    }
    return s;
}

ExteriorSystem hamilton_cartan(const LepageProblem& l) {
    auto s = hamilton_cartan_contractions(l);
    std::vector<Expr> zs;
    int n = static_cast<int>(s.chart->base.size());
    for (auto& g : s.generators)
        if (g.degree() == n && g.is_semibasic())
            for (auto& [idx, coef] : g.terms()) zs.push_back(Expr(coef.num().monic()));
    auto out = differential_closure(s);
    out.zero_forms = zs;
    return out;
}

}  // namespace cartan
