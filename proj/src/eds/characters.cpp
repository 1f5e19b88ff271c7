#include "internal.hpp"

#include "cartan/linalg.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace cartan {

namespace {

using NumForm = std::map<Index, Rational>;

NumForm numeric(const DiffForm& f, const Point& p) {
    NumForm r;
    for (auto& [idx, c] : f.terms()) {
        Rational v = c.evaluate(p);
        if (v != 0) r[idx] = v;
    }
    return r;
}

Rational eval_numeric(const NumForm& f, const std::vector<const std::vector<Rational>*>& vecs) {
    Rational acc(0);
    for (auto& [idx, c] : f) {
        std::vector<std::vector<Rational>> m(idx.size(), std::vector<Rational>(idx.size()));
        for (size_t r = 0; r < idx.size(); ++r)
            for (size_t s = 0; s < vecs.size(); ++s) m[r][s] = (*vecs[s])[idx[r]];
        acc += c * detail::determinant(std::move(m));
    }
    return acc;
}

// phi(w_1, ..., w_{d-1}, .) as a covector over chart coordinates.
std::vector<Rational> contract_row(const NumForm& f, const std::vector<const std::vector<Rational>*>& vecs, size_t dim) {
    std::vector<Rational> row(dim, Rational(0));
    size_t d = vecs.size() + 1;
    for (auto& [idx, c] : f) {
        for (size_t r = 0; r < d; ++r) {
            // minor without row r, columns = vecs
            std::vector<std::vector<Rational>> m;
            for (size_t rr = 0; rr < d; ++rr) {
                if (rr == r) continue;
                std::vector<Rational> line;
                for (auto* v : vecs) line.push_back((*v)[idx[rr]]);
                m.push_back(std::move(line));
            }
            Rational det = detail::determinant(std::move(m));
            if (det == 0) continue;
            bool neg = ((r + d - 1) % 2) == 1;
            Rational t = c * det;
            if (neg)
                row[idx[r]] -= t;
            else
                row[idx[r]] += t;
        }
    }
    return row;
}

std::vector<Expr> avoid_list(const IntegralVariety& v, const Branch& b) {
    std::vector<Expr> avoid = b.assumptions;
    for (auto& [k, e] : b.solved)
        if (!e.den().is_constant()) avoid.push_back(Expr(e.den()));
    for (auto& [k, e] : b.coordinate_bindings)
        if (!e.den().is_constant()) avoid.push_back(Expr(e.den()));
    for (auto& g : v.system.generators)
        for (auto& [idx, c] : g.terms())
            if (!c.den().is_constant()) avoid.push_back(Expr(c.den()));
    return avoid;
}

}  // namespace

Flag make_flag(const IntegralVariety& v, size_t bi, uint64_t seed, const std::vector<int>& order) {
    const Branch& b = v.branches.at(bi);
    const Chart& ch = *v.system.chart;
    std::vector<Symbol> free_syms;
    for (auto c : ch.coords)
        if (!b.coordinate_bindings.count(c)) free_syms.push_back(c);
    for (auto& row : v.graph_symbols)
        for (auto g : row)
            if (!b.solved.count(g)) free_syms.push_back(g);
    std::vector<Expr> avoid = avoid_list(v, b);
    // substitute bindings into the avoid list so it only involves free symbols
    Bindings bb = b.coordinate_bindings;
    for (auto& [k, e] : b.solved) bb[k] = e;
    for (auto& e : avoid) e = substitute(e, bb);
    avoid.erase(std::remove_if(avoid.begin(), avoid.end(), [](const Expr& e) { return e.is_constant(); }),
                avoid.end());
    for (int attempt = 0; attempt < 8; ++attempt) {
        Point p = generic_point(free_syms, avoid, seed + 1000003u * static_cast<uint64_t>(attempt));
        try {
            for (auto& [k, e] : b.coordinate_bindings) p[k.id()] = e.evaluate(p);
            for (auto& [k, e] : b.solved) p[k.id()] = e.evaluate(p);
            Flag f;
            f.point = p;
            f.order = order;
            if (f.order.empty())
                for (size_t i = 0; i < ch.base.size(); ++i) f.order.push_back(static_cast<int>(i));
            for (int i : f.order) {
                std::vector<Rational> vec(ch.dim(), Rational(0));
                vec[static_cast<size_t>(ch.index(ch.base[static_cast<size_t>(i)]))] = 1;
                for (size_t a = 0; a < v.fibers.size(); ++a)
                    vec[static_cast<size_t>(ch.index(v.fibers[a]))] =
                        p.at(v.graph_symbols[a][static_cast<size_t>(i)].id());
                f.vectors.push_back(std::move(vec));
            }
            return f;
        } catch (const DivisionByZero&) {
            continue;
        }
    }
    throw GenericPointExhausted();
}

Flag make_generic_flag(const IntegralVariety& v, size_t bi, uint64_t seed) {
    Flag f = make_flag(v, bi, seed);
    const Chart& ch = *v.system.chart;
    size_t n = ch.base.size();
    // base directions w_k with small random entries; the graph vector over w
    // is linear in w
    std::mt19937_64 rng(seed * 2654435761u + 97u);
    std::uniform_int_distribution<int> dist(-997, 997);
    std::vector<std::vector<Rational>> out;
    for (size_t k = 0; k < n; ++k) {
        std::vector<Rational> vec(ch.dim(), Rational(0));
        for (size_t i = 0; i < n; ++i) {
            int w = dist(rng);
            if (i == k && w == 0) w = 1;
            for (size_t j = 0; j < ch.dim(); ++j) vec[j] += Rational(w) * f.vectors[i][j];
        }
        out.push_back(std::move(vec));
    }
    RatMatrix check;
    for (auto& vec : out) {
        std::vector<Rational> row;
        for (auto b : ch.base) row.push_back(vec[static_cast<size_t>(ch.index(b))]);
        check.push_back(row);
    }
    if (rank_rational(check) < n) return f;
    f.vectors = std::move(out);
    f.order.clear();
    return f;
}

PolarSpace polar_space(const ExteriorSystem& s, const Flag& f, size_t k) {
    const Chart& ch = *s.chart;
    RatMatrix rows;
    for (auto& g : s.generators) {
        size_t d = static_cast<size_t>(g.degree());
        if (d > k + 1) continue;
        NumForm nf = numeric(g, f.point);
        if (nf.empty()) continue;
        for (auto& t : detail::increasing_tuples(k, d - 1)) {
            std::vector<const std::vector<Rational>*> vecs;
            for (auto j : t) vecs.push_back(&f.vectors[j]);
            auto row = contract_row(nf, vecs, ch.dim());
            bool nz = false;
            for (auto& x : row)
                if (x != 0) nz = true;
            if (nz) rows.push_back(std::move(row));
        }
    }
    PolarSpace ps;
    ps.codim = static_cast<int>(rank_rational(rows));
    RatMatrix red;
    for (auto& r : rows) {
        std::vector<Rational> line;
        for (size_t j = 0; j < ch.dim(); ++j)
            if (!ch.is_base(ch.coords[j])) line.push_back(r[j]);
        red.push_back(std::move(line));
    }
    ps.reduced_codim = static_cast<int>(rank_rational(red));
    ps.basis = nullspace_rational(rows, ch.dim());
    return ps;
}

CharacterReport characters(const ExteriorSystem& s, const Flag& f, const Branch& b, const IntegralVariety& v) {
    CharacterReport rep;
    rep.branch_id = b.id;
    size_t n = f.vectors.size();
    // integrality of the full element
    if (b.analyzed && b.residual_equations.empty()) {
        for (auto& g : s.generators) {
            size_t d = static_cast<size_t>(g.degree());
            if (d > n) continue;
            NumForm nf = numeric(g, f.point);
            for (auto& t : detail::increasing_tuples(n, d)) {
                std::vector<const std::vector<Rational>*> vecs;
                for (auto j : t) vecs.push_back(&f.vectors[j]);
                if (eval_numeric(nf, vecs) != 0) throw NotIntegralFlag();
            }
        }
    }
    std::vector<std::vector<Rational>> prev_basis;
    for (size_t k = 0; k < n; ++k) {
        PolarSpace ps = polar_space(s, f, k);
        rep.characters.push_back(ps.codim);
        rep.reduced_characters.push_back(ps.reduced_codim);
        if (k > 0) {
            // H(E_k) inside H(E_{k-1}): stacking does not raise the rank
            RatMatrix a = prev_basis;
            size_t r0 = rank_rational(a);
            for (auto& x : ps.basis) a.push_back(x);
            if (rank_rational(a) != r0) rep.nested = false;
        }
        prev_basis = ps.basis;
        rep.cartan_sum += ps.reduced_codim;
    }
    for (size_t k = 1; k < rep.reduced_characters.size(); ++k)
        if (rep.reduced_characters[k] < rep.reduced_characters[k - 1]) rep.nested = false;
    // Jacobian rank of the defining equations at the flag point
    std::vector<Symbol> vars = s.chart->coords;
    for (auto& row : v.graph_symbols)
        for (auto g : row) vars.push_back(g);
    RatMatrix jac;
    for (auto& e : b.defining_equations()) {
        std::vector<Rational> row;
        for (auto x : vars) row.push_back(e.depends_on(x) ? partial(e, x).evaluate(f.point) : Rational(0));
        jac.push_back(std::move(row));
    }
    rep.variety_codim = static_cast<int>(rank_rational(jac));
    rep.involutive_at_flag = rep.variety_codim == rep.cartan_sum;
    if (!b.zero_forms.empty()) {
        rep.involutive_at_flag = false;
        rep.notes.push_back("branch carries zero-forms; restrict before testing");
    }
    if (!b.residual_equations.empty()) {
        rep.involutive_at_flag = false;
        rep.notes.push_back("branch has unresolved equations");
    }
    if (!b.analyzed) {
        rep.involutive_at_flag = false;
        rep.notes.push_back("branch not analyzed");
    }
    if (rep.variety_codim < rep.cartan_sum) rep.notes.push_back("Cartan inequality violated");
    return rep;
}

CharacterReport characters(const IntegralVariety& v, size_t branch, uint64_t seed, const std::vector<int>& order) {
    const Branch& b = v.branches.at(branch);
    std::vector<CharacterReport> reps;
    for (uint64_t s = 0; s < 3; ++s) {
        Flag f = make_flag(v, branch, seed * 31u + s * 7919u + 5u, order);
        reps.push_back(characters(v.system, f, b, v));
    }
    CharacterReport out = reps[0];
    for (size_t i = 1; i < reps.size(); ++i) {
        if (reps[i].characters != out.characters || reps[i].reduced_characters != out.reduced_characters ||
            reps[i].variety_codim != out.variety_codim)
            out.stable = false;
    }
    if (!out.stable) {
        // generic values are the maxima
        out.notes.push_back("GenericityWarning: characters differ across seeds; using maxima");
        for (auto& r : reps) {
            for (size_t k = 0; k < out.characters.size(); ++k) {
                out.characters[k] = std::max(out.characters[k], r.characters[k]);
                out.reduced_characters[k] = std::max(out.reduced_characters[k], r.reduced_characters[k]);
            }
            out.variety_codim = std::max(out.variety_codim, r.variety_codim);
        }
        out.cartan_sum = 0;
        for (int c : out.reduced_characters) out.cartan_sum += c;
        out.involutive_at_flag = out.involutive_at_flag && out.variety_codim == out.cartan_sum;
    }
    for (auto& r : reps)
        if (!r.nested) out.nested = false;
    return out;
}

ExteriorSystem prolong(const IntegralVariety& v, size_t bi) {
    const Branch& b = v.branches.at(bi);
    const Chart& old = *v.system.chart;
    auto nc = std::make_shared<Chart>(old);
    nc->name = old.name + "'";
    Bindings to_new;
    std::set<std::string> names;
    for (auto c : old.coords) names.insert(c.name());
    for (size_t a = 0; a < v.fibers.size(); ++a)
        for (size_t i = 0; i < old.base.size(); ++i) {
            Symbol g = v.graph_symbols[a][i];
            if (b.solved.count(g)) continue;
            Symbol fiber = v.fibers[a];
            std::string nm = fiber.name() + "_" + old.base[i].name();
            JetLabel lab;
            auto it = old.jets.find(fiber.id());
            if (it != old.jets.end()) {
                lab = it->second;
                lab.multi.push_back(static_cast<int>(i));
                std::sort(lab.multi.begin(), lab.multi.end());
            } else {
                lab = {fiber, {static_cast<int>(i)}};
            }
            while (names.count(nm)) nm += "'";
            names.insert(nm);
            Symbol c(nm);
            set_display_name(c, jet_display(old, lab));
            nc->coords.push_back(c);
            nc->jets[c.id()] = lab;
            to_new[g] = Expr(c);
        }
    ChartPtr cp = nc;
    ExteriorSystem out;
    out.chart = cp;
    out.independence = v.system.independence;
    for (size_t a = 0; a < v.fibers.size(); ++a) {
        DiffForm th = DiffForm::d_coord(cp, v.fibers[a]);
        for (size_t i = 0; i < old.base.size(); ++i) {
            Symbol g = v.graph_symbols[a][i];
            auto it = b.solved.find(g);
            Expr val = it != b.solved.end() ? substitute(it->second, to_new) : to_new[g];
            if (!val.is_zero()) th = th - val * DiffForm::d_coord(cp, old.base[i]);
        }
        out.generators.push_back(th);
    }
    for (auto& z : b.zero_forms) out.zero_forms.push_back(z);
    for (auto& r : b.residual_equations) out.zero_forms.push_back(substitute(r, to_new));
    return differential_closure(out);
}

ExteriorSystem prolong(const ExteriorSystem& s, int n, uint64_t seed) {
    auto v = integral_variety(s, n, seed);
    return prolong(v, principal_branch(v));
}

KuranishiResult cartan_kuranishi(const ExteriorSystem& s0, int n, int max_steps, uint64_t seed) {
    KuranishiResult res;
    ExteriorSystem cur = s0.closed ? s0 : differential_closure(s0);
    int step = 0;
    // one entry per condition, up to scalar multiple
    auto record = [&](const Expr& z) {
        Expr m(z.num().monic());
        for (auto& e : res.surfaced_zero_forms)
            if (Expr(e.expr.num().monic()) == m) return;
        res.surfaced_zero_forms.push_back({step, m});
    };
    int restrictions = 0;
    for (;;) {
        if (!cur.zero_forms.empty()) {
            std::vector<Expr> derived;
            cur = restrict_zero_forms(cur, &derived);
            for (auto& z : derived) record(z);
        }
        auto v = integral_variety(cur, n, seed);
        size_t bi = principal_branch(v);
        auto rep = characters(v, bi, seed);
        const Branch& b = v.branches[bi];
        if (!rep.involutive_at_flag && b.analyzed && b.zero_forms.empty() && b.residual_equations.empty()) {
            // coordinate flags may be delta-singular; Cartan's test at any flag suffices
            auto g = characters(cur, make_generic_flag(v, bi, seed), b, v);
            if (g.involutive_at_flag) {
                g.notes.push_back("Cartan test holds at a generic (non-coordinate) flag");
                rep = g;
            }
        }
        for (auto& z : b.zero_forms) record(z);
        for (auto& r : b.residual_equations) record(r);
        res.trace.push_back(rep);
        // zero-forms on the followed branch: restrict and look again before prolonging
        if (!b.zero_forms.empty() && restrictions < 2 * static_cast<int>(cur.chart->dim())) {
            ++restrictions;
            cur.zero_forms = b.zero_forms;
            continue;
        }
        if (rep.involutive_at_flag) {
            res.involutive = true;
            res.final = cur;
            return res;
        }
        if (step >= max_steps) {
            res.budget_exhausted = true;
            res.final = cur;
            return res;
        }
        cur = prolong(v, bi);
        ++step;
    }
}

}  // namespace cartan
