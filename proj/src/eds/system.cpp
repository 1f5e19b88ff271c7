#include "internal.hpp"

#include "cartan/linalg.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace cartan {

namespace detail {

std::vector<Index> increasing_tuples(size_t n, size_t k) {
    std::vector<Index> out;
    Index cur;
    auto rec = [&](auto&& self, size_t start) -> void {
        if (cur.size() == k) {
            out.push_back(cur);
            return;
        }
        for (size_t i = start; i + (k - cur.size()) <= n; ++i) {
            cur.push_back(static_cast<uint16_t>(i));
            self(self, i + 1);
            cur.pop_back();
        }
    };
    rec(rec, 0);
    return out;
}

std::string join_exprs(const std::vector<Expr>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i].str();
    return s;
}

Point generic_point_for(const std::vector<Expr>& exprs, const std::vector<Expr>& avoid, uint64_t seed) {
    std::set<uint32_t> vars;
    for (auto& e : exprs)
        for (auto v : e.variables()) vars.insert(v);
    for (auto& e : avoid)
        for (auto v : e.variables()) vars.insert(v);
    std::vector<Symbol> syms;
    for (auto v : vars) syms.push_back(Symbol::from_id(v));
    return generic_point(syms, avoid, seed);
}

DiffForm substitute_differentials(const DiffForm& a, const std::map<uint16_t, DiffForm>& sub) {
    if (sub.empty()) return a;
    DiffForm r(a.chart(), a.degree());
    for (auto& [idx, c] : a.terms()) {
        bool touched = false;
        for (auto k : idx)
            if (sub.count(k)) touched = true;
        if (!touched) {
            r.add_term(idx, c);
            continue;
        }
        DiffForm t = DiffForm::scalar(a.chart(), c);
        for (auto k : idx) {
            auto it = sub.find(k);
            DiffForm f = it != sub.end() ? it->second : DiffForm::basis(a.chart(), {k}, Expr(1));
            t = wedge(t, f);
            if (t.is_zero()) break;
        }
        if (!t.is_zero()) r += t;
    }
    return r;
}

namespace {

// Pivot choice for a 1-form: fiber differential with constant coefficient,
// else any fiber differential, else any differential.
std::optional<uint16_t> pick_pivot(const DiffForm& g) {
    const Chart& ch = *g.chart();
    std::optional<uint16_t> best;
    int best_cost = 1 << 30;
    for (auto& [idx, c] : g.terms()) {
        bool fiber = !ch.is_base(ch.coords[idx[0]]);
        int cost = (fiber ? 0 : 100) + (c.is_constant() ? 0 : 10 + static_cast<int>(c.num().terms().size()));
        if (cost < best_cost) {
            best_cost = cost;
            best = idx[0];
        }
    }
    return best;
}

}  // namespace

Reducer::Reducer(const ExteriorSystem& s) {
    for (auto& g0 : s.generators) {
        if (g0.degree() != 1) continue;
        DiffForm g = substitute_differentials(g0, solved);
        if (g.is_zero()) continue;
        auto p = pick_pivot(g);
        Expr c = g.coefficient({*p});
        if (!c.is_constant()) assumptions.push_back(c);
        DiffForm rest = g - DiffForm::basis(g.chart(), {*p}, c);
        DiffForm val = (Expr(-1) / c) * rest;
        std::map<uint16_t, DiffForm> one{{*p, val}};
        for (auto& [k, f] : solved) f = substitute_differentials(f, one);
        solved[*p] = val;
    }
    for (auto& g0 : s.generators) {
        if (g0.degree() < 2) continue;
        DiffForm g = reduce_linear(g0);
        if (g.is_zero()) continue;
        higher_raw.push_back(g);
    }
    for (auto& g0 : higher_raw) {
        DiffForm g = reduce(g0);
        if (g.is_zero()) continue;
        const Index* lead = nullptr;
        for (auto& [idx, c] : g.terms())
            if (c.is_constant()) {
                lead = &idx;
                break;
            }
        if (!lead) lead = &g.terms().begin()->first;
        Expr lc = g.coefficient(*lead);
        if (!lc.is_constant()) assumptions.push_back(lc);
        higher.emplace_back(*lead, (Expr(1) / lc) * g);
    }
}

DiffForm Reducer::reduce_linear(const DiffForm& a) const { return substitute_differentials(a, solved); }

DiffForm Reducer::reduce(const DiffForm& a0) const {
    DiffForm a = reduce_linear(a0);
    for (int iter = 0; iter < 2000; ++iter) {
        bool changed = false;
        for (auto& [lead, g] : higher) {
            if (static_cast<int>(lead.size()) > a.degree()) continue;
            for (auto& [idx, c] : a.terms()) {
                if (!std::includes(idx.begin(), idx.end(), lead.begin(), lead.end())) continue;
                Index rest;
                for (auto k : idx)
                    if (!std::binary_search(lead.begin(), lead.end(), k)) rest.push_back(k);
                Index merged;
                int sgn = merge_sign(lead, rest, merged);
                // term = c e_idx = sgn c e_lead ^ e_rest ; e_lead = g - (g - e_lead)
                DiffForm corr = wedge(g, DiffForm::basis(a.chart(), rest, Expr(1)));
                a = a - Expr(sgn) * c * corr;
                changed = true;
                break;
            }
            if (changed) break;
        }
        if (!changed) return a;
    }
    return a;
}

}  // namespace detail

using detail::Reducer;

std::string describe(const ExteriorSystem& s) {
    std::ostringstream os;
    os << "chart " << s.chart->name << " (" << s.chart->dim() << " coordinates)\n";
    for (auto& g : s.generators) os << "  " << g.sign_normalized().str() << "\n";
    for (auto& z : s.zero_forms) os << "  0-form: " << z.str() << "\n";
    return os.str();
}

DiffForm algebraic_reduce(const ExteriorSystem& s, const DiffForm& a) {
    Reducer r(s);
    return r.reduce(a);
}

bool in_algebraic_ideal(const ExteriorSystem& s, const DiffForm& a, uint64_t seed) {
    Reducer r(s);
    DiffForm t = r.reduce_linear(a);
    if (t.is_zero()) return true;
    int k = t.degree();
    // differentials that survive the linear substitution
    std::vector<uint16_t> free_idx;
    for (uint16_t i = 0; i < s.chart->dim(); ++i)
        if (!r.solved.count(i)) free_idx.push_back(i);
    std::vector<DiffForm> products;
    for (auto& g : r.higher_raw) {
        if (g.degree() > k) continue;
        size_t extra = static_cast<size_t>(k - g.degree());
        for (auto& sub : detail::increasing_tuples(free_idx.size(), extra)) {
            Index e;
            for (auto j : sub) e.push_back(free_idx[j]);
            DiffForm p = wedge(g, DiffForm::basis(s.chart, e, Expr(1)));
            if (!p.is_zero()) products.push_back(std::move(p));
        }
    }
    if (products.empty()) return false;
    std::vector<Expr> exprs, avoid;
    auto collect = [&](const DiffForm& f) {
        for (auto& [idx, c] : f.terms()) {
            exprs.push_back(c);
            if (!c.den().is_constant()) avoid.push_back(Expr(c.den()));
        }
    };
    collect(t);
    for (auto& p : products) collect(p);
    Point pt = detail::generic_point_for(exprs, avoid, seed);
    std::map<Index, size_t> col;
    auto row_of = [&](const DiffForm& f) {
        std::vector<std::pair<size_t, Rational>> row;
        for (auto& [idx, c] : f.terms()) {
            auto it = col.find(idx);
            size_t j = it == col.end() ? col.emplace(idx, col.size()).first->second : it->second;
            row.emplace_back(j, c.evaluate(pt));
        }
        return row;
    };
    std::vector<std::vector<std::pair<size_t, Rational>>> sparse;
    for (auto& p : products) sparse.push_back(row_of(p));
    auto target = row_of(t);
    auto dense = [&](const std::vector<std::vector<std::pair<size_t, Rational>>>& rows) {
        RatMatrix m(rows.size(), std::vector<Rational>(col.size(), Rational(0)));
        for (size_t i = 0; i < rows.size(); ++i)
            for (auto& [j, v] : rows[i]) m[i][j] += v;
        return m;
    };
    RatMatrix m = dense(sparse);
    size_t r0 = rank_rational(m);
    sparse.push_back(target);
    size_t r1 = rank_rational(dense(sparse));
    return r0 == r1;
}

ExteriorSystem differential_closure(const ExteriorSystem& s) {
    ExteriorSystem out = s;
    size_t i = 0;
    while (i < out.generators.size()) {
        DiffForm dg = d(out.generators[i]);
        ++i;
        if (dg.is_zero()) continue;
        if (in_algebraic_ideal(out, dg)) continue;
        Reducer r(out);
        DiffForm red = r.reduce_linear(dg);
        out.generators.push_back(red.sign_normalized());
    }
    out.closed = true;
    return out;
}

ExteriorSystem slice_eds(const ExteriorSystem& s, Symbol time_coord, const Rational& value) {
    if (std::find(s.independence.begin(), s.independence.end(), time_coord) == s.independence.end())
        throw std::invalid_argument("slice coordinate " + time_coord.name() + " is not an independent variable");
    ExteriorSystem out;
    out.chart = slice_chart(s.chart, time_coord);
    out.closed = s.closed;
    for (auto x : s.independence)
        if (x != time_coord) out.independence.push_back(x);
    for (auto& g : s.generators) {
        DiffForm r = restrict_to_slice(g, time_coord, value);
        if (!r.is_zero()) out.generators.push_back(r);
    }
    Bindings b{{time_coord, Expr(value)}};
    for (auto& z : s.zero_forms) {
        Expr r = substitute(z, b);
        if (!r.is_zero()) out.zero_forms.push_back(r);
    }
    return out;
}

namespace {

// Coordinate with a constant coefficient in which z is linear; fibers first,
// latest coordinate preferred.
std::optional<Symbol> solvable_coordinate(const Chart& ch, const Expr& z, bool allow_base) {
    for (int pass = 0; pass < 2; ++pass) {
        for (size_t i = ch.coords.size(); i-- > 0;) {
            Symbol c = ch.coords[i];
            if (ch.is_base(c) != (pass == 1)) continue;
            if (pass == 1 && !allow_base) continue;
            if (z.num().degree_in(c.id()) != 1) continue;
            auto cs = z.num().coefficients_in(c.id());
            if (cs[1].is_constant()) return c;
        }
    }
    return std::nullopt;
}

}  // namespace

ExteriorSystem restrict_zero_forms(const ExteriorSystem& s, std::vector<Expr>* derived) {
    if (s.zero_forms.empty()) return s;
    Bindings b;
    std::vector<Symbol> removed;
    std::vector<Expr> pending = s.zero_forms;
    bool progress = true;
    while (progress && !pending.empty()) {
        progress = false;
        std::vector<Expr> next;
        for (auto& z0 : pending) {
            Expr z = substitute(z0, b);
            if (z.is_zero()) continue;
            if (z.is_constant()) throw NotCoordinateSolvable(z0.str() + " (inconsistent)");
            auto c = solvable_coordinate(*s.chart, Expr(z.num()), false);
            if (!c) {
                next.push_back(z);
                continue;
            }
            auto cs = z.num().coefficients_in(c->id());
            Expr val = -Expr(cs.count(0) ? cs[0] : Poly()) / Expr(cs[1]);
            Bindings one{{*c, val}};
            for (auto& [k, v] : b) v = substitute(v, one);
            b[*c] = val;
            removed.push_back(*c);
            progress = true;
        }
        pending = std::move(next);
    }
    if (!pending.empty()) throw NotCoordinateSolvable(detail::join_exprs(pending));
    ChartPtr cur = s.chart;
    for (auto c : removed) cur = slice_chart(cur, c);
    auto nc = std::make_shared<Chart>(*cur);
    nc->name = s.chart->name + "|0";
    ChartMap inc{nc, s.chart, {}};
    for (auto c : s.chart->coords) inc.images[c] = b.count(c) ? b[c] : Expr(c);
    ExteriorSystem out;
    out.chart = nc;
    out.independence = s.independence;
    out.closed = s.closed;
    for (auto& g : s.generators) {
        DiffForm r = pullback(inc, g);
        if (r.is_zero()) continue;
        // a semibasic generator vanishes on independent elements only if its coefficients do
        bool semibasic = r.degree() <= static_cast<int>(nc->base.size());
        for (auto& [idx, c] : r.terms())
            for (auto j : idx)
                if (!nc->is_base(nc->coords[j])) semibasic = false;
        if (semibasic) {
            for (auto& [idx, c] : r.terms()) {
                out.zero_forms.push_back(Expr(c.num()));
                if (derived) derived->push_back(out.zero_forms.back());
            }
            continue;
        }
        r = r.sign_normalized();
        bool dup = false;
        for (auto& h : out.generators)
            if (h == r) dup = true;
        if (!dup) out.generators.push_back(r);
    }
    if (!out.zero_forms.empty()) return restrict_zero_forms(out, derived);
    return out;
}

Expr evaluate_on(const DiffForm& f, const std::vector<std::vector<Expr>>& vecs) {
    if (static_cast<size_t>(f.degree()) != vecs.size()) throw std::invalid_argument("evaluate_on: arity mismatch");
    Expr acc;
    for (auto& [idx, c] : f.terms()) {
        std::vector<std::vector<Expr>> m(idx.size(), std::vector<Expr>(idx.size()));
        bool zero_row = false;
        for (size_t r = 0; r < idx.size(); ++r) {
            bool any = false;
            for (size_t s = 0; s < vecs.size(); ++s) {
                m[r][s] = vecs[s][idx[r]];
                if (!m[r][s].is_zero()) any = true;
            }
            if (!any) zero_row = true;
        }
        if (zero_row) continue;
        acc += c * detail::determinant(std::move(m));
    }
    return acc;
}

std::string jet_display(const Chart& c, const JetLabel& j) {
    std::string s = display_name(j.root) + "_";
    std::vector<int> m = j.multi;
    std::sort(m.begin(), m.end());
    for (int p : m) s += display_name(c.base.at(static_cast<size_t>(p)));
    return s;
}

}  // namespace cartan
