#include "internal.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace cartan {

std::vector<Expr> Branch::defining_equations() const {
    std::vector<Expr> out;
    for (auto& [s, v] : solved) out.push_back(Expr((Expr(s) - v).num()));
    for (auto& z : zero_forms) out.push_back(Expr(z.num()));
    for (auto& r : residual_equations) out.push_back(Expr(r.num()));
    return out;
}

bool IntegralVariety::is_graph_symbol(Symbol s) const {
    for (auto& row : graph_symbols)
        for (auto g : row)
            if (g == s) return true;
    return false;
}

namespace {

Symbol graph_symbol(const Chart& ch, Symbol fiber, size_t base_pos) {
    Symbol base = ch.base[base_pos];
    Symbol g(fiber.name() + "~" + base.name());
    auto it = ch.jets.find(fiber.id());
    if (it != ch.jets.end()) {
        JetLabel j = it->second;
        j.multi.push_back(static_cast<int>(base_pos));
        set_display_name(g, jet_display(ch, j));
    } else {
        set_display_name(g, display_name(fiber) + "_" + display_name(base));
    }
    return g;
}

struct State {
    std::map<Symbol, Expr> solved;
    std::map<Symbol, Expr> coords;
    std::vector<Expr> zero_forms;
    std::vector<Expr> equations;
    std::vector<Expr> assumptions;
    std::vector<std::string> flags;
};

class Brancher {
public:
    Brancher(const IntegralVariety& v) : v_(v) {
        int r = 0;
        // rank: later fiber outranks earlier; within a fiber later direction
        for (auto& row : v.graph_symbols)
            for (auto g : row) {
                rank_[g.id()] = r++;
                graph_.insert(g.id());
            }
        for (auto c : v.system.chart->coords) coord_.insert(c.id());
    }

    std::vector<Branch> run(std::vector<Expr> eqs) {
        State s;
        s.equations = std::move(eqs);
        process(s, true);
        return std::move(out_);
    }

private:
    const IntegralVariety& v_;
    std::map<uint32_t, int> rank_;
    std::set<uint32_t> graph_, coord_;
    std::vector<Branch> out_;
    int depth_ = 0;

    bool has_graph(const Expr& e) const {
        for (auto x : e.variables())
            if (graph_.count(x)) return true;
        return false;
    }

    Bindings all_bindings(const State& s) const {
        Bindings b = s.coords;
        for (auto& [k, v] : s.solved) b[k] = v;
        return b;
    }

    // Substitute current bindings; keep primitive numerators; drop zeros and duplicates.
    bool normalize(State& s) {
        Bindings b = all_bindings(s);
        std::vector<Expr> eqs;
        for (auto& e0 : s.equations) {
            Expr e = b.empty() ? e0 : substitute(e0, b);
            if (e.is_zero()) continue;
            if (e.is_constant()) return false;
            Poly p = e.num().monic();
            Expr pe(p);
            // compare structurally: printed forms use display names, which may coincide
            if (std::find(eqs.begin(), eqs.end(), pe) == eqs.end()) eqs.push_back(pe);
        }
        s.equations = std::move(eqs);
        return true;
    }

    void bind(State& s, Symbol sym, const Expr& val, bool coordinate) {
        Bindings one{{sym, val}};
        for (auto& [k, v] : s.solved) v = substitute(v, one);
        for (auto& [k, v] : s.coords) v = substitute(v, one);
        if (coordinate)
            s.coords[sym] = val;
        else
            s.solved[sym] = val;
    }

    // Linear in a graph symbol with constant coefficient: highest rank wins.
    bool solve_constant_linear(State& s) {
        for (size_t i = 0; i < s.equations.size(); ++i) {
            const Poly& p = s.equations[i].num();
            int best = -1;
            Symbol bs;
            for (auto x : p.variables()) {
                if (!graph_.count(x) || p.degree_in(x) != 1) continue;
                auto cs = p.coefficients_in(x);
                if (!cs[1].is_constant()) continue;
                if (rank_[x] > best) {
                    best = rank_[x];
                    bs = Symbol::from_id(x);
                }
            }
            if (best < 0) continue;
            auto cs = p.coefficients_in(bs.id());
            Expr val = -Expr(cs.count(0) ? cs[0] : Poly()) / Expr(cs[1]);
            s.equations.erase(s.equations.begin() + static_cast<long>(i));
            bind(s, bs, val, false);
            return true;
        }
        return false;
    }

    bool solve_coordinate(State& s) {
        const Chart& ch = *v_.system.chart;
        for (size_t i = 0; i < s.equations.size(); ++i) {
            const Expr& e = s.equations[i];
            if (has_graph(e)) continue;
            const Poly& p = e.num();
            for (size_t k = ch.coords.size(); k-- > 0;) {
                Symbol c = ch.coords[k];
                if (p.degree_in(c.id()) != 1) continue;
                auto cs = p.coefficients_in(c.id());
                if (!cs[1].is_constant()) continue;
                Expr val = -Expr(cs.count(0) ? cs[0] : Poly()) / Expr(cs[1]);
                s.zero_forms.push_back(e);
                s.equations.erase(s.equations.begin() + static_cast<long>(i));
                bind(s, c, val, true);
                return true;
            }
        }
        return false;
    }

    // Returns true if a branch split was performed (children processed).
    bool try_factor(State& s, bool analyzed) {
        for (size_t i = 0; i < s.equations.size(); ++i) {
            auto f = factor_simple_full(s.equations[i]);
            std::vector<Expr> distinct;
            for (auto& x : f.factors) {
                if (x.is_constant()) continue;
                bool dup = false;
                for (auto& y : distinct)
                    if (y == x) dup = true;
                if (!dup) distinct.push_back(x);
            }
            if (distinct.size() == 1 && f.factors.size() > 1) {
                s.equations[i] = distinct[0];
                continue;
            }
            if (distinct.size() < 2) continue;
            for (auto& x : distinct) {
                State c = s;
                c.equations[i] = x;
                process(c, analyzed);
            }
            return true;
        }
        return false;
    }

    bool solve_nonconstant_linear(State& s, State& complement) {
        for (size_t i = 0; i < s.equations.size(); ++i) {
            const Poly& p = s.equations[i].num();
            int best = -1;
            Symbol bs;
            for (auto x : p.variables()) {
                if (!graph_.count(x) || p.degree_in(x) != 1) continue;
                auto cs = p.coefficients_in(x);
                if (has_graph(Expr(cs[1]))) continue;
                if (rank_[x] > best) {
                    best = rank_[x];
                    bs = Symbol::from_id(x);
                }
            }
            if (best < 0) continue;
            auto cs = p.coefficients_in(bs.id());
            Expr coef(cs[1]);
            complement = s;
            complement.equations.push_back(coef);
            complement.flags.push_back("complement of " + coef.str() + " != 0");
            Expr val = -Expr(cs.count(0) ? cs[0] : Poly()) / coef;
            s.equations.erase(s.equations.begin() + static_cast<long>(i));
            // record the radical of the coefficient once
            Expr rad(1);
            std::vector<Expr> seen;
            for (auto& f : factor_simple_full(coef).factors) {
                if (f.is_constant() || std::find(seen.begin(), seen.end(), f) != seen.end()) continue;
                seen.push_back(f);
                rad = rad * f;
            }
            if (std::find(s.assumptions.begin(), s.assumptions.end(), rad) == s.assumptions.end()) {
                s.assumptions.push_back(rad);
                s.flags.push_back("assume " + rad.str() + " != 0");
            }
            bind(s, bs, val, false);
            return true;
        }
        return false;
    }

    // A binding that kills an assumed-nonzero expression contradicts the branch.
    bool assumptions_hold(const State& s) const {
        Bindings b = all_bindings(s);
        for (auto& a : s.assumptions)
            if (substitute(a, b).is_zero()) return false;
        return true;
    }

    void process(State s, bool analyzed) {
        ++depth_;
        try {
            process_inner(std::move(s), analyzed);
        } catch (const ZeroDenominatorAfterSubstitution&) {
            // the branch contradicts one of its own nonvanishing assumptions
        }
        --depth_;
    }

    void process_inner(State s, bool analyzed) {
        if (depth_ > 64) throw std::runtime_error("integral variety: branching too deep");
        for (;;) {
            if (!assumptions_hold(s)) return;
            if (!normalize(s)) return;  // inconsistent
            if (solve_constant_linear(s)) continue;
            if (solve_coordinate(s)) continue;
            if (!analyzed) break;
            if (try_factor(s, analyzed)) return;
            State comp;
            if (solve_nonconstant_linear(s, comp)) {
                process(comp, false);
                continue;
            }
            break;
        }
        Branch b;
        b.solved = s.solved;
        b.coordinate_bindings = s.coords;
        b.assumptions = s.assumptions;
        b.flags = s.flags;
        b.analyzed = analyzed;
        for (auto& e : s.equations) {
            if (has_graph(e))
                b.residual_equations.push_back(e);
            else
                b.zero_forms.push_back(e);
        }
        // zero-forms already bound are listed first
        std::vector<Expr> z = s.zero_forms;
        z.insert(z.end(), b.zero_forms.begin(), b.zero_forms.end());
        b.zero_forms = z;
        if (!analyzed) b.flags.push_back("not analyzed");
        if (analyzed && !b.residual_equations.empty()) b.flags.push_back("unbranchable residual equations");
        out_.push_back(std::move(b));
    }
};

// B is contained in A when A's defining equations vanish on B.
bool contained(const Branch& b, const Branch& a) {
    Bindings bb = b.coordinate_bindings;
    for (auto& [k, v] : b.solved) bb[k] = v;
    for (auto& e : a.defining_equations()) {
        Expr r;
        try {
            r = substitute(e, bb);
        } catch (const ZeroDenominatorAfterSubstitution&) {
            return false;
        }
        if (r.is_zero()) continue;
        // tolerate equations of B that are still unresolved
        bool found = false;
        for (auto& x : b.residual_equations)
            if (Expr(x.num().monic()) == Expr(r.num().monic())) found = true;
        for (auto& x : b.zero_forms)
            if (Expr(substitute(x, bb).num().monic()) == Expr(r.num().monic()) && !r.is_zero()) found = true;
        if (!found) return false;
    }
    return true;
}

}  // namespace

IntegralVariety integral_variety(const ExteriorSystem& s, int n, uint64_t) {
    IntegralVariety v;
    v.system = s;
    v.n = n;
    const Chart& ch = *s.chart;
    if (static_cast<size_t>(n) != ch.base.size())
        throw std::invalid_argument("integral_variety: n must equal the number of independent variables");
    v.fibers = ch.fibers();
    for (auto f : v.fibers) {
        std::vector<Symbol> row;
        for (size_t i = 0; i < ch.base.size(); ++i) row.push_back(graph_symbol(ch, f, i));
        v.graph_symbols.push_back(std::move(row));
    }
    // graph vectors v_i = d/dx_i + sum_a p^a_i d/dy_a
    std::vector<std::vector<Expr>> vecs(static_cast<size_t>(n), std::vector<Expr>(ch.dim()));
    for (size_t i = 0; i < static_cast<size_t>(n); ++i) {
        vecs[i][static_cast<size_t>(ch.index(ch.base[i]))] = Expr(1);
        for (size_t a = 0; a < v.fibers.size(); ++a)
            vecs[i][static_cast<size_t>(ch.index(v.fibers[a]))] = Expr(v.graph_symbols[a][i]);
    }
    for (auto& g : s.generators) {
        if (g.degree() > n) continue;
        for (auto& t : detail::increasing_tuples(static_cast<size_t>(n), static_cast<size_t>(g.degree()))) {
            std::vector<std::vector<Expr>> sel;
            for (auto k : t) sel.push_back(vecs[k]);
            Expr e = evaluate_on(g, sel);
            if (!e.is_zero()) v.equations.push_back(Expr(e.num()));
        }
    }
    std::vector<Expr> eqs = v.equations;
    for (auto& z : s.zero_forms) eqs.push_back(Expr(z.num()));
    Brancher br(v);
    auto all = br.run(eqs);
    // prune branches contained in another one
    std::vector<bool> drop(all.size(), false);
    for (size_t i = 0; i < all.size(); ++i)
        for (size_t j = 0; j < all.size() && !drop[i]; ++j) {
            if (i == j || drop[j]) continue;
            if (!all[j].analyzed && all[i].analyzed) continue;
            if (contained(all[i], all[j])) {
                bool mutual = contained(all[j], all[i]);
                if (!mutual || j < i) drop[i] = true;
            }
        }
    for (size_t i = 0; i < all.size(); ++i)
        if (!drop[i]) v.branches.push_back(std::move(all[i]));
    // analyzed branches first, those free of zero-forms and residuals ahead of the rest
    auto tier = [](const Branch& b) {
        if (!b.analyzed) return 2;
        return b.zero_forms.empty() && b.residual_equations.empty() ? 0 : 1;
    };
    std::stable_sort(v.branches.begin(), v.branches.end(),
                     [&](const Branch& a, const Branch& b) { return tier(a) < tier(b); });
    for (size_t i = 0; i < v.branches.size(); ++i) v.branches[i].id = "B" + std::to_string(i + 1);
    for (auto& b : v.branches)
        if (b.analyzed && !b.residual_equations.empty())
            v.warnings.push_back("UnbranchableVariety: branch " + b.id + " keeps " +
                                 std::to_string(b.residual_equations.size()) + " unresolved equations");
    return v;
}

size_t principal_branch(const IntegralVariety& v) {
    for (size_t i = 0; i < v.branches.size(); ++i)
        if (v.branches[i].analyzed && v.branches[i].residual_equations.empty()) return i;
    for (size_t i = 0; i < v.branches.size(); ++i)
        if (v.branches[i].analyzed) return i;
    if (v.branches.empty()) throw std::runtime_error("integral variety is empty");
    return 0;
}

}  // namespace cartan
