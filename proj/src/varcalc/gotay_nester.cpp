#include "cartan/varcalc.hpp"

#include <algorithm>

namespace cartan {

namespace {

Expr unit_leading(const Expr& e) {
    if (e.is_zero()) return e;
    return e / Expr(e.num().leading_coef());
}

bool dominates(const std::vector<int>& a, const std::vector<int>& b) {
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i] < b[i]) return false;
    return true;
}

// Multi-indices of order 1..k over m coordinates, by order, then lexicographic.
std::vector<std::vector<int>> multi_indices(size_t m, int k) {
    std::vector<std::vector<int>> out;
    for (int ord = 1; ord <= k; ++ord) {
        std::vector<int> cur(m, 0);
        auto rec = [&](auto& self, size_t pos, int left) -> void {
            if (pos + 1 == m) {
                cur[pos] = left;
                out.push_back(cur);
                return;
            }
            for (int c = left; c >= 0; --c) {
                cur[pos] = c;
                self(self, pos + 1, left - c);
            }
        };
        if (m > 0) rec(rec, 0, ord);
    }
    return out;
}

// Highest-ranked jet occurring in e (invalid symbol if none).
Symbol leading_jet(const JetSpace& jets, const Expr& e) {
    Symbol best;
    for (auto v : e.variables()) {
        Symbol s = Symbol::from_id(v);
        if (!jets.split(s)) continue;
        if (!best.valid() || jets.ranks_above(s, best)) best = s;
    }
    return best;
}

std::optional<Expr> linear_constant_coefficient(const Poly& p, Symbol s) {
    if (p.degree_in(s.id()) != 1) return std::nullopt;
    auto cs = p.coefficients_in(s.id());
    const Poly& c = cs.at(1);
    if (!c.is_constant()) return std::nullopt;
    return Expr(c);
}

SubstitutionRule solve_for(const Expr& e, Symbol s, const Expr& coef) {
    Expr num(e.num());
    Expr rest = num - coef * Expr(s);
    return SubstitutionRule{s, -rest / coef, 0};
}

}  // namespace

std::string to_string(RoundStatus s) {
    switch (s) {
        case RoundStatus::continuing: return "continuing";
        case RoundStatus::terminated: return "terminated";
        case RoundStatus::singular_split: return "singular_split";
        case RoundStatus::budget: return "budget";
    }
    return "?";
}

Expr reduce_density(const JetSpace& jets, const std::vector<SubstitutionRule>& rules, const Expr& e,
                    long skip_source) {
    std::vector<std::pair<JetSpace::Jet, const SubstitutionRule*>> lhs;
    for (auto& r : rules) {
        if (skip_source >= 0 && r.source == static_cast<size_t>(skip_source)) continue;
        auto j = jets.split(r.lhs);
        if (j) lhs.emplace_back(*j, &r);
    }
    Expr cur = e;
    for (int iter = 0; iter < 400; ++iter) {
        Bindings b;
        for (auto v : cur.variables()) {
            Symbol s = Symbol::from_id(v);
            auto js = jets.split(s);
            if (!js) continue;
            for (auto& [jr, r] : lhs) {
                if (jr.field != js->field || !dominates(js->counts, jr.counts)) continue;
                std::vector<int> diff(js->counts.size());
                for (size_t i = 0; i < diff.size(); ++i) diff[i] = js->counts[i] - jr.counts[i];
                b[s] = jets.total_derivative(r->rhs, diff);
                break;
            }
        }
        if (b.empty()) break;
        cur = substitute(cur, b);
    }
    return cur;
}

SubstitutionRule orient(const JetSpace& jets, const Expr& e) {
    Symbol best;
    Expr best_coef;
    for (auto v : e.num().variables()) {
        Symbol s = Symbol::from_id(v);
        if (!jets.split(s)) continue;
        auto c = linear_constant_coefficient(e.num(), s);
        if (!c) continue;
        if (!best.valid() || jets.ranks_above(s, best)) {
            best = s;
            best_coef = *c;
        }
    }
    if (!best.valid()) throw LeadingDerivativeUnsolvable(e.str());
    return solve_for(e, best, best_coef);
}

std::vector<Expr> ConstraintChain::constraints() const {
    std::vector<Expr> out;
    for (auto& r : rounds)
        for (auto& c : r.new_constraints) out.push_back(c.expression);
    return out;
}

ConstraintChain gotay_nester(const SliceDynamics& s, int max_rounds, int consequence_order) {
    GotayNesterOptions o;
    o.max_rounds = max_rounds;
    o.consequence_order = consequence_order;
    return gotay_nester(s, o);
}

ConstraintChain gotay_nester(const SliceDynamics& s, const GotayNesterOptions& opt) {
    if (opt.max_rounds < 1) throw std::invalid_argument("gotay_nester: max_rounds must be at least 1");
    ConstraintChain ch;
    ch.jets = s.jets;
    const JetSpace& jets = ch.jets;
    size_t nf = s.field_order.size();
    const Expr& h = s.hamiltonian.expression;
    std::vector<Expr> eh(nf);
    for (size_t a = 0; a < nf; ++a) eh[a] = jets.euler(h, s.field_order[a]);

    struct Entry {
        Expr expr;
        bool has_vector = false;
    };
    std::vector<Entry> entries;

    auto add_constraint = [&](const Expr& e, ConstraintRound& round, bool keep_raw) {
        Expr red = reduce_density(jets, ch.rules, e);
        if (red.is_zero()) return false;
        Expr shown = unit_leading(keep_raw ? e : red);
        size_t idx = entries.size();
        entries.push_back({shown});
        round.new_constraints.push_back({s.field_order, shown});
        try {
            auto r = orient(jets, red);
            r.source = idx;
            for (auto& old : ch.rules) old.rhs = reduce_density(jets, {r}, old.rhs);
            ch.rules.push_back(r);
        } catch (const LeadingDerivativeUnsolvable& ex) {
            ch.warnings.push_back(ex.what());
        }
        return true;
    };

    // round 1: dH along the kernel of omega
    ConstraintRound first;
    auto ker = kernel_omega(s);
    std::vector<Expr> assumed;
    for (auto& z : ker.assumptions) {
        Expr m(z.num().monic());
        if (m.is_constant() || std::find(assumed.begin(), assumed.end(), m) != assumed.end()) continue;
        assumed.push_back(m);
        ch.warnings.push_back("assume " + m.str() + " != 0");
    }
    for (auto& k : ker.vectors) {
        Expr c;
        for (size_t a = 0; a < nf; ++a)
            if (!k[a].is_zero()) c += k[a] * eh[a];
        if (!c.is_zero()) add_constraint(Expr(c.num()), first, true);
    }
    for (auto& c : opt.initial_constraints) add_constraint(c, first, true);
    if (entries.empty()) {
        first.status = RoundStatus::terminated;
        ch.rounds.push_back(first);
        return ch;
    }
    ch.rounds.push_back(first);

    int test_counter = 0;
    auto multis = multi_indices(jets.coords().size(), opt.consequence_order);
    for (int r = 2;; ++r) {
        if (r > opt.max_rounds) {
            ch.rounds.back().status = RoundStatus::budget;
            return ch;
        }
        ConstraintRound round;
        std::vector<Expr> residues;
        size_t known = entries.size();
        for (size_t i = 0; i < known; ++i) {
            if (entries[i].has_vector) continue;
            const Expr c = entries[i].expr;
            std::vector<std::pair<Expr, bool>> candidates;
            // the constraint as found, then its form modulo the other rules
            candidates.emplace_back(c, false);
            Expr rep = reduce_density(jets, ch.rules, c, static_cast<long>(i));
            if (!rep.is_zero() && rep != c) candidates.emplace_back(rep, false);
            for (auto& m : multis) {
                Expr dc = reduce_density(jets, ch.rules, jets.total_derivative(c, m), static_cast<long>(i));
                if (!dc.is_zero()) candidates.emplace_back(dc, true);
            }
            for (auto& [cand, is_consequence] : candidates) {
                Symbol f("gn_test_" + std::to_string(++test_counter));
                set_display_name(f, "f" + std::to_string(test_counter));
                auto hv = hamiltonian_vector(s, cand, f, opt.max_ibp_order);
                if (!hv) continue;
                entries[i].has_vector = true;
                round.complement_vectors.push_back(*hv);
                if (is_consequence) round.consequences_used.push_back({s.field_order, cand});
                JetSpace jf = jets;
                jf.add_field(f);
                Expr dh;
                for (size_t a = 0; a < nf; ++a)
                    if (!hv->components[a].is_zero()) dh += eh[a] * hv->components[a];
                Expr res = reduce_density(jets, ch.rules, jf.euler(dh, f));
                if (!res.is_zero()) residues.push_back(unit_leading(res));
                break;
            }
        }
        for (auto& res : residues) {
            std::vector<Expr> fac;
            for (auto& f : factor_simple_full(Expr(res.num())).factors) {
                if (f.is_constant() || !jets.involves_fields(f)) continue;
                if (std::find(fac.begin(), fac.end(), f) == fac.end()) fac.push_back(f);
            }
            if (fac.size() >= 2) round.split_factors.push_back(res);
            add_constraint(res, round, false);
        }
        if (!round.split_factors.empty()) {
            round.status = RoundStatus::singular_split;
            ch.rounds.push_back(round);
            return ch;
        }
        if (round.new_constraints.empty()) {
            round.status = RoundStatus::terminated;
            ch.rounds.push_back(round);
            return ch;
        }
        ch.rounds.push_back(round);
    }
}

Projection eliminate_auxiliary(const JetSpace& jets, const std::vector<Expr>& constraints,
                               const std::vector<Symbol>& keep) {
    Projection out;
    auto is_aux = [&](Symbol s) {
        auto j = jets.split(s);
        return j && std::find(keep.begin(), keep.end(), j->field) == keep.end();
    };
    std::vector<SubstitutionRule> rules;
    std::vector<bool> consumed(constraints.size(), false);
    for (bool changed = true; changed;) {
        changed = false;
        for (size_t i = 0; i < constraints.size() && !changed; ++i) {
            if (consumed[i]) continue;
            Expr e = reduce_density(jets, rules, constraints[i]);
            if (e.is_zero()) {
                consumed[i] = true;
                continue;
            }
            // prefer the lowest-order auxiliary jet, so a whole field goes at once
            Symbol best;
            Expr coef;
            int best_order = 0;
            for (auto v : e.num().variables()) {
                Symbol s = Symbol::from_id(v);
                if (!is_aux(s)) continue;
                auto c = linear_constant_coefficient(e.num(), s);
                if (!c) continue;
                int o = jets.split(s)->order();
                if (!best.valid() || o < best_order || (o == best_order && jets.ranks_above(s, best))) {
                    best = s;
                    coef = *c;
                    best_order = o;
                }
            }
            if (!best.valid()) continue;
            auto r = solve_for(e, best, coef);
            for (auto& old : rules) old.rhs = reduce_density(jets, {r}, old.rhs);
            rules.push_back(r);
            consumed[i] = true;
            changed = true;
        }
    }
    for (size_t i = 0; i < constraints.size(); ++i) {
        if (consumed[i]) continue;
        Expr e = reduce_density(jets, rules, constraints[i]);
        if (e.is_zero()) continue;
        bool aux = false;
        for (auto v : e.variables()) aux = aux || is_aux(Symbol::from_id(v));
        if (aux) {
            out.notes.push_back("not projectable: " + constraints[i].str());
            continue;
        }
        Expr m(e.num().monic());
        if (std::find(out.constraints.begin(), out.constraints.end(), m) == out.constraints.end())
            out.constraints.push_back(m);
    }
    return out;
}

Projection eliminate_auxiliary(const ConstraintChain& chain, const std::vector<Symbol>& keep) {
    return eliminate_auxiliary(chain.jets, chain.constraints(), keep);
}

std::vector<Expr> minimal_constraints(const JetSpace& jets, const std::vector<Expr>& cs) {
    std::vector<Expr> sorted;
    for (auto& c : cs)
        if (!c.is_zero()) sorted.push_back(Expr(c.num().monic()));
    std::stable_sort(sorted.begin(), sorted.end(), [&](const Expr& a, const Expr& b) {
        Symbol la = leading_jet(jets, a), lb = leading_jet(jets, b);
        return jets.ranks_above(lb, la);
    });
    std::vector<Expr> kept;
    std::vector<SubstitutionRule> rules;
    for (auto& c : sorted) {
        Expr r = reduce_density(jets, rules, c);
        if (r.is_zero()) continue;
        kept.push_back(c);
        try {
            rules.push_back(orient(jets, r));
        } catch (const LeadingDerivativeUnsolvable&) {
        }
    }
    return kept;
}

bool same_constraints(const JetSpace& jets, const std::vector<Expr>& a, const std::vector<Expr>& b) {
    auto ma = minimal_constraints(jets, a), mb = minimal_constraints(jets, b);
    if (ma.size() != mb.size()) return false;
    for (auto& x : ma)
        if (std::find(mb.begin(), mb.end(), x) == mb.end()) return false;
    return true;
}

DiracResult dirac_via_eds(const VariationalProblem& p, Symbol time_coord, const Rational& value, int max_steps,
                          uint64_t seed) {
    DiracResult out;
    auto l = build_lepage_local(p, seed);
    out.hamilton_cartan = hamilton_cartan(l);
    const auto& hc = out.hamilton_cartan;
    auto dt = VectorField::coordinate(hc.chart, time_coord);
    for (auto& g : hc.generators) {
        auto lg = lie_derivative(dt, g);
        if (!lg.is_zero() && !in_algebraic_ideal(hc, lg, seed)) throw TauInvarianceFailed(g.str());
    }
    out.kuranishi = cartan_kuranishi(hc, l.n, max_steps, seed);
    if (!out.kuranishi.involutive) throw BudgetExhausted("Cartan-Kuranishi did not reach an involutive system");
    out.slice_system = slice_eds(out.kuranishi.final, time_coord, value);
    return out;
}

}  // namespace cartan
