#include "cartan/cli.hpp"

#include <algorithm>
#include <functional>

namespace cartan {

namespace {

std::string eq_str(const Expr& lhs, const Expr& rhs) { return lhs.str() + " = " + rhs.str(); }

BranchReport branch_report(const IntegralVariety& v, size_t i, const std::vector<std::string>& names) {
    const Branch& b = v.branches[i];
    BranchReport r;
    r.id = b.id;
    r.name = i < names.size() ? names[i] : b.id;
    r.analyzed = b.analyzed;
    for (auto& [s, e] : b.solved) r.equations.push_back(eq_str(Expr(s), e));
    for (auto& [s, e] : b.coordinate_bindings) r.equations.push_back(eq_str(Expr(s), e));
    for (auto& z : b.zero_forms) r.equations.push_back(z.str() + " = 0");
    for (auto& z : b.residual_equations) r.equations.push_back(z.str() + " = 0");
    for (auto& a : b.assumptions) r.assumptions.push_back(a.str() + " != 0");
    for (auto& f : b.flags)
        if (f.rfind("assume ", 0) != 0) r.flags.push_back(f);  // already listed as assumptions
    std::vector<std::string> seen;
    for (auto& e : r.equations)
        if (std::find(seen.begin(), seen.end(), e) == seen.end()) seen.push_back(e);
    r.equations = seen;
    return r;
}

// Cartan's test at the coordinate flag, then at a generic one when the
// coordinate flag is not regular for a branch without zero-forms.
CharacterReport test_branch(const ExteriorSystem& s, const IntegralVariety& v, size_t i, const RunOptions& opt) {
    auto rep = characters(v, i, opt.seed, opt.flag_order);
    const Branch& b = v.branches[i];
    if (!rep.involutive_at_flag && b.zero_forms.empty() && b.residual_equations.empty()) {
        auto g = characters(s, make_generic_flag(v, i, opt.seed), b, v);
        if (g.involutive_at_flag) {
            g.notes.push_back("Cartan test holds at a generic (non-coordinate) flag");
            return g;
        }
    }
    return rep;
}

void set_characters(Report& r, const CharacterReport& c) {
    r.characters = c.characters;
    r.reduced_characters = c.reduced_characters;
    r.codim = c.variety_codim;
    r.involutive = c.involutive_at_flag;
    for (auto& n : c.notes) r.notes.push_back(n);
    if (!c.stable) r.warnings.push_back("characters differ between seeds");
    if (!c.nested) r.warnings.push_back("polar spaces are not nested along the flag");
}

void list_generators(Report& r, const ExteriorSystem& s) {
    for (auto& g : s.generators) r.generators.push_back(g.str());
    for (auto& z : s.zero_forms) r.zero_forms.push_back(z.str());
}

struct Context {
    const ProblemSpec& spec;
    const RunOptions& opt;
    int line = 0;  // declaration feeding the current stage

    template <class F>
    auto guard(F&& f) -> decltype(f()) {
        try {
            return f();
        } catch (const SpecError&) {
            throw;
        } catch (const std::exception& e) {
            throw SpecError(line, 1, e.what());
        }
    }

    // The declared exterior system, closed; else the Hamilton-Cartan system of the problem.
    ExteriorSystem system() {
        if (!spec.systems.empty()) {
            const auto& s = spec.systems.front();
            line = s.line;
            return guard([&] { return s.system.closed ? s.system : differential_closure(s.system); });
        }
        if (spec.problem) {
            line = spec.problem->line;
            return guard([&] {
                auto hc = hamilton_cartan(build_lepage_local(spec.problem->problem, opt.seed));
                return hc.zero_forms.empty() ? hc : restrict_zero_forms(hc);
            });
        }
        throw SpecError(0, 0, "the command needs an eds or a problem declaration");
    }

    const SpecProblem& problem() {
        if (!spec.problem) throw SpecError(0, 0, "the command needs a problem declaration");
        line = spec.problem->line;
        return *spec.problem;
    }

    std::pair<Symbol, Rational> slice() {
        if (opt.slice) return *opt.slice;
        if (spec.slice) return *spec.slice;
        throw SpecError(0, 0, "the command needs a slice (declare one or pass --slice)");
    }
};

void chain_report(Report& r, const ConstraintChain& ch) {
    int k = 1;
    for (auto& rd : ch.rounds) {
        ChainRoundReport cr;
        cr.round = k++;
        cr.status = to_string(rd.status);
        for (auto& c : rd.new_constraints) cr.constraints.push_back(c.expression.str());
        cr.complement_vectors = static_cast<int>(rd.complement_vectors.size());
        for (auto& s : rd.split_factors) cr.split_factors.push_back(s.str());
        r.chain.push_back(cr);
    }
    for (auto& ru : ch.rules) r.rules.push_back(eq_str(Expr(ru.lhs), ru.rhs));
    for (auto& w : ch.warnings) r.warnings.push_back(w);
}

void kuranishi_report(Report& r, const KuranishiResult& k) {
    if (!k.trace.empty()) set_characters(r, k.trace.back());
    r.involutive = k.involutive;
    for (auto& z : k.surfaced_zero_forms) r.surfaced.push_back("step " + std::to_string(z.step) + ": " + z.expr.str());
    r.notes.push_back("Cartan-Kuranishi analyses: " + std::to_string(k.trace.size()));
    if (k.budget_exhausted) r.warnings.push_back("prolongation budget exhausted before involution");
}

}  // namespace

const std::vector<std::string>& commands() {
    static const std::vector<std::string> c{"analyze", "involution", "prolong", "slice", "dirac", "gotay-nester"};
    return c;
}

Report run(const ProblemSpec& spec, const std::string& command, const RunOptions& opt_in) {
    RunOptions opt = opt_in;
    if (opt.flag_order.empty()) opt.flag_order = spec.flag_order;
    Context ctx{spec, opt};
    Report r;
    r.command = command;
    r.spec_name = spec.chart ? spec.chart->name : "";
    r.seed = opt.seed;
    for (auto& c : spec.checks)
        if (!c.holds) r.warnings.push_back("check on line " + std::to_string(c.line) + " fails: " + c.text);

    if (command == "analyze" || command == "involution" || command == "prolong") {
        ExteriorSystem s = ctx.system();
        int n = static_cast<int>(s.independence.size());
        auto v = ctx.guard([&] { return integral_variety(s, n, opt.seed); });
        for (auto& w : v.warnings) r.warnings.push_back(w);
        size_t pb = principal_branch(v);
        if (command == "analyze") {
            for (size_t i = 0; i < v.branches.size(); ++i) {
                auto br = branch_report(v, i, spec.branch_names);
                if (v.branches[i].analyzed) {
                    try {
                        br.characters = test_branch(s, v, i, opt);
                    } catch (const std::exception& e) {
                        br.flags.push_back(std::string("no characters: ") + e.what());
                    }
                }
                r.branches.push_back(br);
            }
            if (pb < r.branches.size() && r.branches[pb].characters) set_characters(r, *r.branches[pb].characters);
            list_generators(r, s);
        } else if (command == "involution") {
            r.branches.push_back(branch_report(v, pb, spec.branch_names));
            list_generators(r, s);
            const Branch& b = v.branches[pb];
            if (!b.zero_forms.empty() || !b.residual_equations.empty()) {
                // characters are only meaningful after restricting to the zero-forms
                r.involutive = false;
                r.warnings.push_back("principal branch " + b.id +
                                     " carries zero-forms; restrict them first (dirac runs the Cartan-Kuranishi loop)");
                return r;
            }
            auto c = ctx.guard([&] { return test_branch(s, v, pb, opt); });
            r.branches.back().characters = c;
            set_characters(r, c);
        } else {
            auto p = ctx.guard([&] { return prolong(v, pb); });
            list_generators(r, p);
            auto vp = ctx.guard([&] { return integral_variety(p, n, opt.seed); });
            size_t pp = principal_branch(vp);
            r.branches.push_back(branch_report(vp, pp, {}));
            auto c = ctx.guard([&] { return test_branch(p, vp, pp, opt); });
            r.branches.back().characters = c;
            set_characters(r, c);
            r.notes.push_back("prolonged chart dimension " + std::to_string(p.chart->dim()));
        }
        return r;
    }

    if (command == "slice") {
        ExteriorSystem s = ctx.system();
        auto [t, val] = ctx.slice();
        auto sl = ctx.guard([&] { return slice_eds(s, t, val); });
        list_generators(r, sl);
        return r;
    }

    if (command == "dirac") {
        auto [t, val] = ctx.slice();
        if (spec.problem) {
            const auto& sp = ctx.problem();
            auto res = ctx.guard([&] { return dirac_via_eds(sp.problem, t, val, opt.max_steps, opt.seed); });
            kuranishi_report(r, res.kuranishi);
            list_generators(r, res.slice_system);
            if (!sp.keep.empty()) {
                auto jets = slice_jet_space(res.slice_system.chart);
                auto cs = section_constraints(res.slice_system, jets);
                auto pr = eliminate_auxiliary(jets, cs, sp.keep);
                for (auto& e : minimal_constraints(jets, pr.constraints)) r.projection.push_back(e.str());
                for (auto& n : pr.notes) r.notes.push_back(n);
            }
            return r;
        }
        ExteriorSystem s = ctx.system();
        int n = static_cast<int>(s.independence.size());
        auto k = ctx.guard([&] { return cartan_kuranishi(s, n, opt.max_steps, opt.seed); });
        kuranishi_report(r, k);
        list_generators(r, ctx.guard([&] { return slice_eds(k.final, t, val); }));
        return r;
    }

    if (command == "gotay-nester") {
        const auto& sp = ctx.problem();
        auto [t, val] = ctx.slice();
        auto s = ctx.guard([&] { return slice_dynamics(build_lepage_local(sp.problem, opt.seed), t, val); });
        auto ch = ctx.guard([&] {
            GotayNesterOptions g;
            g.max_rounds = opt.max_rounds;
            g.consequence_order = opt.consequence_order;
            g.initial_constraints = sp.initial_constraints;
            return gotay_nester(s, g);
        });
        chain_report(r, ch);
        if (ch.status() == RoundStatus::terminated) {
            auto ev = ctx.guard([&] { return evolution_equations(s, ch); });
            for (size_t i = 0; i < ev.determined.size(); ++i) r.evolution.push_back(eq_str(Expr(ev.determined[i]), ev.values[i]));
            for (auto u : ev.undetermined) r.undetermined.push_back(Expr(u).str());
            if (!ev.consistent) r.warnings.push_back("Hamilton's equations are inconsistent on the final constraint set");
        }
        if (!sp.keep.empty()) {
            auto pr = eliminate_auxiliary(ch, sp.keep);
            for (auto& e : minimal_constraints(ch.jets, pr.constraints)) r.projection.push_back(e.str());
            for (auto& n : pr.notes) r.notes.push_back(n);
        }
        return r;
    }

    throw std::invalid_argument("unknown command: " + command);
}

}  // namespace cartan
