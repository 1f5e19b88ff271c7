#include "cartan/varcalc.hpp"

namespace cartan {

std::vector<Expr> EvolutionEquations::equations() const {
    std::vector<Expr> out;
    for (size_t i = 0; i < determined.size(); ++i) out.push_back(Expr(determined[i]) - values[i]);
    return out;
}

EvolutionEquations evolution_equations(const SliceDynamics& s, const ConstraintChain& ch) {
    const JetSpace& jets = ch.jets;
    const size_t nf = s.field_order.size();

    // time derivatives live one jet level up; the chain's jet space sees them as parameters
    std::vector<Symbol> coords = jets.coords();
    coords.push_back(s.time_coord);
    JetSpace ext(coords, jets.fields());
    EvolutionEquations out;
    for (Symbol f : s.field_order) out.velocities.push_back(ext.jet(f, s.time_coord));

    auto reduce = [&](const Expr& e) { return reduce_density(jets, ch.rules, e); };
    ExprMatrix rows;
    for (size_t b = 0; b < nf; ++b) {
        std::vector<Expr> row(nf + 1);
        for (size_t a = 0; a < nf; ++a) row[a] = reduce(s.omega[a][b]);
        row[nf] = reduce(jets.euler(s.hamiltonian.expression, s.field_order[b]));
        rows.push_back(std::move(row));
    }
    for (const Expr& c : ch.constraints()) {
        bool zero_order = true;
        for (auto v : c.variables()) {
            auto j = jets.split(Symbol::from_id(v));
            if (j && j->order() > 0) zero_order = false;
        }
        if (!zero_order) continue;
        std::vector<Expr> row(nf + 1);
        for (size_t a = 0; a < nf; ++a) row[a] = reduce(partial(c, s.field_order[a]));
        rows.push_back(std::move(row));
    }

    auto ech = rref(rows, nf + 1);
    out.assumptions = ech.assumptions;
    std::vector<bool> pivot(nf, false);
    for (size_t i = 0; i < ech.rows.size(); ++i) {
        size_t p = ech.pivots[i];
        if (p == nf) {
            out.consistent = false;
            continue;
        }
        pivot[p] = true;
        Expr value = ech.rows[i][nf];
        for (size_t a = 0; a < nf; ++a)
            if (a != p && !ech.rows[i][a].is_zero()) value -= ech.rows[i][a] * Expr(out.velocities[a]);
        out.determined.push_back(out.velocities[p]);
        out.values.push_back(value);
    }
    for (size_t a = 0; a < nf; ++a)
        if (!pivot[a]) out.undetermined.push_back(out.velocities[a]);
    return out;
}

}  // namespace cartan
