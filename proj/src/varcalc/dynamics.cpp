#include "cartan/varcalc.hpp"

#include <algorithm>

namespace cartan {

namespace {

// Tangent vectors of a generic section of the slice chart: the i-th carries
// d/dx_i and the x_i-derivative of every field.
std::vector<std::vector<Expr>> section_vectors(const ChartPtr& sc, const JetSpace& jets) {
    std::vector<std::vector<Expr>> vecs;
    for (auto b : sc->base) {
        std::vector<Expr> v(sc->dim());
        v[static_cast<size_t>(sc->index(b))] = Expr(1);
        for (auto f : jets.fields())
            if (sc->has(f)) v[static_cast<size_t>(sc->index(f))] = Expr(jets.jet(f, b));
        vecs.push_back(v);
    }
    return vecs;
}

}  // namespace

JetSpace slice_jet_space(const ChartPtr& slice) { return JetSpace(slice->base, slice->fibers()); }

SliceDynamics slice_dynamics(const LepageProblem& l, Symbol time_coord, const Rational& value) {
    const ChartPtr& c = l.chart;
    if (!c->is_base(time_coord)) throw std::invalid_argument("slice coordinate is not a base coordinate: " + time_coord.name());
    SliceDynamics s;
    s.time_coord = time_coord;
    s.time_value = value;
    DiffForm om = restrict_to_slice(d(l.lepage_form), time_coord, value);
    ChartPtr sc = om.chart();
    s.slice_chart = sc;
    s.field_order = sc->fibers();
    s.jets = slice_jet_space(sc);
    size_t nf = s.field_order.size();
    s.omega.assign(nf, std::vector<Expr>(nf));

    std::vector<std::vector<Expr>> units;
    for (auto b : sc->base) {
        std::vector<Expr> u(sc->dim());
        u[static_cast<size_t>(sc->index(b))] = Expr(1);
        units.push_back(u);
    }
    auto field_pos = [&](Symbol f) {
        return static_cast<size_t>(std::find(s.field_order.begin(), s.field_order.end(), f) - s.field_order.begin());
    };
    for (auto& [idx, coef] : om.terms()) {
        std::vector<Symbol> fib;
        size_t nb = 0;
        for (auto i : idx) {
            Symbol x = sc->coords[i];
            if (sc->is_base(x)) ++nb; else fib.push_back(x);
        }
        DiffForm term = DiffForm::basis(sc, idx, coef);
        if (fib.size() != 2 || nb != sc->base.size()) throw NotUltralocal(term.str());
        DiffForm r = interior_product(VectorField::coordinate(sc, fib[1]),
                                      interior_product(VectorField::coordinate(sc, fib[0]), term));
        Expr w = evaluate_on(r, units);
        size_t a = field_pos(fib[0]), b = field_pos(fib[1]);
        s.omega[a][b] += w;
        s.omega[b][a] -= w;
    }

    DiffForm h = restrict_to_slice(interior_product(VectorField::coordinate(c, time_coord), l.lepage_form), time_coord, value);
    s.hamiltonian.slice_fields = s.field_order;
    s.hamiltonian.expression = h.is_zero() ? Expr(0) : evaluate_on(h, section_vectors(sc, s.jets));
    return s;
}

KernelBasis kernel_omega(const SliceDynamics& s) {
    auto k = nullspace(s.omega, s.field_order.size());
    return {k.basis, k.assumptions};
}

std::optional<HamiltonianVector> hamiltonian_vector(const SliceDynamics& s, const Expr& constraint, Symbol test_symbol,
                                                    int max_ibp_order) {
    JetSpace jets = s.jets;
    jets.add_field(test_symbol);
    size_t nf = s.field_order.size();
    Expr density = Expr(test_symbol) * constraint;
    std::vector<Expr> grad(nf);
    for (size_t b = 0; b < nf; ++b) grad[b] = jets.euler(density, s.field_order[b]);
    ExprMatrix mt(nf, std::vector<Expr>(nf));
    for (size_t a = 0; a < nf; ++a)
        for (size_t b = 0; b < nf; ++b) mt[b][a] = s.omega[a][b];
    auto sol = solve(mt, grad, nf);
    if (!sol) return std::nullopt;
    for (auto& x : sol->x)
        for (auto& j : jets.jets_of(x, test_symbol))
            if (j.order() > max_ibp_order) return std::nullopt;
    return HamiltonianVector{test_symbol, constraint, sol->x};
}

std::vector<Expr> section_constraints(const ExteriorSystem& slice, const JetSpace& jets) {
    const ChartPtr& sc = slice.chart;
    auto vecs = section_vectors(sc, jets);
    std::vector<Expr> out;
    auto push = [&](const Expr& e) {
        if (e.is_zero()) return;
        Expr m(e.num().monic());
        if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    };
    size_t n = sc->base.size();
    for (auto& g : slice.generators) {
        size_t k = static_cast<size_t>(g.degree());
        if (k > n) continue;
        if (k == 0) {
            push(g.value());
            continue;
        }
        // every k-subset of the section's tangent vectors
        std::vector<size_t> sel(k);
        for (size_t i = 0; i < k; ++i) sel[i] = i;
        for (;;) {
            std::vector<std::vector<Expr>> vs;
            for (auto i : sel) vs.push_back(vecs[i]);
            push(evaluate_on(g, vs));
            size_t i = k;
            while (i > 0 && sel[i - 1] == n - k + i - 1) --i;
            if (i == 0) break;
            ++sel[i - 1];
            for (size_t j = i; j < k; ++j) sel[j] = sel[j - 1] + 1;
        }
    }
    for (auto& z : slice.zero_forms) push(z);
    return out;
}

}  // namespace cartan
