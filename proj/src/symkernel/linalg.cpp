#include "cartan/linalg.hpp"

#include <algorithm>
#include <set>

namespace cartan {

size_t rank_rational(RatMatrix m) {
    size_t rows = m.size();
    if (!rows) return 0;
    size_t cols = m[0].size();
    size_t r = 0;
    for (size_t c = 0; c < cols && r < rows; ++c) {
        size_t p = r;
        while (p < rows && m[p][c] == 0) ++p;
        if (p == rows) continue;
        std::swap(m[p], m[r]);
        for (size_t i = r + 1; i < rows; ++i) {
            if (m[i][c] == 0) continue;
            Rational f = m[i][c] / m[r][c];
            for (size_t j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
        }
        ++r;
    }
    return r;
}

std::vector<std::vector<Rational>> nullspace_rational(RatMatrix m, size_t cols) {
    size_t rows = m.size();
    std::vector<size_t> pivots;
    size_t r = 0;
    for (size_t c = 0; c < cols && r < rows; ++c) {
        size_t p = r;
        while (p < rows && m[p][c] == 0) ++p;
        if (p == rows) continue;
        std::swap(m[p], m[r]);
        Rational inv = 1 / m[r][c];
        for (size_t j = 0; j < cols; ++j) m[r][j] *= inv;
        for (size_t i = 0; i < rows; ++i) {
            if (i == r || m[i][c] == 0) continue;
            Rational f = m[i][c];
            for (size_t j = 0; j < cols; ++j) m[i][j] -= f * m[r][j];
        }
        pivots.push_back(c);
        ++r;
    }
    std::vector<std::vector<Rational>> basis;
    std::set<size_t> piv(pivots.begin(), pivots.end());
    for (size_t f = 0; f < cols; ++f) {
        if (piv.count(f)) continue;
        std::vector<Rational> v(cols, Rational(0));
        v[f] = 1;
        for (size_t k = 0; k < pivots.size(); ++k) v[pivots[k]] = -m[k][f];
        basis.push_back(std::move(v));
    }
    return basis;
}

size_t rank_bareiss(const ExprMatrix& in) {
    size_t rows = in.size();
    if (!rows) return 0;
    size_t cols = in[0].size();
    // clear denominators row by row
    std::vector<std::vector<Poly>> m(rows, std::vector<Poly>(cols));
    for (size_t i = 0; i < rows; ++i) {
        Poly l(1);
        for (auto& e : in[i]) {
            if (e.den().is_one()) continue;
            Poly g = poly_gcd(l, e.den());
            l = *divide_exact(l * e.den(), g);
        }
        for (size_t j = 0; j < cols; ++j) {
            const Expr& e = in[i][j];
            m[i][j] = e.den().is_one() ? e.num() * l : e.num() * *divide_exact(l, e.den());
        }
    }
    Poly prev(1);
    size_t r = 0;
    for (size_t c = 0; c < cols && r < rows; ++c) {
        size_t p = rows;
        size_t best = ~size_t(0);
        for (size_t i = r; i < rows; ++i)
            if (!m[i][c].is_zero() && m[i][c].terms().size() < best) {
                best = m[i][c].terms().size();
                p = i;
            }
        if (p == rows) continue;
        std::swap(m[p], m[r]);
        for (size_t i = r + 1; i < rows; ++i) {
            for (size_t j = c + 1; j < cols; ++j) {
                Poly v = m[r][c] * m[i][j] - m[i][c] * m[r][j];
                m[i][j] = prev.is_one() ? v : *divide_exact(v, prev);
            }
            m[i][c] = Poly();
        }
        prev = m[r][c];
        ++r;
    }
    return r;
}

size_t rank_sampled(const ExprMatrix& m, uint64_t seed, int samples) {
    std::set<uint32_t> vars;
    for (auto& row : m)
        for (auto& e : row)
            for (uint32_t v : e.variables()) vars.insert(v);
    std::vector<Symbol> syms;
    for (uint32_t v : vars) syms.push_back(Symbol::from_id(v));
    std::vector<Expr> avoid;
    for (auto& row : m)
        for (auto& e : row)
            if (!e.den().is_constant()) avoid.push_back(Expr(e.den()));
    size_t best = 0;
    for (int s = 0; s < samples; ++s) {
        Point pt = generic_point(syms, avoid, seed * 7919u + static_cast<uint64_t>(s) * 104729u + 17u);
        RatMatrix num(m.size());
        for (size_t i = 0; i < m.size(); ++i)
            for (auto& e : m[i]) num[i].push_back(e.evaluate(pt));
        best = std::max(best, rank_rational(std::move(num)));
    }
    return best;
}

size_t rank_expr(const ExprMatrix& m, uint64_t seed) {
    if (m.empty() || m[0].empty()) return 0;
    bool numeric = true;
    for (auto& row : m)
        for (auto& e : row)
            if (!e.is_constant()) numeric = false;
    if (numeric) {
        RatMatrix r(m.size());
        for (size_t i = 0; i < m.size(); ++i)
            for (auto& e : m[i]) r[i].push_back(e.constant_value());
        return rank_rational(std::move(r));
    }
    size_t entries = m.size() * m[0].size();
    size_t sampled = rank_sampled(m, seed);
    if (entries > 400) return sampled;
    size_t exact = rank_bareiss(m);
    if (exact != sampled) throw RankMismatch();
    return exact;
}

namespace {

// Prefer constant pivots, then the sparsest candidate.
int pivot_cost(const Expr& e) {
    if (e.is_constant()) return 0;
    return 1 + static_cast<int>(e.num().terms().size() + e.den().terms().size());
}

}  // namespace

Echelon rref(const ExprMatrix& in, size_t cols, const std::vector<size_t>& col_priority) {
    Echelon out;
    ExprMatrix m = in;
    std::vector<size_t> order = col_priority;
    if (order.empty())
        for (size_t c = 0; c < cols; ++c) order.push_back(c);
    size_t rows = m.size();
    size_t r = 0;
    std::vector<size_t> pivots;
    for (size_t c : order) {
        if (r >= rows) break;
        size_t p = rows;
        int best = 1 << 30;
        for (size_t i = r; i < rows; ++i) {
            if (m[i][c].is_zero()) continue;
            int cost = pivot_cost(m[i][c]);
            if (cost < best) {
                best = cost;
                p = i;
            }
        }
        if (p == rows) continue;
        std::swap(m[p], m[r]);
        Expr pv = m[r][c];
        if (!pv.is_constant()) out.assumptions.push_back(pv);
        if (!pv.is_one())
            for (size_t j = 0; j < cols; ++j)
                if (!m[r][j].is_zero()) m[r][j] = m[r][j] / pv;
        for (size_t i = 0; i < rows; ++i) {
            if (i == r || m[i][c].is_zero()) continue;
            Expr f = m[i][c];
            for (size_t j = 0; j < cols; ++j)
                if (!m[r][j].is_zero()) m[i][j] = m[i][j] - f * m[r][j];
        }
        pivots.push_back(c);
        ++r;
    }
    m.resize(r);
    out.rows = std::move(m);
    out.pivots = std::move(pivots);
    return out;
}

Kernel nullspace(const ExprMatrix& m, size_t cols) {
    Kernel k;
    Echelon e = rref(m, cols);
    k.assumptions = e.assumptions;
    std::set<size_t> piv(e.pivots.begin(), e.pivots.end());
    for (size_t f = 0; f < cols; ++f) {
        if (piv.count(f)) continue;
        std::vector<Expr> v(cols);
        v[f] = Expr(1);
        for (size_t i = 0; i < e.pivots.size(); ++i) v[e.pivots[i]] = -e.rows[i][f];
        k.basis.push_back(std::move(v));
    }
    return k;
}

std::optional<Solution> solve(const ExprMatrix& m, const std::vector<Expr>& b, size_t cols) {
    ExprMatrix aug = m;
    for (size_t i = 0; i < aug.size(); ++i) aug[i].push_back(b[i]);
    std::vector<size_t> order;
    for (size_t c = 0; c < cols; ++c) order.push_back(c);
    Echelon e = rref(aug, cols + 1, order);
    Solution s;
    s.x.assign(cols, Expr());
    s.assumptions = e.assumptions;
    // any row with all-zero coefficient part and nonzero rhs is inconsistent
    for (size_t i = 0; i < e.rows.size(); ++i) s.x[e.pivots[i]] = e.rows[i][cols];
    for (size_t i = 0; i < m.size(); ++i) {
        Expr acc;
        for (size_t j = 0; j < cols; ++j)
            if (!m[i][j].is_zero() && !s.x[j].is_zero()) acc += m[i][j] * s.x[j];
        if (acc != b[i]) return std::nullopt;
    }
    return s;
}

}  // namespace cartan
