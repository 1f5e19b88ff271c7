#pragma once

#include "cartan/eds.hpp"

#include <map>
#include <vector>

namespace cartan::detail {

// Substitutes 1-forms for coordinate differentials (by chart index).
DiffForm substitute_differentials(const DiffForm& a, const std::map<uint16_t, DiffForm>& sub);

// Degree-one generators solved for differentials, and higher generators
// oriented by a leading monomial.
struct Reducer {
    std::map<uint16_t, DiffForm> solved;
    std::vector<std::pair<Index, DiffForm>> higher;  // leading index, generator with unit leading coef
    std::vector<DiffForm> higher_raw;                // higher generators after 1-form substitution
    std::vector<Expr> assumptions;

    explicit Reducer(const ExteriorSystem& s);
    DiffForm reduce_linear(const DiffForm& a) const;
    DiffForm reduce(const DiffForm& a) const;
};

// Generic point for the variables of the given expressions.
Point generic_point_for(const std::vector<Expr>& exprs, const std::vector<Expr>& avoid, uint64_t seed);

std::vector<Index> increasing_tuples(size_t n, size_t k);

template <class T>
T determinant(std::vector<std::vector<T>> m) {
    size_t n = m.size();
    if (n == 0) return T(1);
    if (n == 1) return m[0][0];
    if (n == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
    T acc(0);
    for (size_t c = 0; c < n; ++c) {
        if (m[0][c] == T(0)) continue;
        std::vector<std::vector<T>> minor;
        for (size_t r = 1; r < n; ++r) {
            std::vector<T> row;
            for (size_t k = 0; k < n; ++k)
                if (k != c) row.push_back(m[r][k]);
            minor.push_back(std::move(row));
        }
        T t = m[0][c] * determinant(std::move(minor));
        if (c % 2)
            acc = acc - t;
        else
            acc = acc + t;
    }
    return acc;
}

std::string join_exprs(const std::vector<Expr>& v);

}  // namespace cartan::detail
