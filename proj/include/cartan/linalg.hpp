#pragma once

// Linear algebra over the rationals and over the field of rational functions.

#include "cartan/symkernel.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace cartan {

using ExprMatrix = std::vector<std::vector<Expr>>;
using RatMatrix = std::vector<std::vector<Rational>>;

class RankMismatch : public std::runtime_error {
public:
    RankMismatch() : std::runtime_error("exact and sampled ranks disagree") {}
};

size_t rank_rational(RatMatrix m);
// Kernel basis of a rational matrix with `cols` columns.
std::vector<std::vector<Rational>> nullspace_rational(RatMatrix m, size_t cols);

// Rank over Q(symbols).  Exact fraction-free elimination when the matrix has
// at most 400 entries, otherwise the maximum rank over three generic points.
size_t rank_expr(const ExprMatrix& m, uint64_t seed = 1);
size_t rank_bareiss(const ExprMatrix& m);
size_t rank_sampled(const ExprMatrix& m, uint64_t seed, int samples = 3);

// Gauss-Jordan reduction over Q(symbols).  Pivots prefer constant entries;
// every non-constant pivot is recorded as an assumption (pivot != 0).
struct Echelon {
    ExprMatrix rows;              // reduced rows (only nonzero rows kept)
    std::vector<size_t> pivots;   // pivot column for each row
    std::vector<Expr> assumptions;
};
// col_priority: optional order in which columns are tried as pivots.
Echelon rref(const ExprMatrix& m, size_t cols, const std::vector<size_t>& col_priority = {});

struct Kernel {
    std::vector<std::vector<Expr>> basis;
    std::vector<Expr> assumptions;
};
Kernel nullspace(const ExprMatrix& m, size_t cols);

// Solves m x = b.  Free variables are set to zero.  nullopt if inconsistent.
struct Solution {
    std::vector<Expr> x;
    std::vector<Expr> assumptions;
};
std::optional<Solution> solve(const ExprMatrix& m, const std::vector<Expr>& b, size_t cols);

}  // namespace cartan
