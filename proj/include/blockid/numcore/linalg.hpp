#pragma once

#include <cstddef>
#include <vector>

#include "blockid/numcore/matrix.hpp"

namespace blockid::numcore {

/// Lower-triangular L with L L^T = m. Throws DecompositionError naming the
/// first non-positive pivot.
Matrix cholesky(const Matrix& m);

/// Solves L y = b in place for every column of b.
void solve_lower_inplace(const Matrix& lower, Matrix& b);
/// Solves L^T x = y in place for every column of y.
void solve_lower_transposed_inplace(const Matrix& lower, Matrix& y);
/// Solves (L L^T) X = B.
Matrix cholesky_solve(const Matrix& lower, const Matrix& b);
Vector cholesky_solve(const Matrix& lower, std::span<const double> b);

/// Partial-pivot LU of a square matrix, kept for repeated solves.
class LuFactorization {
 public:
  explicit LuFactorization(const Matrix& m);
  Vector solve(std::span<const double> b) const;
  std::size_t dim() const noexcept { return lu_.rows(); }

 private:
  Matrix lu_;
  std::vector<std::size_t> perm_;
};

/// Singular values in descending order (one-sided Jacobi).
Vector singular_values(const Matrix& m);

/// sigma_max / sigma_min; +infinity when the matrix is numerically singular.
double condition_number(const Matrix& m);

}  // namespace blockid::numcore
