#include "blockid/numcore/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "blockid/errors.hpp"

namespace blockid::numcore {

Matrix cholesky(const Matrix& m) {
  if (!m.is_square()) throw DimensionError("cholesky: matrix must be square");
  const std::size_t n = m.rows();
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    auto li = l.row(i);
    for (std::size_t j = 0; j <= i; ++j) {
      auto lj = l.row(j);
      const double s = m(i, j) - dot(li.first(j), lj.first(j));
      if (i == j) {
        if (!(s > 0.0) || !std::isfinite(s)) {
          throw DecompositionError("cholesky: matrix is not positive definite", i);
        }
        li[i] = std::sqrt(s);
      } else {
        li[j] = s / lj[j];
      }
    }
  }
  return l;
}

void solve_lower_inplace(const Matrix& lower, Matrix& b) {
  const std::size_t n = lower.rows();
  if (b.rows() != n) throw DimensionError("solve_lower: row mismatch");
  const std::size_t t = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    auto bi = b.row(i);
    for (std::size_t k = 0; k < i; ++k) {
      const double lik = lower(i, k);
      if (lik == 0.0) continue;
      auto bk = b.row(k);
      for (std::size_t c = 0; c < t; ++c) bi[c] -= lik * bk[c];
    }
    const double d = lower(i, i);
    for (std::size_t c = 0; c < t; ++c) bi[c] /= d;
  }
}

void solve_lower_transposed_inplace(const Matrix& lower, Matrix& y) {
  const std::size_t n = lower.rows();
  if (y.rows() != n) throw DimensionError("solve_lower_transposed: row mismatch");
  const std::size_t t = y.cols();
  for (std::size_t ii = n; ii-- > 0;) {
    auto yi = y.row(ii);
    const double d = lower(ii, ii);
    for (std::size_t c = 0; c < t; ++c) yi[c] /= d;
    auto li = lower.row(ii);
    for (std::size_t k = 0; k < ii; ++k) {
      const double lik = li[k];
      if (lik == 0.0) continue;
      auto yk = y.row(k);
      for (std::size_t c = 0; c < t; ++c) yk[c] -= lik * yi[c];
    }
  }
}

Matrix cholesky_solve(const Matrix& lower, const Matrix& b) {
  Matrix x = b;
  solve_lower_inplace(lower, x);
  solve_lower_transposed_inplace(lower, x);
  return x;
}

Vector cholesky_solve(const Matrix& lower, std::span<const double> b) {
  Matrix x(b.size(), 1, Vector(b.begin(), b.end()));
  solve_lower_inplace(lower, x);
  solve_lower_transposed_inplace(lower, x);
  return Vector(x.data().begin(), x.data().end());
}

LuFactorization::LuFactorization(const Matrix& m) : lu_(m), perm_(m.rows()) {
  if (!m.is_square()) throw DimensionError("LU: matrix must be square");
  const std::size_t n = m.rows();
  std::iota(perm_.begin(), perm_.end(), std::size_t{0});
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    double best = std::abs(lu_(k, k));
    for (std::size_t r = k + 1; r < n; ++r) {
      if (std::abs(lu_(r, k)) > best) {
        best = std::abs(lu_(r, k));
        piv = r;
      }
    }
    if (best == 0.0) throw DecompositionError("LU: matrix is singular", k);
    if (piv != k) {
      std::swap_ranges(lu_.row(k).begin(), lu_.row(k).end(), lu_.row(piv).begin());
      std::swap(perm_[k], perm_[piv]);
    }
    const double d = lu_(k, k);
    for (std::size_t r = k + 1; r < n; ++r) {
      const double f = lu_(r, k) / d;
      lu_(r, k) = f;
      if (f == 0.0) continue;
      for (std::size_t c = k + 1; c < n; ++c) lu_(r, c) -= f * lu_(k, c);
    }
  }
}

Vector LuFactorization::solve(std::span<const double> b) const {
  const std::size_t n = lu_.rows();
  if (b.size() != n) throw DimensionError("LU solve: dimension mismatch");
  Vector x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[perm_[i]];
    for (std::size_t k = 0; k < i; ++k) s -= lu_(i, k) * x[k];
    x[i] = s;
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= lu_(ii, k) * x[k];
    x[ii] = s / lu_(ii, ii);
  }
  return x;
}

Vector singular_values(const Matrix& m) {
  // Rows of u are the columns of m; rotations orthogonalise them pairwise.
  Matrix u = m.transposed();
  const std::size_t n = u.rows();
  constexpr double tol = 1e-15;
  for (int sweep = 0; sweep < 100; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        auto up = u.row(p);
        auto uq = u.row(q);
        const double alpha = dot(up, up);
        const double beta = dot(uq, uq);
        const double gamma = dot(up, uq);
        if (gamma == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t k = 0; k < up.size(); ++k) {
          const double a = up[k];
          const double b = uq[k];
          up[k] = c * a - s * b;
          uq[k] = s * a + c * b;
        }
      }
    }
    if (!rotated) break;
  }
  Vector sv(n);
  for (std::size_t i = 0; i < n; ++i) sv[i] = std::sqrt(dot(u.row(i), u.row(i)));
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

double condition_number(const Matrix& m) {
  if (!m.is_square()) throw DimensionError("condition_number: matrix must be square");
  if (m.rows() == 0) throw DimensionError("condition_number: empty matrix");
  const Vector sv = singular_values(m);
  const double smax = sv.front();
  const double smin = sv.back();
  const double eps = std::numeric_limits<double>::epsilon();
  if (smax == 0.0 || smin <= smax * eps * static_cast<double>(m.rows())) {
    return std::numeric_limits<double>::infinity();
  }
  return smax / smin;
}

}  // namespace blockid::numcore
