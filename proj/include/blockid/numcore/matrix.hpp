#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace blockid::numcore {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  Vector column(std::size_t c) const;

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  Matrix transposed() const;
  /// Columns [first, first + count) as a new matrix.
  Matrix col_block(std::size_t first, std::size_t count) const;
  /// Rows selected by index, in the given order.
  Matrix select_rows(std::span<const std::size_t> idx) const;
  /// Principal submatrix on the given indices.
  Matrix principal(std::span<const std::size_t> idx) const;

  bool all_finite() const noexcept;
  double max_abs() const noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Vector matvec(const Matrix& a, std::span<const double> x);

/// Horizontal concatenation [a | b].
Matrix hcat(const Matrix& a, const Matrix& b);
/// Vertical concatenation [a ; b].
Matrix vcat(const Matrix& a, const Matrix& b);

double max_abs_diff(const Matrix& a, const Matrix& b);
double dot(std::span<const double> a, std::span<const double> b) noexcept;
double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;

}  // namespace blockid::numcore
