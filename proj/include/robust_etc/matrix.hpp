#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace robust_etc {

using Vector = std::vector<double>;

/// Dense, row-major, value-semantic real matrix.
///
/// Sizes in this toolkit are small (n ≤ ~20), so everything is stored densely
/// and copied freely. Constructors reject non-finite entries.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }
  static Matrix identity(std::size_t n);
  static Matrix constant(std::size_t rows, std::size_t cols, double value);
  static Matrix diagonal(std::span<const double> diag);
  static Matrix column(std::span<const double> values);
  static Matrix row(std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> entries() const noexcept { return data_; }

  Matrix transpose() const;
  /// (M + Mᵀ)/2.
  Matrix symmetrized() const;
  double trace() const;
  /// Largest absolute entry (‖·‖_max); 0 for an empty matrix.
  double max_abs() const;
  double frobenius_norm() const;
  bool all_finite() const;

  Matrix& operator+=(const Matrix& rhs);
  Matrix& operator-=(const Matrix& rhs);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix lhs, const Matrix& rhs);
Matrix operator-(Matrix lhs, const Matrix& rhs);
Matrix operator-(Matrix m);
Matrix operator*(const Matrix& lhs, const Matrix& rhs);
Matrix operator*(Matrix m, double s);
Matrix operator*(double s, Matrix m);
Vector operator*(const Matrix& m, std::span<const double> v);

/// xᵀ M x.
double quadratic_form(const Matrix& m, std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> v);
double norm(std::span<const double> v);

}  // namespace robust_etc
