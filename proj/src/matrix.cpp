#include "robust_etc/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "robust_etc/error.hpp"

namespace robust_etc {

namespace {

void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) +
                          "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                          "x" + std::to_string(b.cols()));
  }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows_ * cols_) {
    throw InvalidArgument("Matrix: " + std::to_string(data_.size()) + " entries for a " +
                          std::to_string(rows_) + "x" + std::to_string(cols_) + " matrix");
  }
  if (!all_finite()) throw InvalidArgument("Matrix: non-finite entry");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw InvalidArgument("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  if (!all_finite()) throw InvalidArgument("Matrix: non-finite entry");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::constant(std::size_t rows, std::size_t cols, double value) {
  return Matrix(rows, cols, std::vector<double>(rows * cols, value));
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  if (!m.all_finite()) throw InvalidArgument("Matrix::diagonal: non-finite entry");
  return m;
}

Matrix Matrix::column(std::span<const double> values) {
  return Matrix(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

Matrix Matrix::row(std::span<const double> values) {
  return Matrix(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::symmetrized() const {
  if (!is_square()) throw InvalidArgument("symmetrized: matrix is not square");
  Matrix s(rows_, cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) s(i, j) = 0.5 * ((*this)(i, j) + (*this)(j, i));
  return s;
}

double Matrix::trace() const {
  if (!is_square()) throw InvalidArgument("trace: matrix is not square");
  double t = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
  return t;
}

double Matrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix& Matrix::operator+=(const Matrix& rhs) {
  check_same_shape(*this, rhs, "operator+");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += rhs.data_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& rhs) {
  check_same_shape(*this, rhs, "operator-");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= rhs.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator+(Matrix lhs, const Matrix& rhs) { return lhs += rhs; }
Matrix operator-(Matrix lhs, const Matrix& rhs) { return lhs -= rhs; }
Matrix operator-(Matrix m) { return m *= -1.0; }
Matrix operator*(Matrix m, double s) { return m *= s; }
Matrix operator*(double s, Matrix m) { return m *= s; }

Matrix operator*(const Matrix& lhs, const Matrix& rhs) {
  if (lhs.cols() != rhs.rows()) {
    throw InvalidArgument("operator*: inner dimensions " + std::to_string(lhs.cols()) +
                          " and " + std::to_string(rhs.rows()) + " differ");
  }
  Matrix out(lhs.rows(), rhs.cols());
  for (std::size_t i = 0; i < lhs.rows(); ++i)
    for (std::size_t k = 0; k < lhs.cols(); ++k) {
      const double a = lhs(i, k);
      if (a == 0.0) continue;
      for (std::size_t j = 0; j < rhs.cols(); ++j) out(i, j) += a * rhs(k, j);
    }
  return out;
}

Vector operator*(const Matrix& m, std::span<const double> v) {
  if (m.cols() != v.size()) {
    throw InvalidArgument("operator*: matrix has " + std::to_string(m.cols()) +
                          " columns, vector has " + std::to_string(v.size()) + " entries");
  }
  Vector out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out[i] += m(i, j) * v[j];
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_norm(std::span<const double> v) { return dot(v, v); }

double norm(std::span<const double> v) { return std::sqrt(squared_norm(v)); }

double quadratic_form(const Matrix& m, std::span<const double> x) {
  const Vector mx = m * x;
  return dot(x, mx);
}

}  // namespace robust_etc
