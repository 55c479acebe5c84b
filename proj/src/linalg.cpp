#include "robust_etc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "robust_etc/error.hpp"

namespace robust_etc {

namespace {

constexpr double kSymmetryTol = 1e-9;
constexpr double kJacobiOffTol = 1e-12;
constexpr int kJacobiMaxSweeps = 100;
constexpr double kMinReciprocalCondition = 1e-13;
constexpr double kRankTol = 1e-10;

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

Matrix checked_symmetric(const Matrix& m, const char* what) {
  require_square(m, what);
  require_finite(m, what);
  const double defect = (m - m.transpose()).max_abs();
  if (defect > kSymmetryTol * std::max(1.0, m.max_abs())) {
    throw InvalidArgument(std::string(what) + ": matrix is not symmetric (defect " +
                          std::to_string(defect) + ")");
  }
  return m.symmetrized();
}

double one_norm(const Matrix& m) {
  double best = 0.0;
  for (std::size_t j = 0; j < m.cols(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) s += std::abs(m(i, j));
    best = std::max(best, s);
  }
  return best;
}

// Gauss-Jordan with partial pivoting. Returns false on an exactly zero pivot.
bool gauss_jordan_inverse(const Matrix& m, Matrix& inv) {
  const std::size_t n = m.rows();
  Matrix a = m;
  inv = Matrix::identity(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (a(piv, k) == 0.0) return false;
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a(k, j), a(piv, j));
        std::swap(inv(k, j), inv(piv, j));
      }
    }
    const double d = a(k, k);
    for (std::size_t j = 0; j < n; ++j) {
      a(k, j) /= d;
      inv(k, j) /= d;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k) continue;
      const double f = a(i, k);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a(i, j) -= f * a(k, j);
        inv(i, j) -= f * inv(k, j);
      }
    }
  }
  return inv.all_finite();
}

enum class Definiteness { kPositive, kSemi };

bool pivoted_ldlt_test(const Matrix& m, double tol, Definiteness mode) {
  Matrix s = checked_symmetric(m, "definiteness test");
  const std::size_t n = s.rows();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (s(i, i) > s(piv, piv)) piv = i;
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(s(k, j), s(piv, j));
      for (std::size_t i = 0; i < n; ++i) std::swap(s(i, k), s(i, piv));
    }
    const double d = s(k, k);
    if (mode == Definiteness::kPositive) {
      if (!(d > tol)) return false;
    } else {
      if (d < -tol) return false;
      if (d <= tol) {
        // Largest remaining pivot is ~0: the trailing block must vanish.
        for (std::size_t i = k; i < n; ++i)
          for (std::size_t j = k; j < n; ++j)
            if (std::abs(s(i, j)) > tol) return false;
        return true;
      }
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double l = s(i, k) / d;
      for (std::size_t j = k + 1; j < n; ++j) s(i, j) -= l * s(k, j);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      s(i, k) = 0.0;
      s(k, i) = 0.0;
    }
  }
  return true;
}

}  // namespace

void require_square(const Matrix& m, const char* what) {
  if (!m.is_square()) {
    throw InvalidArgument(std::string(what) + ": expected a square matrix, got " +
                          std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.all_finite()) throw InvalidArgument(std::string(what) + ": non-finite entry");
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument(std::string(what) + ": expected " + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + ", got " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()));
  }
}

std::vector<double> sym_eigvals(const Matrix& m) {
  Matrix a = checked_symmetric(m, "sym_eigvals");
  const std::size_t n = a.rows();
  const double scale = a.frobenius_norm();
  if (scale > 0.0) {
    for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
      if (off_diagonal_norm(a) <= kJacobiOffTol * scale) break;
      for (std::size_t p = 0; p + 1 < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
          const double apq = a(p, q);
          if (apq == 0.0) continue;
          const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
          const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::hypot(theta, 1.0));
          const double c = 1.0 / std::hypot(t, 1.0);
          const double s = t * c;
          for (std::size_t k = 0; k < n; ++k) {
            const double akp = a(k, p);
            const double akq = a(k, q);
            a(k, p) = c * akp - s * akq;
            a(k, q) = s * akp + c * akq;
          }
          for (std::size_t k = 0; k < n; ++k) {
            const double apk = a(p, k);
            const double aqk = a(q, k);
            a(p, k) = c * apk - s * aqk;
            a(q, k) = s * apk + c * aqk;
          }
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

double lambda_min(const Matrix& m) {
  const auto ev = sym_eigvals(m);
  if (ev.empty()) throw InvalidArgument("lambda_min: empty matrix");
  return ev.front();
}

double lambda_max(const Matrix& m) {
  const auto ev = sym_eigvals(m);
  if (ev.empty()) throw InvalidArgument("lambda_max: empty matrix");
  return ev.back();
}

bool is_positive_definite(const Matrix& m, double tol) {
  return pivoted_ldlt_test(m, tol, Definiteness::kPositive);
}

bool is_positive_semidefinite(const Matrix& m, double tol) {
  return pivoted_ldlt_test(m, tol, Definiteness::kSemi);
}

double reciprocal_condition(const Matrix& m) {
  require_square(m, "reciprocal_condition");
  require_finite(m, "reciprocal_condition");
  if (m.rows() == 0) return 1.0;
  Matrix inv;
  if (!gauss_jordan_inverse(m, inv)) return 0.0;
  const double denom = one_norm(m) * one_norm(inv);
  return denom > 0.0 ? 1.0 / denom : 0.0;
}

Matrix inverse(const Matrix& m) {
  require_square(m, "inverse");
  require_finite(m, "inverse");
  Matrix inv;
  if (!gauss_jordan_inverse(m, inv)) throw NumericalError("inverse: matrix is singular");
  const double rcond = 1.0 / (one_norm(m) * one_norm(inv));
  if (!(rcond >= kMinReciprocalCondition)) {
    throw NumericalError("inverse: matrix is singular to working precision (rcond " +
                         std::to_string(rcond) + ")");
  }
  return inv;
}

Matrix pseudo_inverse(const Matrix& b) {
  require_finite(b, "pseudo_inverse");
  if (b.cols() == 0 || b.rows() < b.cols()) {
    throw NumericalError("pseudo_inverse: B (" + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()) + ") cannot have full column rank");
  }
  const Matrix bt = b.transpose();
  const Matrix gram = (bt * b).symmetrized();
  const auto ev = sym_eigvals(gram);
  const double sigma_min = std::sqrt(std::max(ev.front(), 0.0));
  const double sigma_max = std::sqrt(std::max(ev.back(), 0.0));
  if (!(sigma_min > kRankTol * std::max(1.0, sigma_max))) {
    throw NumericalError("pseudo_inverse: B is rank deficient (smallest singular value " +
                         std::to_string(sigma_min) + ")");
  }
  // Thin QR by Gram-Schmidt with one reorthogonalization pass, then B⁺ = R⁻¹Qᵀ.
  const std::size_t n = b.rows();
  const std::size_t m = b.cols();
  Matrix q = b;
  Matrix r(m, m);
  for (std::size_t j = 0; j < m; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < j; ++i) {
        double dot = 0.0;
        for (std::size_t k = 0; k < n; ++k) dot += q(k, i) * q(k, j);
        for (std::size_t k = 0; k < n; ++k) q(k, j) -= dot * q(k, i);
        r(i, j) += dot;
      }
    }
    double norm = 0.0;
    for (std::size_t k = 0; k < n; ++k) norm += q(k, j) * q(k, j);
    norm = std::sqrt(norm);
    r(j, j) = norm;
    for (std::size_t k = 0; k < n; ++k) q(k, j) /= norm;
  }
  Matrix x = q.transpose();
  for (std::size_t ii = m; ii-- > 0;) {
    for (std::size_t c = 0; c < n; ++c) {
      double v = x(ii, c);
      for (std::size_t k = ii + 1; k < m; ++k) v -= r(ii, k) * x(k, c);
      x(ii, c) = v / r(ii, ii);
    }
  }
  return x;
}

double spectral_norm(const Matrix& m) {
  require_finite(m, "spectral_norm");
  if (m.empty()) return 0.0;
  const Matrix mt = m.transpose();
  const Matrix gram = m.rows() < m.cols() ? (m * mt).symmetrized() : (mt * m).symmetrized();
  return std::sqrt(std::max(lambda_max(gram), 0.0));
}

}  // namespace robust_etc
