#pragma once

#include <vector>

#include "robust_etc/matrix.hpp"

namespace robust_etc {

inline constexpr double kDefaultDefinitenessTol = 1e-9;

/// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
///
/// The input must be square with ‖M − Mᵀ‖_max ≤ 1e-9·max(1, ‖M‖_max); it is
/// symmetrized before iterating. Throws InvalidArgument otherwise.
std::vector<double> sym_eigvals(const Matrix& m);

/// Smallest / largest eigenvalue of a symmetric matrix.
double lambda_min(const Matrix& m);
double lambda_max(const Matrix& m);

/// True iff a diagonally pivoted LDLᵀ factorization of M runs to completion
/// with every pivot > tol.
bool is_positive_definite(const Matrix& m, double tol = kDefaultDefinitenessTol);

/// Semidefinite variant: pivots ≥ −tol, and once the largest remaining pivot
/// drops below tol the trailing Schur complement must vanish to tol.
bool is_positive_semidefinite(const Matrix& m, double tol = kDefaultDefinitenessTol);

/// LU inverse with partial pivoting. Throws NumericalError when the
/// reciprocal 1-norm condition number is below 1e-13.
Matrix inverse(const Matrix& m);

/// Reciprocal 1-norm condition number, 0 for an exactly singular matrix.
double reciprocal_condition(const Matrix& m);

/// B⁺ = (BᵀB)⁻¹Bᵀ for B with full column rank.
///
/// The rank guard requires σ_min(B) > 1e-10·max(1, σ_max(B)); rank-deficient
/// input raises NumericalError since BB⁺ would not be a projector.
Matrix pseudo_inverse(const Matrix& b);

/// √λ_max(MᵀM).
double spectral_norm(const Matrix& m);

/// Shape checks shared by every module.
void require_square(const Matrix& m, const char* what);
void require_finite(const Matrix& m, const char* what);
void require_same_shape(const Matrix& a, const Matrix& b, const char* what);

}  // namespace robust_etc
