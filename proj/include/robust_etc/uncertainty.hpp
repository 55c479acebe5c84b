#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "robust_etc/matrix.hpp"

namespace robust_etc {

/// Axis-aligned box Ω = [lo₁, hi₁] × … × [lo_d, hi_d] of admissible parameters.
class ParameterBox {
 public:
  ParameterBox() = default;
  ParameterBox(Vector lo, Vector hi);

  std::size_t dimension() const noexcept { return lo_.size(); }
  const Vector& lo() const noexcept { return lo_; }
  const Vector& hi() const noexcept { return hi_; }

  bool contains(std::span<const double> p) const;
  /// Coordinate-wise clamp into the box; `clamped` reports whether anything moved.
  Vector clamp(std::span<const double> p, bool& clamped) const;

  /// All 2^d corners (a single empty point when d = 0).
  std::vector<Vector> vertices() const;

  /// Vertices followed by a tensor grid of `points_per_axis` points per
  /// coordinate. Above `max_points` grid points the tensor grid is replaced by
  /// per-coordinate grid lines through the box centre.
  std::vector<Vector> sample_points(std::size_t points_per_axis,
                                    std::size_t max_points = 1'000'000) const;

  friend bool operator==(const ParameterBox&, const ParameterBox&) = default;

 private:
  Vector lo_;
  Vector hi_;
};

/// Affine parametric perturbation ΔA(p) = Σᵢ pᵢ·Eᵢ over Ω, with the bound
/// matrix F that the cost functional and the feasibility conditions use.
class UncertaintyModel {
 public:
  UncertaintyModel(std::vector<Matrix> basis, ParameterBox box, Matrix bound);

  /// Model with no uncertain directions (ΔA ≡ 0) in dimension n.
  static UncertaintyModel none(const Matrix& bound);

  std::size_t state_dim() const noexcept { return bound_.rows(); }
  std::size_t parameter_count() const noexcept { return basis_.size(); }
  const std::vector<Matrix>& basis() const noexcept { return basis_; }
  const ParameterBox& box() const noexcept { return box_; }
  const Matrix& bound() const noexcept { return bound_; }

  /// Σᵢ pᵢ·Eᵢ. `p` must have one entry per basis matrix; no clamping here.
  Matrix delta_A(std::span<const double> p) const;

  friend bool operator==(const UncertaintyModel&, const UncertaintyModel&) = default;

 private:
  std::vector<Matrix> basis_;
  ParameterBox box_;
  Matrix bound_;
};

}  // namespace robust_etc
