#include "robust_etc/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "robust_etc/error.hpp"
#include "robust_etc/linalg.hpp"

namespace robust_etc {

namespace {

double grid_value(double lo, double hi, std::size_t i, std::size_t count) {
  if (count <= 1) return 0.5 * (lo + hi);
  if (i + 1 == count) return hi;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
}

}  // namespace

ParameterBox::ParameterBox(Vector lo, Vector hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
  if (lo_.size() != hi_.size()) {
    throw InvalidArgument("ParameterBox: lower and upper bounds differ in length");
  }
  for (std::size_t i = 0; i < lo_.size(); ++i) {
    if (!std::isfinite(lo_[i]) || !std::isfinite(hi_[i]) || lo_[i] > hi_[i]) {
      throw InvalidArgument("ParameterBox: invalid interval for coordinate " + std::to_string(i));
    }
  }
}

bool ParameterBox::contains(std::span<const double> p) const {
  if (p.size() != dimension()) return false;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (!(p[i] >= lo_[i] && p[i] <= hi_[i])) return false;
  return true;
}

Vector ParameterBox::clamp(std::span<const double> p, bool& clamped) const {
  if (p.size() != dimension()) {
    throw InvalidArgument("ParameterBox::clamp: expected " + std::to_string(dimension()) +
                          " parameters, got " + std::to_string(p.size()));
  }
  clamped = false;
  Vector out(p.begin(), p.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double c = std::clamp(out[i], lo_[i], hi_[i]);
    if (c != out[i]) clamped = true;
    out[i] = c;
  }
  return out;
}

std::vector<Vector> ParameterBox::vertices() const {
  const std::size_t d = dimension();
  if (d > 20) throw InvalidArgument("ParameterBox::vertices: too many parameters");
  std::vector<Vector> out;
  out.reserve(std::size_t{1} << d);
  for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
    Vector v(d);
    for (std::size_t i = 0; i < d; ++i) v[i] = (mask >> i) & 1u ? hi_[i] : lo_[i];
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<Vector> ParameterBox::sample_points(std::size_t points_per_axis,
                                                std::size_t max_points) const {
  const std::size_t d = dimension();
  std::vector<Vector> out = vertices();
  if (d == 0 || points_per_axis == 0) return out;

  double total = std::pow(static_cast<double>(points_per_axis), static_cast<double>(d));
  if (total <= static_cast<double>(max_points)) {
    std::vector<std::size_t> idx(d, 0);
    while (true) {
      Vector v(d);
      for (std::size_t i = 0; i < d; ++i) v[i] = grid_value(lo_[i], hi_[i], idx[i], points_per_axis);
      out.push_back(std::move(v));
      std::size_t k = 0;
      while (k < d && ++idx[k] == points_per_axis) idx[k++] = 0;
      if (k == d) break;
    }
    return out;
  }

  Vector centre(d);
  for (std::size_t i = 0; i < d; ++i) centre[i] = 0.5 * (lo_[i] + hi_[i]);
  for (std::size_t axis = 0; axis < d; ++axis) {
    for (std::size_t j = 0; j < points_per_axis; ++j) {
      Vector v = centre;
      v[axis] = grid_value(lo_[axis], hi_[axis], j, points_per_axis);
      out.push_back(std::move(v));
    }
  }
  return out;
}

UncertaintyModel::UncertaintyModel(std::vector<Matrix> basis, ParameterBox box, Matrix bound)
    : basis_(std::move(basis)), box_(std::move(box)), bound_(std::move(bound)) {
  require_square(bound_, "UncertaintyModel bound F");
  require_finite(bound_, "UncertaintyModel bound F");
  if (box_.dimension() != basis_.size()) {
    throw InvalidArgument("UncertaintyModel: " + std::to_string(basis_.size()) +
                          " basis matrices but parameter box has dimension " +
                          std::to_string(box_.dimension()));
  }
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    if (basis_[i].rows() != state_dim() || basis_[i].cols() != state_dim()) {
      throw InvalidArgument("UncertaintyModel: basis matrix " + std::to_string(i) +
                            " does not match the state dimension " + std::to_string(state_dim()));
    }
    require_finite(basis_[i], "UncertaintyModel basis");
  }
  if (!is_positive_semidefinite(bound_)) {
    throw InvalidArgument("UncertaintyModel: bound F must be symmetric positive semidefinite");
  }
}

UncertaintyModel UncertaintyModel::none(const Matrix& bound) {
  return UncertaintyModel({}, ParameterBox{}, bound);
}

Matrix UncertaintyModel::delta_A(std::span<const double> p) const {
  if (p.size() != basis_.size()) {
    throw InvalidArgument("delta_A: expected " + std::to_string(basis_.size()) +
                          " parameters, got " + std::to_string(p.size()));
  }
  Matrix out(state_dim(), state_dim());
  for (std::size_t i = 0; i < p.size(); ++i) out += p[i] * basis_[i];
  return out;
}

}  // namespace robust_etc
