#pragma once

// Independent reference computations built on Eigen. Nothing here calls the
// library's own linear algebra.

#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "robust_etc/matrix.hpp"

namespace oracle {

using Mat = Eigen::MatrixXd;

inline Mat to_eigen(const robust_etc::Matrix& m) {
  Mat out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

inline robust_etc::Matrix from_eigen(const Mat& m) {
  robust_etc::Matrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

inline double max_abs_diff(const robust_etc::Matrix& a, const Mat& b) {
  return (to_eigen(a) - b).cwiseAbs().maxCoeff();
}

inline Eigen::VectorXd eigvals(const Mat& m) {
  return Eigen::SelfAdjointEigenSolver<Mat>(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly)
      .eigenvalues();
}

/// Standard DARE P = AᵀPA − AᵀPB(R + BᵀPB)⁻¹BᵀPA + Q by value iteration
/// from P = Q; returns P and K = −(R + BᵀPB)⁻¹BᵀPA.
struct LqrSolution {
  Mat P;
  Mat K;
};

inline LqrSolution lqr_value_iteration(const Mat& A, const Mat& B, const Mat& Q, const Mat& R,
                                       int max_iter = 100000) {
  Mat P = Q;
  for (int it = 0; it < max_iter; ++it) {
    const Mat G = (R + B.transpose() * P * B).ldlt().solve(B.transpose() * P * A);
    Mat next = A.transpose() * P * A - A.transpose() * P * B * G + Q;
    next = 0.5 * (next + next.transpose());
    const double step = (next - P).cwiseAbs().maxCoeff();
    P = next;
    if (step <= 1e-14 * std::max(1.0, P.cwiseAbs().maxCoeff())) break;
  }
  const Mat K = -(R + B.transpose() * P * B).ldlt().solve(B.transpose() * P * A);
  return {P, K};
}

/// Modified DARE via the equivalent product form (P⁻¹ + W)⁻¹ = P(I + WP)⁻¹.
inline Mat modified_dare(const Mat& A, const Mat& W, const Mat& C, int max_iter = 100000) {
  const Eigen::Index n = A.rows();
  const Mat I = Mat::Identity(n, n);
  Mat P = C;
  for (int it = 0; it < max_iter; ++it) {
    Mat next = A.transpose() * P * (I + W * P).partialPivLu().inverse() * A + C;
    next = 0.5 * (next + next.transpose());
    const double step = (next - P).cwiseAbs().maxCoeff();
    P = next;
    if (step <= 1e-14 * std::max(1.0, P.cwiseAbs().maxCoeff())) break;
  }
  return P;
}

inline Mat random_matrix(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols,
                         double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = nd(gen);
  return m;
}

inline Mat random_spd(std::mt19937_64& gen, Eigen::Index n, double shift = 0.1) {
  const Mat G = random_matrix(gen, n, n);
  return G * G.transpose() + shift * Mat::Identity(n, n);
}

}  // namespace oracle
