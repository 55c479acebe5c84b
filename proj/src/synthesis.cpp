#include "robust_etc/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "robust_etc/error.hpp"
#include "robust_etc/linalg.hpp"

namespace robust_etc {

namespace {

constexpr double kHoldsRelTol = 1e-9;
constexpr double kMarginalRelTol = 1e-6;
constexpr double kMatchedTol = 1e-12;

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_shape(const Matrix& m, std::size_t rows, std::size_t cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw InvalidArgument(std::string(what) + ": expected " + std::to_string(rows) + "x" +
                          std::to_string(cols) + ", got " + shape(m));
  }
}

void check_system(const Matrix& A, const Matrix& B, const SynthesisParams& params,
                  const Matrix& F) {
  require_square(A, "A");
  require_finite(A, "A");
  require_finite(B, "B");
  const std::size_t n = A.rows();
  if (B.rows() != n || B.cols() == 0) {
    throw InvalidArgument("B: expected " + std::to_string(n) + " rows and at least one column, got " +
                          shape(B));
  }
  const std::size_t m = B.cols();
  require_shape(params.Q(), n, n, "Q");
  require_shape(params.R1(), m, m, "R1");
  require_shape(params.R2(), n, n, "R2");
  require_shape(F, n, n, "F");
  if (!is_positive_semidefinite(F)) {
    throw InvalidArgument("F must be symmetric positive semidefinite");
  }
}

// Value iteration P ← Aᵀ(P⁻¹ + W)⁻¹A + C from P₀ = C.
Matrix iterate_riccati(const Matrix& A, const Matrix& W, const Matrix& C,
                       const RiccatiOptions& options) {
  if (!is_positive_definite(C)) {
    throw NumericalError(
        "infeasible parameterization: Q + F + beta^2 I is not positive definite, so the "
        "Riccati iterate cannot stay positive definite");
  }
  const Matrix At = A.transpose();
  Matrix P = C;
  double step = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= options.max_iterations; ++it) {
    const Matrix S = inverse(P) + W;
    Matrix next = (At * inverse(S) * A + C).symmetrized();
    if (!is_positive_definite(next)) {
      throw NumericalError("infeasible parameterization: Riccati iterate " + std::to_string(it) +
                           " lost positive definiteness");
    }
    step = (next - P).max_abs();
    P = std::move(next);
    if (step <= options.step_tol * std::max(1.0, P.max_abs())) return P;
  }
  throw ConvergenceError("Riccati iteration did not converge in " +
                             std::to_string(options.max_iterations) +
                             " iterations (last step " + std::to_string(step) + ")",
                         options.max_iterations, step);
}

Matrix cost_constant(const SynthesisParams& params, const Matrix& F) {
  const std::size_t n = F.rows();
  return params.Q() + F + params.beta() * params.beta() * Matrix::identity(n);
}

// S⁻¹ = (P⁻¹ + W)⁻¹.
Matrix s_inverse(const Matrix& P, const Matrix& W) {
  require_square(P, "P");
  require_same_shape(W, P, "P");
  return inverse(inverse(P) + W).symmetrized();
}

double holds_tol(const Matrix& reference) {
  return kHoldsRelTol * std::max(1.0, spectral_norm(reference));
}

Verdict classify(double margin, double h, double marginal, bool strict) {
  if (strict ? margin > h : margin >= -h) return Verdict::kHolds;
  if (margin >= -std::max(marginal, h)) return Verdict::kMarginal;
  return Verdict::kFails;
}

ConditionCheck undefined_check(std::string id, std::string statement, std::string note) {
  ConditionCheck c;
  c.id = std::move(id);
  c.statement = std::move(statement);
  c.verdict = Verdict::kFails;
  c.margin = std::numeric_limits<double>::quiet_NaN();
  c.note = std::move(note);
  return c;
}

ConditionCheck matrix_check(std::string id, std::string statement, const Matrix& slack,
                            bool strict, double marginal) {
  ConditionCheck c;
  c.id = std::move(id);
  c.statement = std::move(statement);
  c.margin = lambda_min(slack);
  c.verdict = classify(c.margin, holds_tol(slack), marginal, strict);
  return c;
}

// Worst λ_min(F − g(ΔA(p))) over the sample points of Ω.
template <typename Quadratic>
ConditionCheck bound_check(std::string id, std::string statement, const UncertaintyModel& model,
                           std::size_t grid_points, double marginal, Quadratic&& quadratic) {
  ConditionCheck c;
  c.id = std::move(id);
  c.statement = std::move(statement);
  const Matrix& F = model.bound();
  double worst = std::numeric_limits<double>::infinity();
  for (const Vector& p : model.box().sample_points(grid_points)) {
    const Matrix dA = model.delta_A(p);
    const double m = lambda_min(F - quadratic(dA));
    if (m < worst) {
      worst = m;
      c.witness = p;
    }
  }
  c.margin = worst;
  c.verdict = classify(worst, holds_tol(F), marginal, false);
  return c;
}

double marginal_band(const FeasibilityOptions& options, const Matrix& F) {
  return options.marginal_tol.value_or(kMarginalRelTol * spectral_norm(F));
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kHolds:
      return "holds";
    case Verdict::kMarginal:
      return "marginal";
    case Verdict::kFails:
      return "fails";
  }
  return "fails";
}

bool FeasibilityReport::all_hold() const {
  return std::all_of(conditions.begin(), conditions.end(),
                     [](const ConditionCheck& c) { return c.verdict == Verdict::kHolds; });
}

const ConditionCheck* FeasibilityReport::find(const std::string& id) const {
  for (const auto& c : conditions)
    if (c.id == id) return &c;
  return nullptr;
}

SynthesisParams::SynthesisParams(Matrix Q, Matrix R1, Matrix R2, double alpha, double beta,
                                 double epsilon, double sigma)
    : Q_(std::move(Q)),
      R1_(std::move(R1)),
      R2_(std::move(R2)),
      alpha_(alpha),
      beta_(beta),
      epsilon_(epsilon),
      sigma_(sigma) {
  require_square(Q_, "Q");
  require_square(R1_, "R1");
  require_square(R2_, "R2");
  require_finite(Q_, "Q");
  require_finite(R1_, "R1");
  require_finite(R2_, "R2");
  if (!is_positive_semidefinite(Q_)) throw InvalidArgument("Q must be positive semidefinite");
  if (!is_positive_definite(R1_)) throw InvalidArgument("R1 must be positive definite");
  if (!is_positive_definite(R2_)) throw InvalidArgument("R2 must be positive definite");
  if (!std::isfinite(alpha_)) throw InvalidArgument("alpha must be finite");
  if (!std::isfinite(beta_) || beta_ < 0.0) throw InvalidArgument("beta must be >= 0");
  if (!std::isfinite(epsilon_) || epsilon_ <= 0.0) throw InvalidArgument("epsilon must be > 0");
  if (!(sigma_ > 0.0 && sigma_ < 1.0)) throw InvalidArgument("sigma must lie in (0, 1)");
}

SynthesisParams SynthesisParams::with_epsilon(double epsilon) const {
  return SynthesisParams(Q_, R1_, R2_, alpha_, beta_, epsilon, sigma_);
}

SynthesisParams SynthesisParams::with_sigma(double sigma) const {
  return SynthesisParams(Q_, R1_, R2_, alpha_, beta_, epsilon_, sigma);
}

Matrix projector_complement(const Matrix& B) {
  const Matrix bb = B * pseudo_inverse(B);
  return (Matrix::identity(B.rows()) - bb).symmetrized();
}

Matrix input_weight(const Matrix& B, const SynthesisParams& params) {
  require_shape(params.R1(), B.cols(), B.cols(), "R1");
  require_shape(params.R2(), B.rows(), B.rows(), "R2");
  const Matrix Pi = projector_complement(B);
  const double a2 = params.alpha() * params.alpha();
  return (B * inverse(params.R1()) * B.transpose() +
          a2 * (Pi * inverse(params.R2()) * Pi.transpose()))
      .symmetrized();
}

Matrix solve_modified_dare(const Matrix& A, const Matrix& B, const SynthesisParams& params,
                           const Matrix& F, const RiccatiOptions& options) {
  check_system(A, B, params, F);
  return iterate_riccati(A, input_weight(B, params), cost_constant(params, F), options);
}

double riccati_residual(const Matrix& A, const Matrix& B, const SynthesisParams& params,
                        const Matrix& F, const Matrix& P) {
  check_system(A, B, params, F);
  const Matrix S = inverse(P) + input_weight(B, params);
  const Matrix r = A.transpose() * inverse(S) * A - P + cost_constant(params, F);
  return r.max_abs();
}

Matrix compute_gain_K(const Matrix& A, const Matrix& B, const Matrix& P,
                      const SynthesisParams& params) {
  const Matrix Si = s_inverse(P, input_weight(B, params));
  return -(inverse(params.R1()) * B.transpose() * Si * A);
}

Matrix compute_gain_L(const Matrix& A, const Matrix& B, const Matrix& P,
                      const SynthesisParams& params) {
  const Matrix Si = s_inverse(P, input_weight(B, params));
  return -params.alpha() * (inverse(params.R2()) * projector_complement(B) * Si * A);
}

Matrix z_matrix(const Matrix& P, double epsilon) {
  require_square(P, "P");
  const Matrix eps_inv = (1.0 / epsilon) * Matrix::identity(P.rows());
  return (eps_inv + P * inverse(eps_inv - P) * P).symmetrized();
}

Matrix compute_Z(const Matrix& P, double epsilon) {
  require_square(P, "P");
  const Matrix gap = (1.0 / epsilon) * Matrix::identity(P.rows()) - P;
  if (!is_positive_definite(gap)) {
    const double m = lambda_min(gap);
    throw ConditionViolation("14", m,
                             "condition (14) violated: (eps^-1 I - P)^-1 > 0 fails, "
                             "lambda_min(eps^-1 I - P) = " +
                                 std::to_string(m) + " (lambda_max(P) = " +
                                 std::to_string(lambda_max(P)) + ", eps^-1 = " +
                                 std::to_string(1.0 / epsilon) + ")");
  }
  Matrix Z = z_matrix(P, epsilon);
  if (!is_positive_definite(Z)) {
    throw ConditionViolation("22", lambda_min(Z), "condition (22) violated: Z is not positive definite");
  }
  return Z;
}

Matrix compute_Q1(const Matrix& Ac, const Matrix& K, const Matrix& L, const Matrix& Z,
                  const SynthesisParams& params) {
  const std::size_t n = Ac.rows();
  require_shape(Z, n, n, "Z");
  require_shape(L, n, n, "L");
  const double b2 = params.beta() * params.beta();
  return (b2 * Matrix::identity(n) + K.transpose() * params.R1() * K +
          L.transpose() * params.R2() * L - Ac.transpose() * Z * Ac)
      .symmetrized();
}

double compute_mu1(const Matrix& K, const Matrix& B, const Matrix& Z, const Matrix& Q1,
                   double sigma) {
  if (!(sigma > 0.0 && sigma < 1.0)) throw InvalidArgument("sigma must lie in (0, 1)");
  if (!is_positive_definite(Q1)) {
    const double m = lambda_min(Q1);
    throw ConditionViolation("24", m,
                             "Q1 is not positive definite (lambda_min = " + std::to_string(m) +
                                 "); the trigger coefficient is undefined");
  }
  const Matrix BK = B * K;
  const Matrix M = (BK.transpose() * Z * BK).symmetrized();
  const double denom = spectral_norm(M);
  if (BK.max_abs() == 0.0 || denom == 0.0) {
    throw NumericalError("BK = 0: the trigger coefficient is undefined (every step would transmit)");
  }
  return sigma * lambda_min(Q1) / denom;
}

FeasibilityReport feasibility_report(const Matrix& A, const Matrix& B,
                                     const UncertaintyModel& model, const SynthesisParams& params,
                                     const Matrix& P, const Matrix& K, const Matrix& L,
                                     const std::optional<Matrix>& Z,
                                     const std::optional<Matrix>& Q1,
                                     const FeasibilityOptions& options) {
  check_system(A, B, params, model.bound());
  const std::size_t n = A.rows();
  const Matrix& F = model.bound();
  const double eps = params.epsilon();
  const double marginal = marginal_band(options, F);
  const Matrix I = Matrix::identity(n);
  const Matrix Ac = A + B * K;

  FeasibilityReport report;
  report.conditions.push_back(
      matrix_check("13", "(eps^-1 I - P)^-1 > 0", (1.0 / eps) * I - P, true, marginal));

  report.conditions.push_back(bound_check(
      "9", "eps^-1 dA^T dA <= F over Omega", model, options.grid_points, marginal,
      [eps](const Matrix& dA) { return (1.0 / eps) * (dA.transpose() * dA); }));

  {
    const std::string statement = "beta^2 I + L^T R2 L + K^T R1 K - Ac^T (P^-1 - eps I)^-1 Ac >= 0";
    const Matrix Y = inverse(P) - eps * I;
    if (reciprocal_condition(Y) < 1e-13) {
      report.conditions.push_back(undefined_check("17", statement, "P^-1 - eps I is singular"));
    } else {
      const double b2 = params.beta() * params.beta();
      const Matrix slack = b2 * I + L.transpose() * params.R2() * L +
                           K.transpose() * params.R1() * K - Ac.transpose() * inverse(Y) * Ac;
      report.conditions.push_back(matrix_check("17", statement, slack.symmetrized(), false, marginal));
    }
  }

  if (Z) {
    report.conditions.push_back(matrix_check("22", "Z > 0", *Z, true, marginal));
    const Matrix& z = *Z;
    report.conditions.push_back(
        bound_check("23", "dA^T Z dA <= F over Omega", model, options.grid_points, marginal,
                    [&z](const Matrix& dA) { return dA.transpose() * z * dA; }));
  } else {
    report.conditions.push_back(
        undefined_check("22", "Z > 0", "Z undefined: eps^-1 I - P is singular"));
    report.conditions.push_back(undefined_check("23", "dA^T Z dA <= F over Omega",
                                                "Z undefined: eps^-1 I - P is singular"));
  }

  const std::string q1_statement = "beta^2 I + K^T R1 K + L^T R2 L - Ac^T Z Ac >= 0";
  if (Q1) {
    report.conditions.push_back(matrix_check("24", q1_statement, *Q1, false, marginal));
  } else {
    report.conditions.push_back(undefined_check("24", q1_statement, "Q1 undefined: Z undefined"));
  }
  return report;
}

SynthesisAttempt attempt_synthesis(const Matrix& A, const Matrix& B,
                                   const UncertaintyModel& model, const SynthesisParams& params,
                                   const FeasibilityOptions& options,
                                   const RiccatiOptions& riccati) {
  check_system(A, B, params, model.bound());
  SynthesisAttempt out;
  out.P = solve_modified_dare(A, B, params, model.bound(), riccati);
  out.K = compute_gain_K(A, B, out.P, params);
  out.L = compute_gain_L(A, B, out.P, params);
  out.Ac = A + B * out.K;

  const auto fail = [&out](std::string id, double margin, std::string message) {
    if (out.failed_condition) return;
    out.failed_condition = std::move(id);
    out.failure_margin = margin;
    out.failure_message = std::move(message);
  };

  try {
    out.Z = compute_Z(out.P, params.epsilon());
  } catch (const ConditionViolation& e) {
    fail(e.condition(), e.margin(), e.what());
    try {
      out.Z = z_matrix(out.P, params.epsilon());
    } catch (const NumericalError&) {
      // ε⁻¹I − P singular: Z has no value at all.
    }
  }

  if (out.Z) out.Q1 = compute_Q1(out.Ac, out.K, out.L, *out.Z, params);

  if (out.complete() && out.Q1) {
    try {
      out.mu = compute_mu1(out.K, B, *out.Z, *out.Q1, params.sigma());
    } catch (const ConditionViolation& e) {
      fail(e.condition(), e.margin(), e.what());
    } catch (const NumericalError& e) {
      fail("mu1", 0.0, e.what());
    }
  }

  out.report = feasibility_report(A, B, model, params, out.P, out.K, out.L, out.Z, out.Q1, options);
  return out;
}

SynthesisOutcome synthesize(const Matrix& A, const Matrix& B, const UncertaintyModel& model,
                            const SynthesisParams& params, const FeasibilityOptions& options,
                            const RiccatiOptions& riccati) {
  SynthesisAttempt a = attempt_synthesis(A, B, model, params, options, riccati);
  if (!a.complete()) {
    throw ConditionViolation(*a.failed_condition, a.failure_margin, a.failure_message);
  }
  return SynthesisOutcome{std::move(a.P), std::move(a.K), std::move(a.L), std::move(*a.Z),
                          std::move(*a.Q1), *a.mu, std::move(a.Ac), std::move(a.report)};
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0 && hi >= lo)) throw InvalidArgument("log_grid: need 0 < lo <= hi");
  std::vector<double> out;
  if (count == 0) return out;
  if (count == 1) return {lo};
  const double step = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(i + 1 == count ? hi : lo * std::exp(step * static_cast<double>(i)));
  }
  return out;
}

std::vector<double> feasible_epsilons(const Matrix& A, const Matrix& B,
                                      const UncertaintyModel& model,
                                      const SynthesisParams& params,
                                      std::span<const double> candidates,
                                      const FeasibilityOptions& options) {
  const Matrix P = solve_modified_dare(A, B, params, model.bound());
  const Matrix K = compute_gain_K(A, B, P, params);
  const Matrix L = compute_gain_L(A, B, P, params);
  const Matrix Ac = A + B * K;
  std::vector<double> out;
  for (double eps : candidates) {
    const SynthesisParams p = params.with_epsilon(eps);
    try {
      const Matrix Z = compute_Z(P, eps);
      const Matrix Q1 = compute_Q1(Ac, K, L, Z, p);
      compute_mu1(K, B, Z, Q1, p.sigma());
      if (feasibility_report(A, B, model, p, P, K, L, Z, Q1, options).all_hold()) {
        out.push_back(eps);
      }
    } catch (const NumericalError&) {
    }
  }
  return out;
}

MatchedModel::MatchedModel(std::vector<Matrix> phi_basis, ParameterBox box, Matrix bound)
    : phi_basis_(std::move(phi_basis)), box_(std::move(box)), bound_(std::move(bound)) {
  require_square(bound_, "MatchedModel bound F");
  if (!is_positive_semidefinite(bound_)) {
    throw InvalidArgument("MatchedModel: bound F must be symmetric positive semidefinite");
  }
  if (box_.dimension() != phi_basis_.size()) {
    throw InvalidArgument("MatchedModel: parameter box dimension does not match the basis");
  }
  for (const Matrix& phi : phi_basis_) {
    if (phi.cols() != bound_.rows() || phi.rows() == 0) {
      throw InvalidArgument("MatchedModel: phi basis matrices must be m x n");
    }
    if (phi.rows() != phi_basis_.front().rows()) {
      throw InvalidArgument("MatchedModel: phi basis matrices differ in shape");
    }
  }
}

MatchedModel MatchedModel::from_uncertainty(const UncertaintyModel& model, const Matrix& B) {
  const Matrix Bp = pseudo_inverse(B);
  std::vector<Matrix> phis;
  for (const Matrix& E : model.basis()) {
    Matrix phi = Bp * E;
    if ((B * phi - E).max_abs() > kMatchedTol) {
      throw InvalidArgument(
          "uncertainty has a mismatched component: (I - BB^+) dA != 0, use the general design");
    }
    phis.push_back(std::move(phi));
  }
  return MatchedModel(std::move(phis), model.box(), model.bound());
}

Matrix MatchedModel::phi(std::span<const double> p) const {
  if (p.size() != phi_basis_.size()) throw InvalidArgument("phi: parameter count mismatch");
  const std::size_t m = phi_basis_.empty() ? 0 : phi_basis_.front().rows();
  Matrix out(m, bound_.rows());
  for (std::size_t i = 0; i < p.size(); ++i) out += p[i] * phi_basis_[i];
  return out;
}

UncertaintyModel MatchedModel::expand(const Matrix& B) const {
  std::vector<Matrix> basis;
  for (const Matrix& phi : phi_basis_) {
    if (B.cols() != phi.rows() || B.rows() != bound_.rows()) {
      throw InvalidArgument("MatchedModel::expand: B does not match the phi basis");
    }
    basis.push_back(B * phi);
  }
  return UncertaintyModel(std::move(basis), box_, bound_);
}

bool MatchedModel::reproduces(const UncertaintyModel& model, const Matrix& B, double tol) const {
  if (model.parameter_count() != phi_basis_.size()) return false;
  for (std::size_t i = 0; i < phi_basis_.size(); ++i) {
    if ((B * phi_basis_[i] - model.basis()[i]).max_abs() > tol) return false;
  }
  return true;
}

SynthesisOutcome synthesize_matched(const Matrix& A, const Matrix& B, const MatchedModel& matched,
                                    const SynthesisParams& params,
                                    const FeasibilityOptions& options,
                                    const RiccatiOptions& riccati) {
  const Matrix& F = matched.bound();
  check_system(A, B, params, F);
  const UncertaintyModel model = matched.expand(B);
  const std::size_t n = A.rows();
  const Matrix I = Matrix::identity(n);
  const double eps = params.epsilon();
  const double b2 = params.beta() * params.beta();
  const double marginal = marginal_band(options, F);

  const Matrix W0 = (B * inverse(params.R1()) * B.transpose()).symmetrized();
  const Matrix C = cost_constant(params, F);

  SynthesisOutcome out;
  out.P = iterate_riccati(A, W0, C, riccati);
  out.K = -(inverse(params.R1()) * B.transpose() * s_inverse(out.P, W0) * A);
  out.L = Matrix::zeros(n, n);
  out.Ac = A + B * out.K;

  const Matrix gap = (1.0 / eps) * I - out.P;
  if (!is_positive_definite(gap)) {
    const double m = lambda_min(gap);
    throw ConditionViolation("34", m,
                             "condition (34) violated: (eps^-1 I - P)^-1 > 0 fails, "
                             "lambda_min(eps^-1 I - P) = " +
                                 std::to_string(m));
  }
  out.Z = inverse(inverse(out.P) - eps * I).symmetrized();
  out.Q1 = C;
  if (!is_positive_definite(out.Q1)) {
    throw ConditionViolation("36", lambda_min(out.Q1), "Q + F + beta^2 I is not positive definite");
  }
  const Matrix BK = B * out.K;
  const double denom = spectral_norm((BK.transpose() * out.Z * BK).symmetrized());
  if (BK.max_abs() == 0.0 || denom == 0.0) {
    throw NumericalError("BK = 0: the trigger coefficient is undefined (every step would transmit)");
  }
  out.mu = params.sigma() * lambda_min(out.Q1) / denom;

  out.report.conditions.push_back(bound_check(
      "33", "(2/eps) phi^T B^T B phi <= F over Omega", model, options.grid_points, marginal,
      [eps](const Matrix& dA) { return (2.0 / eps) * (dA.transpose() * dA); }));
  out.report.conditions.push_back(matrix_check("34", "(eps^-1 I - P)^-1 > 0", gap, true, marginal));
  out.report.conditions.push_back(matrix_check(
      "35", "beta^2 I + K^T R1 K - (2/eps) Ac^T Ac >= 0",
      (b2 * I + out.K.transpose() * params.R1() * out.K - (2.0 / eps) * (out.Ac.transpose() * out.Ac))
          .symmetrized(),
      false, marginal));
  return out;
}

}  // namespace robust_etc
