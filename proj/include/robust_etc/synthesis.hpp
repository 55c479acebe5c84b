#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "robust_etc/matrix.hpp"
#include "robust_etc/uncertainty.hpp"

namespace robust_etc {

/// Design weights and scalars of the robust optimal-control problem.
///
/// Q weighs the state, R1 the real input u, R2 the virtual input v, `alpha`
/// scales the virtual input channel α(I − BB⁺)v, `beta` adds β²xᵀx to the
/// cost, `epsilon` is the design scalar ε bounding the uncertainty and
/// `sigma` ∈ (0, 1) is the trigger margin.
class SynthesisParams {
 public:
  SynthesisParams(Matrix Q, Matrix R1, Matrix R2, double alpha, double beta, double epsilon,
                  double sigma);

  const Matrix& Q() const noexcept { return Q_; }
  const Matrix& R1() const noexcept { return R1_; }
  const Matrix& R2() const noexcept { return R2_; }
  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  double epsilon() const noexcept { return epsilon_; }
  double sigma() const noexcept { return sigma_; }

  SynthesisParams with_epsilon(double epsilon) const;
  SynthesisParams with_sigma(double sigma) const;

  friend bool operator==(const SynthesisParams&, const SynthesisParams&) = default;

 private:
  Matrix Q_;
  Matrix R1_;
  Matrix R2_;
  double alpha_;
  double beta_;
  double epsilon_;
  double sigma_;
};

enum class Verdict { kHolds, kMarginal, kFails };

const char* to_string(Verdict v);

/// One evaluated matrix inequality. `margin` is the smallest eigenvalue of the
/// slack matrix (worst over Ω for the parameter-dependent conditions), and
/// `witness` the parameter value where it was attained.
struct ConditionCheck {
  std::string id;
  std::string statement;
  Verdict verdict = Verdict::kFails;
  double margin = 0.0;
  std::optional<Vector> witness;
  std::string note;
};

struct FeasibilityReport {
  std::vector<ConditionCheck> conditions;

  bool all_hold() const;
  const ConditionCheck* find(const std::string& id) const;
};

struct FeasibilityOptions {
  std::size_t grid_points = 101;
  /// Width of the "marginal" band below zero; defaults to 1e-6·‖F‖.
  std::optional<double> marginal_tol;
};

struct RiccatiOptions {
  double step_tol = 1e-12;
  int max_iterations = 10'000;
};

/// Full result of a successful synthesis.
///
/// For the matched design (synthesize_matched) L is zero, Z holds
/// (P⁻¹ − εI)⁻¹ and Q1 holds Q + F + β²I, i.e. the matrices that enter the
/// trigger coefficient μ₂ in place of Z and Q₁.
struct SynthesisOutcome {
  Matrix P;
  Matrix K;
  Matrix L;
  Matrix Z;
  Matrix Q1;
  double mu = 0.0;
  Matrix Ac;
  FeasibilityReport report;
};

/// Everything a synthesis run managed to compute. Stops short of Z/Q₁/μ when
/// the condition that defines them fails; `failed_condition` names it.
struct SynthesisAttempt {
  Matrix P;
  Matrix K;
  Matrix L;
  Matrix Ac;
  std::optional<Matrix> Z;
  std::optional<Matrix> Q1;
  std::optional<double> mu;
  FeasibilityReport report;
  std::optional<std::string> failed_condition;
  double failure_margin = 0.0;
  std::string failure_message;

  bool complete() const { return !failed_condition.has_value(); }
};

/// Π = I − BB⁺, the projector onto the mismatched subspace.
Matrix projector_complement(const Matrix& B);

/// W = BR₁⁻¹Bᵀ + α²ΠR₂⁻¹Πᵀ.
Matrix input_weight(const Matrix& B, const SynthesisParams& params);

/// Positive definite P with AᵀS⁻¹A − P + Q + F + β²I = 0,
/// S = P⁻¹ + BR₁⁻¹Bᵀ + α²ΠR₂⁻¹Πᵀ, by value iteration from P₀ = Q + F + β²I.
Matrix solve_modified_dare(const Matrix& A, const Matrix& B, const SynthesisParams& params,
                           const Matrix& F, const RiccatiOptions& options = {});

/// ‖AᵀS⁻¹A − P + Q + F + β²I‖_max, evaluated with explicit inverses.
double riccati_residual(const Matrix& A, const Matrix& B, const SynthesisParams& params,
                        const Matrix& F, const Matrix& P);

/// K = −R₁⁻¹BᵀS⁻¹A.
Matrix compute_gain_K(const Matrix& A, const Matrix& B, const Matrix& P,
                      const SynthesisParams& params);

/// L = −αR₂⁻¹ΠS⁻¹A.
Matrix compute_gain_L(const Matrix& A, const Matrix& B, const Matrix& P,
                      const SynthesisParams& params);

/// ε⁻¹I + P(ε⁻¹I − P)⁻¹P without the definiteness gate. Throws
/// NumericalError only if ε⁻¹I − P is singular.
Matrix z_matrix(const Matrix& P, double epsilon);

/// Z, after checking ε⁻¹I − P > 0 (ConditionViolation "14" otherwise) and
/// Z > 0 (ConditionViolation "22").
Matrix compute_Z(const Matrix& P, double epsilon);

/// Q₁ = β²I + KᵀR₁K + LᵀR₂L − AcᵀZAc.
Matrix compute_Q1(const Matrix& Ac, const Matrix& K, const Matrix& L, const Matrix& Z,
                  const SynthesisParams& params);

/// μ₁ = σ·λ_min(Q₁)/‖KᵀBᵀZBK‖.
///
/// Q₁ must be positive definite (ConditionViolation "24"), and BK ≠ 0
/// (NumericalError: the trigger would fire at every step).
double compute_mu1(const Matrix& K, const Matrix& B, const Matrix& Z, const Matrix& Q1,
                   double sigma);

/// Evaluates (13), (9), (17), (22), (23), (24). Parameter-dependent ones are
/// checked at every vertex of Ω plus the configured grid. A missing Z or Q₁
/// marks the conditions that need them as failed.
FeasibilityReport feasibility_report(const Matrix& A, const Matrix& B,
                                     const UncertaintyModel& model, const SynthesisParams& params,
                                     const Matrix& P, const Matrix& K, const Matrix& L,
                                     const std::optional<Matrix>& Z,
                                     const std::optional<Matrix>& Q1,
                                     const FeasibilityOptions& options = {});

/// Riccati → gains → Z → Q₁ → μ₁ → report, keeping whatever could be formed.
/// Throws only for Riccati failures and malformed inputs.
SynthesisAttempt attempt_synthesis(const Matrix& A, const Matrix& B,
                                   const UncertaintyModel& model, const SynthesisParams& params,
                                   const FeasibilityOptions& options = {},
                                   const RiccatiOptions& riccati = {});

/// As attempt_synthesis but raises ConditionViolation when Z or μ₁ cannot be
/// formed. Failed feasibility verdicts are carried in the report, not thrown.
SynthesisOutcome synthesize(const Matrix& A, const Matrix& B, const UncertaintyModel& model,
                            const SynthesisParams& params, const FeasibilityOptions& options = {},
                            const RiccatiOptions& riccati = {});

/// Geometric grid of `count` points from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, std::size_t count);

/// The candidate ε values for which attempt_synthesis completes and every
/// report entry holds. P does not depend on ε, so it is solved once.
std::vector<double> feasible_epsilons(const Matrix& A, const Matrix& B,
                                      const UncertaintyModel& model,
                                      const SynthesisParams& params,
                                      std::span<const double> candidates,
                                      const FeasibilityOptions& options = {});

/// Matched uncertainty ΔA(p) = B·φ(p) with φ(p) = Σᵢ pᵢ·Φᵢ (Φᵢ are m×n).
class MatchedModel {
 public:
  MatchedModel(std::vector<Matrix> phi_basis, ParameterBox box, Matrix bound);

  /// Recovers Φᵢ = B⁺Eᵢ from a general model; throws InvalidArgument when
  /// some Eᵢ has a component outside range(B) (‖BΦᵢ − Eᵢ‖_max > 1e-12).
  static MatchedModel from_uncertainty(const UncertaintyModel& model, const Matrix& B);

  const std::vector<Matrix>& phi_basis() const noexcept { return phi_basis_; }
  const ParameterBox& box() const noexcept { return box_; }
  const Matrix& bound() const noexcept { return bound_; }

  Matrix phi(std::span<const double> p) const;
  /// The equivalent general model with Eᵢ = BΦᵢ.
  UncertaintyModel expand(const Matrix& B) const;
  /// Whether BΦᵢ reproduces every basis matrix of `model` to `tol`.
  bool reproduces(const UncertaintyModel& model, const Matrix& B, double tol = 1e-12) const;

 private:
  std::vector<Matrix> phi_basis_;
  ParameterBox box_;
  Matrix bound_;
};

/// Reduced design for matched uncertainty: AᵀS₀⁻¹A − P + Q + F + β²I = 0
/// with S₀ = P⁻¹ + BR₁⁻¹Bᵀ, K = −R₁⁻¹BᵀS₀⁻¹A, and
/// μ₂ = σ·λ_min(Q + F + β²I)/‖KᵀBᵀ(P⁻¹ − εI)⁻¹BK‖.
///
/// The report covers (33) (2/ε)φᵀBᵀBφ ≤ F over Ω, (34) (ε⁻¹I − P)⁻¹ > 0 and
/// (35) β²I + KᵀR₁K − (2/ε)AcᵀAc ≥ 0. Throws ConditionViolation "34" when
/// ε⁻¹I − P is not positive definite.
SynthesisOutcome synthesize_matched(const Matrix& A, const Matrix& B, const MatchedModel& matched,
                                    const SynthesisParams& params,
                                    const FeasibilityOptions& options = {},
                                    const RiccatiOptions& riccati = {});

}  // namespace robust_etc
