#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "robust_etc/matrix.hpp"
#include "robust_etc/synthesis.hpp"
#include "robust_etc/trigger_sim.hpp"
#include "robust_etc/uncertainty.hpp"

namespace robust_etc {

/// Outcome of one numerical audit.
///
/// `margin` is the smallest eigenvalue of the slack matrix for inequality
/// checks, or the residual for identity checks; `witness` describes the
/// offending input when `holds` is false.
struct CheckResult {
  std::string name;
  bool holds = false;
  double margin = 0.0;
  std::optional<std::string> witness;
  std::string detail;
};

/// (P⁻¹ − εI)⁻¹ = P + P(ε⁻¹I − P)⁻¹P, holds iff the max-norm residual is
/// ≤ 1e-8·‖P‖. Requires P > 0 and ε⁻¹I − P > 0.
CheckResult check_inversion_identity(const Matrix& P, double epsilon);

/// AcᵀPΔA + ΔAᵀPAc + ΔAᵀPΔA ≤ AcᵀP(ε⁻¹I − P)⁻¹PAc + ε⁻¹ΔAᵀΔA.
CheckResult check_lemma1(const Matrix& P, double epsilon, const Matrix& Ac, const Matrix& deltaA);

/// AcᵀZAc − AᵀS⁻¹A ≤ Acᵀ(P⁻¹ − εI)⁻¹Ac − (LᵀR₂L + KᵀR₁K).
CheckResult check_lemma2(const Matrix& A, const Matrix& B, const Matrix& P,
                         const SynthesisParams& params, const Matrix& K, const Matrix& L,
                         const Matrix& Z);

/// Dissipation audit of a trace with recorded V(k) = x(k)ᵀPx(k):
///  (a) ΔV ≤ −xᵀQ₁x + eᵀM_e e at every step whose ΔA(p(k)) satisfies
///      ΔAᵀZΔA ≤ F, and, where additionally ‖e‖² ≤ μ₁‖x‖², the derived
///      contraction ΔV ≤ −(1−σ)λ_min(Q₁)‖x‖²;
///  (b) λ_min(P)‖x‖² ≤ V ≤ λ_max(P)‖x‖² at every step.
/// Per-step tolerance is 1e-8·(1 + V(k)). Throws InvalidArgument when the
/// trace has no Lyapunov values.
CheckResult check_dissipation(const SimTrace& trace, const UncertaintyModel& model,
                              const Matrix& P, const Matrix& Z, const Matrix& Q1,
                              const Matrix& M_e, double sigma);

/// V(k+1) − V(k) ≤ −(1−σ)·λ_min(Q₁)·‖x(k)‖² + 1e-8·(1 + V(k)) at every step.
CheckResult check_contraction(const SimTrace& trace, const Matrix& Q1, double sigma);

/// Sandwich λ_min(P)‖x‖² ≤ V ≤ λ_max(P)‖x‖² along a trace.
CheckResult check_lyapunov_bounds(const SimTrace& trace, const Matrix& P);

struct CampaignResult {
  std::string name;
  std::size_t samples = 0;
  std::size_t failures = 0;
  /// Worst residual (identity) or smallest slack eigenvalue (lemma).
  double worst_margin = 0.0;
  std::optional<std::string> first_failure;

  bool holds() const { return failures == 0; }
};

struct CampaignOptions {
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  std::size_t max_dim = 5;
};

/// Random P > 0 with λ_max(P) < ε⁻¹, dimensions 1..max_dim; each sample
/// draws from its own seed derived from the root seed.
CampaignResult identity_campaign(const CampaignOptions& options = {});

/// As identity_campaign, with random Ac and ΔA fed to check_lemma1.
CampaignResult lemma1_campaign(const CampaignOptions& options = {});

}  // namespace robust_etc
