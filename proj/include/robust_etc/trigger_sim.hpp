#pragma once

#include <cstdint>
#include <utility>
#include <optional>
#include <span>
#include <vector>

#include "robust_etc/matrix.hpp"
#include "robust_etc/uncertainty.hpp"

namespace robust_etc {

enum class PolicyKind { kPeriodic, kEvent };

const char* to_string(PolicyKind kind);

/// When the sensor transmits: every sample, or when ‖e‖² ≥ μ‖x‖².
class TriggerPolicy {
 public:
  static TriggerPolicy periodic() { return TriggerPolicy(PolicyKind::kPeriodic, std::nullopt); }
  static TriggerPolicy event(double mu);

  PolicyKind kind() const noexcept { return kind_; }
  /// Set iff kind() == kEvent.
  std::optional<double> mu() const noexcept { return mu_; }

 private:
  TriggerPolicy(PolicyKind kind, std::optional<double> mu) : kind_(kind), mu_(mu) {}

  PolicyKind kind_;
  std::optional<double> mu_;
};

/// How the uncertain parameter evolves over a run.
class ParamTrajectory {
 public:
  enum class Kind { kConstant, kRamp, kSequence, kUniformRandom };

  static ParamTrajectory constant(Vector p);
  /// Linear from `start` at k = 0 to `end` at k = N.
  static ParamTrajectory ramp(Vector start, Vector end);
  /// p(k) = values[k]; the last value is held once the list runs out.
  static ParamTrajectory sequence(std::vector<Vector> values);
  /// Independent uniform draws over Ω at every step.
  static ParamTrajectory uniform_random(std::uint64_t seed);

  Kind kind() const noexcept { return kind_; }
  const std::vector<Vector>& values() const noexcept { return values_; }
  std::uint64_t seed() const noexcept { return seed_; }

  struct Samples {
    std::vector<Vector> values;
    std::vector<bool> clamped;
  };

  /// p(0), …, p(steps), each clamped into `box`.
  Samples generate(const ParameterBox& box, std::size_t steps) const;

  friend bool operator==(const ParamTrajectory&, const ParamTrajectory&) = default;

 private:
  ParamTrajectory(Kind kind, std::vector<Vector> values, std::uint64_t seed)
      : kind_(kind), values_(std::move(values)), seed_(seed) {}

  Kind kind_;
  std::vector<Vector> values_;
  std::uint64_t seed_ = 0;
};

struct DeltaA {
  Matrix value;
  bool clamped = false;
};

/// ΔA = Σᵢ pᵢEᵢ with p clamped into Ω first (`clamped` records whether it was).
DeltaA build_delta_A(const UncertaintyModel& model, std::span<const double> p);

/// ‖x_held − x‖² ≥ μ‖x‖², boundary included.
bool should_trigger(std::span<const double> x, std::span<const double> x_held, double mu);

/// One sampling instant. `e` is x(k_i) − x(k) after any transmission at k
/// (zero when triggered); `e_monitored_sq` is ‖e‖² as the monitor saw it
/// before deciding.
struct SimStep {
  std::size_t k = 0;
  Vector x;
  Vector u;
  Vector e;
  double e_monitored_sq = 0.0;
  double threshold = 0.0;
  bool triggered = false;
  Vector p;
  bool p_clamped = false;
  std::optional<double> V;
};

struct SimTrace {
  PolicyKind policy = PolicyKind::kPeriodic;
  std::optional<double> mu;
  std::vector<SimStep> steps;
  std::size_t transmissions = 0;
  std::vector<std::size_t> inter_event_gaps;
  bool diverged = false;

  bool has_lyapunov() const;
};

struct SimOptions {
  double divergence_limit = 1e12;
};

/// Closed loop x(k+1) = (A + ΔA(p(k)))x(k) + B·K·x(k_i) with zero-order hold.
///
/// At every k = 0..N the monitor compares the held state with x(k); on a
/// transmission the held state is replaced and u = K·x(k_i) is recomputed.
/// k = 0 always transmits. V(k) = xᵀPx is recorded when `lyapunov` is given.
/// A state whose norm exceeds the divergence limit ends the run early with
/// `diverged` set.
SimTrace simulate(const Matrix& A, const Matrix& B, const UncertaintyModel& model, const Matrix& K,
                  const TriggerPolicy& policy, const ParamTrajectory& trajectory,
                  std::span<const double> x0, std::size_t steps,
                  const std::optional<Matrix>& lyapunov = std::nullopt,
                  const SimOptions& options = {});

struct PolicySummary {
  std::size_t transmissions = 0;
  double initial_norm = 0.0;
  double final_norm = 0.0;
  /// ‖x(N)‖/‖x(0)‖ (0 when x(0) = 0) and its per-step geometric mean.
  double decay_ratio = 0.0;
  double decay_rate = 0.0;
  std::size_t gap_min = 0;
  double gap_mean = 0.0;
  std::size_t gap_max = 0;
  bool diverged = false;
};

PolicySummary summarize(const SimTrace& trace);

struct PolicyComparison {
  SimTrace periodic;
  SimTrace event;
  PolicySummary periodic_summary;
  PolicySummary event_summary;
  /// 1 − event transmissions / periodic transmissions.
  double savings_ratio = 0.0;
};

/// Runs both policies on the same parameter trajectory (same seed).
PolicyComparison compare_policies(const Matrix& A, const Matrix& B, const UncertaintyModel& model,
                                  const Matrix& K, double mu, const ParamTrajectory& trajectory,
                                  std::span<const double> x0, std::size_t steps,
                                  const std::optional<Matrix>& lyapunov = std::nullopt,
                                  const SimOptions& options = {});

}  // namespace robust_etc
