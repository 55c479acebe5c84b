#include "robust_etc/trigger_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <utility>

#include "robust_etc/error.hpp"
#include "robust_etc/linalg.hpp"

namespace robust_etc {

namespace {

// Uniform double in [0, 1) from the top 53 bits; independent of the
// standard library's distribution implementation.
double unit_uniform(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

Vector subtract(std::span<const double> a, std::span<const double> b) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

}  // namespace

const char* to_string(PolicyKind kind) {
  return kind == PolicyKind::kPeriodic ? "periodic" : "event";
}

TriggerPolicy TriggerPolicy::event(double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidArgument("event policy needs mu > 0");
  return TriggerPolicy(PolicyKind::kEvent, mu);
}

ParamTrajectory ParamTrajectory::constant(Vector p) {
  return ParamTrajectory(Kind::kConstant, {std::move(p)}, 0);
}

ParamTrajectory ParamTrajectory::ramp(Vector start, Vector end) {
  if (start.size() != end.size()) throw InvalidArgument("ramp: endpoints differ in length");
  return ParamTrajectory(Kind::kRamp, {std::move(start), std::move(end)}, 0);
}

ParamTrajectory ParamTrajectory::sequence(std::vector<Vector> values) {
  if (values.empty()) throw InvalidArgument("sequence: at least one value is required");
  for (const auto& v : values)
    if (v.size() != values.front().size()) throw InvalidArgument("sequence: ragged values");
  return ParamTrajectory(Kind::kSequence, std::move(values), 0);
}

ParamTrajectory ParamTrajectory::uniform_random(std::uint64_t seed) {
  return ParamTrajectory(Kind::kUniformRandom, {}, seed);
}

ParamTrajectory::Samples ParamTrajectory::generate(const ParameterBox& box,
                                                   std::size_t steps) const {
  Samples out;
  out.values.reserve(steps + 1);
  out.clamped.reserve(steps + 1);
  std::mt19937_64 gen(seed_);
  const std::size_t d = box.dimension();
  for (std::size_t k = 0; k <= steps; ++k) {
    Vector raw;
    switch (kind_) {
      case Kind::kConstant:
        raw = values_.front();
        break;
      case Kind::kRamp: {
        const double t = steps == 0 ? 0.0 : static_cast<double>(k) / static_cast<double>(steps);
        raw.resize(values_[0].size());
        for (std::size_t i = 0; i < raw.size(); ++i)
          raw[i] = k == steps ? values_[1][i] : values_[0][i] + t * (values_[1][i] - values_[0][i]);
        break;
      }
      case Kind::kSequence:
        raw = values_[std::min(k, values_.size() - 1)];
        break;
      case Kind::kUniformRandom:
        raw.resize(d);
        for (std::size_t i = 0; i < d; ++i)
          raw[i] = box.lo()[i] + (box.hi()[i] - box.lo()[i]) * unit_uniform(gen);
        break;
    }
    bool clamped = false;
    out.values.push_back(box.clamp(raw, clamped));
    out.clamped.push_back(clamped);
  }
  return out;
}

DeltaA build_delta_A(const UncertaintyModel& model, std::span<const double> p) {
  DeltaA out;
  const Vector q = model.box().clamp(p, out.clamped);
  out.value = model.delta_A(q);
  return out;
}

bool should_trigger(std::span<const double> x, std::span<const double> x_held, double mu) {
  if (!(mu > 0.0)) throw InvalidArgument("should_trigger: mu must be > 0");
  if (x.size() != x_held.size()) throw InvalidArgument("should_trigger: length mismatch");
  double err = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x_held[i] - x[i];
    err += d * d;
  }
  return err >= mu * squared_norm(x);
}

bool SimTrace::has_lyapunov() const {
  return !steps.empty() &&
         std::all_of(steps.begin(), steps.end(), [](const SimStep& s) { return s.V.has_value(); });
}

SimTrace simulate(const Matrix& A, const Matrix& B, const UncertaintyModel& model, const Matrix& K,
                  const TriggerPolicy& policy, const ParamTrajectory& trajectory,
                  std::span<const double> x0, std::size_t steps,
                  const std::optional<Matrix>& lyapunov, const SimOptions& options) {
  require_square(A, "A");
  const std::size_t n = A.rows();
  if (B.rows() != n) throw InvalidArgument("simulate: B must have " + std::to_string(n) + " rows");
  if (K.rows() != B.cols() || K.cols() != n) {
    throw InvalidArgument("simulate: K must be " + std::to_string(B.cols()) + "x" +
                          std::to_string(n));
  }
  if (model.state_dim() != n) throw InvalidArgument("simulate: model dimension mismatch");
  if (x0.size() != n) throw InvalidArgument("simulate: x0 must have " + std::to_string(n) + " entries");
  if (steps < 1) throw InvalidArgument("simulate: need at least one step");
  if (lyapunov && (lyapunov->rows() != n || lyapunov->cols() != n)) {
    throw InvalidArgument("simulate: Lyapunov matrix must be n x n");
  }

  const auto params = trajectory.generate(model.box(), steps);

  SimTrace trace;
  trace.policy = policy.kind();
  trace.mu = policy.mu();
  trace.steps.reserve(steps + 1);

  Vector x(x0.begin(), x0.end());
  Vector held = x;
  std::size_t last_tx = 0;

  for (std::size_t k = 0; k <= steps; ++k) {
    SimStep s;
    s.k = k;
    s.x = x;
    s.p = params.values[k];
    s.p_clamped = params.clamped[k];
    s.e_monitored_sq = squared_norm(subtract(held, x));

    if (policy.kind() == PolicyKind::kEvent) {
      s.threshold = *policy.mu() * squared_norm(x);
      // An unchanged state carries no new information, so e = 0 never
      // transmits (at x = 0 the inclusive threshold would otherwise fire).
      s.triggered = k == 0 || (s.e_monitored_sq > 0.0 && should_trigger(x, held, *policy.mu()));
    } else {
      s.triggered = true;
    }

    if (s.triggered) {
      held = x;
      if (trace.transmissions > 0) trace.inter_event_gaps.push_back(k - last_tx);
      last_tx = k;
      ++trace.transmissions;
    }
    s.e = subtract(held, x);
    s.u = K * held;
    if (lyapunov) s.V = quadratic_form(*lyapunov, x);
    trace.steps.push_back(s);

    if (k == steps) break;
    const Matrix Ak = A + model.delta_A(s.p);
    Vector next = Ak * x;
    const Vector bu = B * s.u;
    for (std::size_t i = 0; i < n; ++i) next[i] += bu[i];
    const double nn = norm(next);
    if (!std::isfinite(nn) || nn > options.divergence_limit) {
      trace.diverged = true;
      break;
    }
    x = std::move(next);
  }
  return trace;
}

PolicySummary summarize(const SimTrace& trace) {
  PolicySummary s;
  s.transmissions = trace.transmissions;
  s.diverged = trace.diverged;
  if (trace.steps.empty()) return s;
  s.initial_norm = norm(trace.steps.front().x);
  s.final_norm = norm(trace.steps.back().x);
  if (s.initial_norm > 0.0) {
    s.decay_ratio = s.final_norm / s.initial_norm;
    const std::size_t n_steps = trace.steps.back().k;
    s.decay_rate = n_steps > 0 ? std::pow(s.decay_ratio, 1.0 / static_cast<double>(n_steps)) : 1.0;
  }
  if (!trace.inter_event_gaps.empty()) {
    const auto& g = trace.inter_event_gaps;
    s.gap_min = *std::min_element(g.begin(), g.end());
    s.gap_max = *std::max_element(g.begin(), g.end());
    double sum = 0.0;
    for (std::size_t v : g) sum += static_cast<double>(v);
    s.gap_mean = sum / static_cast<double>(g.size());
  }
  return s;
}

PolicyComparison compare_policies(const Matrix& A, const Matrix& B, const UncertaintyModel& model,
                                  const Matrix& K, double mu, const ParamTrajectory& trajectory,
                                  std::span<const double> x0, std::size_t steps,
                                  const std::optional<Matrix>& lyapunov,
                                  const SimOptions& options) {
  PolicyComparison out;
  out.periodic = simulate(A, B, model, K, TriggerPolicy::periodic(), trajectory, x0, steps,
                          lyapunov, options);
  out.event = simulate(A, B, model, K, TriggerPolicy::event(mu), trajectory, x0, steps, lyapunov,
                       options);
  out.periodic_summary = summarize(out.periodic);
  out.event_summary = summarize(out.event);
  out.savings_ratio = 1.0 - static_cast<double>(out.event.transmissions) /
                                static_cast<double>(out.periodic.transmissions);
  return out;
}

}  // namespace robust_etc
