#include "robust_etc/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include "robust_etc/error.hpp"
#include "robust_etc/linalg.hpp"

namespace robust_etc {

namespace {

constexpr double kSlackRelTol = 1e-8;
constexpr double kIdentityRelTol = 1e-8;
constexpr double kStepRelTol = 1e-8;

double slack_tol(const Matrix& slack) { return kSlackRelTol * (1.0 + spectral_norm(slack)); }

CheckResult slack_result(std::string name, const Matrix& slack) {
  CheckResult r;
  r.name = std::move(name);
  const Matrix s = slack.symmetrized();
  r.margin = lambda_min(s);
  r.holds = r.margin >= -slack_tol(s);
  if (!r.holds) {
    std::ostringstream os;
    os << "slack lambda_min = " << r.margin;
    r.witness = os.str();
  }
  return r;
}

Matrix eps_gap(const Matrix& P, double epsilon, const char* condition) {
  require_square(P, "P");
  const Matrix gap = (1.0 / epsilon) * Matrix::identity(P.rows()) - P;
  if (!is_positive_definite(gap)) {
    const double m = lambda_min(gap);
    throw ConditionViolation(condition, m,
                             std::string("precondition (eps^-1 I - P) > 0 fails, lambda_min = ") +
                                 std::to_string(m));
  }
  return gap;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

class SampleRng {
 public:
  explicit SampleRng(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() {
    // Box-Muller; uniform() < 1 so 1 - u > 0.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  std::size_t index(std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(uniform() * static_cast<double>(hi - lo + 1));
  }

  Matrix gaussian(std::size_t rows, std::size_t cols) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) m(i, j) = normal();
    return m;
  }

  // Q diag(λ) Qᵀ with Q from Gram-Schmidt on a Gaussian matrix.
  Matrix spd_with_spectrum(const Vector& spectrum) {
    const std::size_t n = spectrum.size();
    Matrix q = gaussian(n, n);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < j; ++k) {
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) d += q(i, j) * q(i, k);
        for (std::size_t i = 0; i < n; ++i) q(i, j) -= d * q(i, k);
      }
      double nrm = 0.0;
      for (std::size_t i = 0; i < n; ++i) nrm += q(i, j) * q(i, j);
      nrm = std::sqrt(nrm);
      for (std::size_t i = 0; i < n; ++i) q(i, j) /= nrm;
    }
    return (q * Matrix::diagonal(spectrum) * q.transpose()).symmetrized();
  }

 private:
  std::mt19937_64 gen_;
};

struct IdentitySample {
  Matrix P;
  double epsilon = 1.0;
};

IdentitySample draw_identity_sample(SampleRng& rng, std::size_t max_dim) {
  const std::size_t n = rng.index(1, std::max<std::size_t>(1, max_dim));
  IdentitySample s;
  s.epsilon = std::pow(10.0, rng.uniform(-1.5, 0.5));
  Vector spectrum(n);
  for (double& v : spectrum) v = rng.uniform(0.05, 0.9) / s.epsilon;
  s.P = rng.spd_with_spectrum(spectrum);
  return s;
}

std::string describe_sample(std::size_t index, std::size_t n, double epsilon) {
  std::ostringstream os;
  os << "sample " << index << " (n = " << n << ", eps = " << epsilon << ")";
  return os.str();
}

template <typename Body>
CampaignResult run_campaign(std::string name, const CampaignOptions& options, Body&& body) {
  CampaignResult out;
  out.name = std::move(name);
  out.samples = options.samples;
  bool first = true;
  for (std::size_t i = 0; i < options.samples; ++i) {
    SampleRng rng(splitmix64(options.seed ^ splitmix64(i)));
    auto [result, description] = body(rng);
    if (first) {
      out.worst_margin = result.margin;
      first = false;
    }
    out.worst_margin = body.worse(out.worst_margin, result.margin);
    if (!result.holds) {
      ++out.failures;
      if (!out.first_failure) out.first_failure = "sample " + std::to_string(i) + ": " + description;
    }
  }
  return out;
}

}  // namespace

CheckResult check_inversion_identity(const Matrix& P, double epsilon) {
  require_square(P, "P");
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be > 0");
  if (!is_positive_definite(P)) throw InvalidArgument("check_inversion_identity: P must be positive definite");
  const Matrix gap = eps_gap(P, epsilon, "14");
  const Matrix I = Matrix::identity(P.rows());
  const Matrix lhs = inverse(inverse(P) - epsilon * I);
  const Matrix rhs = P + P * inverse(gap) * P;

  CheckResult r;
  r.name = "inversion_identity";
  r.margin = (lhs - rhs).max_abs();
  const double tol = kIdentityRelTol * spectral_norm(P);
  r.holds = r.margin <= tol;
  std::ostringstream os;
  os << "residual " << r.margin << " (tolerance " << tol << ")";
  r.detail = os.str();
  if (!r.holds) r.witness = r.detail;
  return r;
}

CheckResult check_lemma1(const Matrix& P, double epsilon, const Matrix& Ac, const Matrix& deltaA) {
  const Matrix gap = eps_gap(P, epsilon, "29");
  require_same_shape(P, Ac, "Ac");
  require_same_shape(P, deltaA, "deltaA");
  const Matrix AcT = Ac.transpose();
  const Matrix dAT = deltaA.transpose();
  const Matrix lhs = AcT * P * deltaA + dAT * P * Ac + dAT * P * deltaA;
  const Matrix rhs = AcT * P * inverse(gap) * P * Ac + (1.0 / epsilon) * (dAT * deltaA);
  return slack_result("lemma1", rhs - lhs);
}

CheckResult check_lemma2(const Matrix& A, const Matrix& B, const Matrix& P,
                         const SynthesisParams& params, const Matrix& K, const Matrix& L,
                         const Matrix& Z) {
  const double eps = params.epsilon();
  eps_gap(P, eps, "14");
  const Matrix I = Matrix::identity(P.rows());
  const Matrix Ac = A + B * K;
  const Matrix AcT = Ac.transpose();
  const Matrix Si = inverse(inverse(P) + input_weight(B, params));
  const Matrix lhs = AcT * Z * Ac - A.transpose() * Si * A;
  const Matrix rhs = AcT * inverse(inverse(P) - eps * I) * Ac -
                     (L.transpose() * params.R2() * L + K.transpose() * params.R1() * K);
  return slack_result("lemma2", rhs - lhs);
}

CheckResult check_contraction(const SimTrace& trace, const Matrix& Q1, double sigma) {
  if (!trace.has_lyapunov()) throw InvalidArgument("check_contraction: trace has no Lyapunov values");
  const double lq = lambda_min(Q1);
  CheckResult r;
  r.name = "contraction";
  r.holds = true;
  r.margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < trace.steps.size(); ++k) {
    const SimStep& s = trace.steps[k];
    const double dV = *trace.steps[k + 1].V - *s.V;
    const double bound = -(1.0 - sigma) * lq * squared_norm(s.x);
    const double slack = bound - dV;
    r.margin = std::min(r.margin, slack);
    if (slack < -kStepRelTol * (1.0 + *s.V) && r.holds) {
      r.holds = false;
      std::ostringstream os;
      os << "k = " << k << ": dV = " << dV << " > " << bound;
      r.witness = os.str();
    }
  }
  if (trace.steps.size() < 2) r.margin = 0.0;
  return r;
}

CheckResult check_lyapunov_bounds(const SimTrace& trace, const Matrix& P) {
  if (!trace.has_lyapunov()) throw InvalidArgument("check_lyapunov_bounds: trace has no Lyapunov values");
  const auto ev = sym_eigvals(P);
  CheckResult r;
  r.name = "lyapunov_bounds";
  r.holds = true;
  r.margin = std::numeric_limits<double>::infinity();
  for (const SimStep& s : trace.steps) {
    const double xx = squared_norm(s.x);
    const double V = *s.V;
    const double slack = std::min(V - ev.front() * xx, ev.back() * xx - V);
    r.margin = std::min(r.margin, slack);
    if (slack < -kStepRelTol * (1.0 + V) && r.holds) {
      r.holds = false;
      std::ostringstream os;
      os << "k = " << s.k << ": V = " << V << " outside [" << ev.front() * xx << ", "
         << ev.back() * xx << "]";
      r.witness = os.str();
    }
  }
  return r;
}

CheckResult check_dissipation(const SimTrace& trace, const UncertaintyModel& model,
                              const Matrix& P, const Matrix& Z, const Matrix& Q1,
                              const Matrix& M_e, double sigma) {
  if (!trace.has_lyapunov()) throw InvalidArgument("check_dissipation: trace has no Lyapunov values");
  const Matrix& F = model.bound();
  const double f_tol = 1e-9 * std::max(1.0, spectral_norm(F));
  const double lq = lambda_min(Q1);
  const double me_norm = spectral_norm(M_e);
  const double mu1 = me_norm > 0.0 ? sigma * lq / me_norm : std::numeric_limits<double>::infinity();

  CheckResult r;
  r.name = "dissipation";
  r.holds = true;
  r.margin = std::numeric_limits<double>::infinity();
  std::size_t checked = 0;
  std::size_t skipped = 0;
  std::size_t contraction_checked = 0;

  const auto record = [&r](double slack, double tol, const std::string& what) {
    r.margin = std::min(r.margin, slack);
    if (slack < -tol && r.holds) {
      r.holds = false;
      r.witness = what;
    }
  };

  for (std::size_t k = 0; k + 1 < trace.steps.size(); ++k) {
    const SimStep& s = trace.steps[k];
    const double V = *s.V;
    const double tol = kStepRelTol * (1.0 + V);
    const Matrix dA = model.delta_A(s.p);
    if (lambda_min(F - dA.transpose() * Z * dA) < -f_tol) {
      ++skipped;
      continue;
    }
    ++checked;
    const double dV = *trace.steps[k + 1].V - V;
    const double xx = squared_norm(s.x);
    const double ee = squared_norm(s.e);
    const double bound = -quadratic_form(Q1, s.x) + quadratic_form(M_e, s.e);
    std::ostringstream os;
    os << "k = " << k << ": dV = " << dV << " > " << bound;
    record(bound - dV, tol, os.str());

    if (ee <= mu1 * xx) {
      ++contraction_checked;
      const double contraction = -(1.0 - sigma) * lq * xx;
      std::ostringstream oc;
      oc << "k = " << k << ": dV = " << dV << " > contraction bound " << contraction;
      record(contraction - dV, tol, oc.str());
      std::ostringstream ob;
      ob << "k = " << k << ": dissipation bound " << bound << " exceeds contraction bound "
         << contraction;
      record(contraction - bound, tol, ob.str());
    }
  }

  const CheckResult sandwich = check_lyapunov_bounds(trace, P);
  if (!sandwich.holds && r.holds) {
    r.holds = false;
    r.witness = sandwich.witness;
  }
  r.margin = std::min(r.margin, sandwich.margin);

  std::ostringstream os;
  os << checked << " steps checked, " << skipped << " skipped (dA outside the Z-bound), "
     << contraction_checked << " with the contraction form";
  r.detail = os.str();
  return r;
}

CampaignResult identity_campaign(const CampaignOptions& options) {
  struct Body {
    std::size_t max_dim;
    std::pair<CheckResult, std::string> operator()(SampleRng& rng) const {
      const IdentitySample s = draw_identity_sample(rng, max_dim);
      return {check_inversion_identity(s.P, s.epsilon), describe_sample(0, s.P.rows(), s.epsilon)};
    }
    static double worse(double a, double b) { return std::max(a, b); }
  };
  return run_campaign("inversion_identity", options, Body{options.max_dim});
}

CampaignResult lemma1_campaign(const CampaignOptions& options) {
  struct Body {
    std::size_t max_dim;
    std::pair<CheckResult, std::string> operator()(SampleRng& rng) const {
      const IdentitySample s = draw_identity_sample(rng, max_dim);
      const std::size_t n = s.P.rows();
      const Matrix Ac = rng.gaussian(n, n);
      const Matrix dA = rng.gaussian(n, n);
      return {check_lemma1(s.P, s.epsilon, Ac, dA), describe_sample(0, n, s.epsilon)};
    }
    static double worse(double a, double b) { return std::min(a, b); }
  };
  return run_campaign("lemma1", options, Body{options.max_dim});
}

}  // namespace robust_etc
