#include "robust_etc/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include "robust_etc/error.hpp"
#include "robust_etc/io.hpp"
#include "robust_etc/linalg.hpp"
#include "robust_etc/synthesis.hpp"
#include "robust_etc/trigger_sim.hpp"
#include "robust_etc/verification.hpp"

namespace robust_etc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

SynthesisAttempt run_attempt(const ExperimentConfig& c) {
  return attempt_synthesis(c.system.A, c.system.B, c.model(), c.synthesis_params(),
                           c.feasibility_options());
}

// μ₁ evaluated from the formula even when the design gate failed, for
// diagnostics only.
std::optional<double> formula_mu1(const SynthesisAttempt& a, const Matrix& B, double sigma) {
  if (a.mu) return a.mu;
  if (!a.Z || !a.Q1) return std::nullopt;
  try {
    return compute_mu1(a.K, B, *a.Z, *a.Q1, sigma);
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::string matrix_line(const Matrix& m) {
  std::string s = "[";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (i) s += "; ";
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) s += ", ";
      s += format_number(m(i, j));
    }
  }
  return s + "]";
}

void append_report(std::ostringstream& os, const FeasibilityReport& report) {
  for (const ConditionCheck& c : report.conditions) {
    os << "  (" << c.id << ") " << to_string(c.verdict) << "  margin " << format_number(c.margin);
    if (c.witness && !c.witness->empty()) {
      os << "  at p =";
      for (double v : *c.witness) os << ' ' << format_number(v);
    }
    os << "  " << c.statement << '\n';
  }
}

// The trigger coefficient for event runs: the override if given, else μ₁.
// Throws ConditionViolation when neither exists.
std::optional<double> trigger_mu(const ExperimentConfig& c, const SynthesisAttempt& a) {
  if (c.simulation.policy == PolicyKind::kPeriodic && !c.simulation.mu) return std::nullopt;
  if (c.simulation.mu) return c.simulation.mu;
  if (a.mu) return a.mu;
  throw ConditionViolation(a.failed_condition.value_or("mu1"), a.failure_margin,
                           "no trigger coefficient: " + a.failure_message +
                               " (set simulation.mu to override)");
}

SimTrace run_trace(const ExperimentConfig& c, const SynthesisAttempt& a, const TriggerPolicy& policy) {
  return simulate(c.system.A, c.system.B, c.model(), a.K, policy, c.trajectory(),
                  c.simulation.x0, c.simulation.steps, a.P);
}

}  // namespace

CommandResult run_synth(const ExperimentConfig& c, const fs::path& out_dir) {
  const SynthesisAttempt a = run_attempt(c);
  json doc = json_attempt(a);
  const std::optional<double> mu_formula = formula_mu1(a, c.system.B, c.params.sigma);
  if (!a.mu && mu_formula) doc["mu1_formula_value"] = json_number(*mu_formula);

  CommandResult r;
  const fs::path path = out_dir / "synth.json";
  write_text_file(path, dump_json(doc));
  r.written.push_back(path);

  std::ostringstream os;
  os << "P  = " << matrix_line(a.P) << '\n'
     << "K  = " << matrix_line(a.K) << '\n'
     << "L  = " << matrix_line(a.L) << '\n';
  if (a.Z) os << "Z  = " << matrix_line(*a.Z) << (a.complete() ? "" : "  (not admissible)") << '\n';
  if (a.Q1) os << "Q1 = " << matrix_line(*a.Q1) << (a.complete() ? "" : "  (not admissible)") << '\n';
  if (a.mu) {
    os << "mu1 = " << format_number(*a.mu) << '\n';
  } else if (mu_formula) {
    os << "mu1 (formula, design gate failed) = " << format_number(*mu_formula) << '\n';
  }
  os << "feasibility:\n";
  append_report(os, a.report);
  if (!a.complete()) {
    os << "synthesis incomplete: " << a.failure_message << '\n';
    r.exit_code = kExitNumericalFailure;
  }
  r.summary = os.str();
  return r;
}

CommandResult run_simulate(const ExperimentConfig& c, const fs::path& out_dir) {
  const SynthesisAttempt a = run_attempt(c);
  const std::optional<double> mu = trigger_mu(c, a);
  const TriggerPolicy policy = c.simulation.policy == PolicyKind::kEvent
                                   ? TriggerPolicy::event(*mu)
                                   : TriggerPolicy::periodic();
  const SimTrace trace = run_trace(c, a, policy);
  const PolicySummary s = summarize(trace);

  CommandResult r;
  const fs::path csv = out_dir / "trace.csv";
  write_text_file(csv, trace_csv(trace, c.system.sample_time));
  json doc = {{"policy", to_string(trace.policy)},
              {"mu", trace.mu ? json_number(*trace.mu) : json(nullptr)},
              {"steps", c.simulation.steps},
              {"summary", json_summary(s)}};
  const fs::path js = out_dir / "simulate.json";
  write_text_file(js, dump_json(doc));
  r.written = {csv, js};

  std::ostringstream os;
  os << "policy " << to_string(trace.policy);
  if (trace.mu) os << " (mu = " << format_number(*trace.mu) << ")";
  os << "\ntransmissions " << s.transmissions << " of " << trace.steps.size() << " samples\n"
     << "final |x| = " << format_number(s.final_norm) << "  (|x(0)| = " << format_number(s.initial_norm)
     << ")\n";
  if (s.diverged) os << "state diverged; trace truncated\n";
  r.summary = os.str();
  return r;
}

CommandResult run_compare(const ExperimentConfig& c, const fs::path& out_dir) {
  const SynthesisAttempt a = run_attempt(c);
  ExperimentConfig event_cfg = c;
  event_cfg.simulation.policy = PolicyKind::kEvent;
  const double mu = *trigger_mu(event_cfg, a);
  const PolicyComparison cmp = compare_policies(c.system.A, c.system.B, c.model(), a.K, mu,
                                                c.trajectory(), c.simulation.x0,
                                                c.simulation.steps, a.P);
  CommandResult r;
  const fs::path periodic = out_dir / "trace_periodic.csv";
  const fs::path event = out_dir / "trace_event.csv";
  const fs::path js = out_dir / "compare.json";
  write_text_file(periodic, trace_csv(cmp.periodic, c.system.sample_time));
  write_text_file(event, trace_csv(cmp.event, c.system.sample_time));
  write_text_file(js, dump_json(json_comparison(cmp)));
  r.written = {js, periodic, event};

  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %13s %14s %10s %9s %9s\n", "policy", "transmissions",
                "final |x|", "gap min", "gap mean", "gap max");
  os << line;
  const auto row = [&](const char* name, const PolicySummary& s) {
    std::snprintf(line, sizeof line, "%-10s %13zu %14s %10zu %9s %9zu\n", name, s.transmissions,
                  format_number(s.final_norm).c_str(), s.gap_min, format_number(s.gap_mean).c_str(),
                  s.gap_max);
    os << line;
  };
  row("periodic", cmp.periodic_summary);
  row("event", cmp.event_summary);
  os << "mu = " << format_number(mu) << ", savings ratio = " << format_number(cmp.savings_ratio)
     << '\n';
  r.summary = os.str();
  return r;
}

CommandResult run_verify(const ExperimentConfig& c, const fs::path& out_dir) {
  const SynthesisAttempt a = run_attempt(c);
  const UncertaintyModel model = c.model();
  const SynthesisParams params = c.synthesis_params();
  std::vector<CheckResult> checks;

  const auto guarded = [&checks](const std::string& name, auto&& body) {
    try {
      checks.push_back(body());
    } catch (const Error& e) {
      CheckResult r;
      r.name = name;
      r.holds = false;
      r.margin = std::numeric_limits<double>::quiet_NaN();
      r.witness = std::string("precondition failed: ") + e.what();
      checks.push_back(std::move(r));
    }
  };

  guarded("inversion_identity", [&] { return check_inversion_identity(a.P, params.epsilon()); });

  guarded("lemma1", [&] {
    CheckResult worst;
    bool first = true;
    for (const Vector& p : model.box().sample_points(c.verification.grid_points)) {
      CheckResult r = check_lemma1(a.P, params.epsilon(), a.Ac, model.delta_A(p));
      if (first || r.margin < worst.margin) {
        std::ostringstream os;
        os << "p =";
        for (double v : p) os << ' ' << format_number(v);
        r.detail = "worst over Omega at " + os.str();
        if (!r.holds) r.witness = os.str() + ": " + r.witness.value_or("");
        worst = std::move(r);
        first = false;
      }
    }
    return worst;
  });

  guarded("lemma2", [&] {
    if (!a.Z) throw NumericalError("Z is undefined");
    return check_lemma2(c.system.A, c.system.B, a.P, params, a.K, a.L, *a.Z);
  });

  guarded("dissipation", [&] {
    if (!a.complete()) {
      throw ConditionViolation(*a.failed_condition, a.failure_margin, a.failure_message);
    }
    const double mu = c.simulation.mu.value_or(*a.mu);
    const SimTrace trace = run_trace(c, a, TriggerPolicy::event(mu));
    const Matrix BK = c.system.B * a.K;
    const Matrix Me = (BK.transpose() * *a.Z * BK).symmetrized();
    return check_dissipation(trace, model, a.P, *a.Z, *a.Q1, Me, params.sigma());
  });

  CampaignOptions campaign;
  campaign.samples = c.verification.samples;
  campaign.seed = c.simulation.seed;
  campaign.max_dim = c.verification.max_dim;
  const CampaignResult identity = identity_campaign(campaign);
  const CampaignResult lemma1 = lemma1_campaign(campaign);

  bool ok = a.complete() && a.report.all_hold() && identity.holds() && lemma1.holds();
  json check_docs = json::array();
  for (const CheckResult& r : checks) {
    ok = ok && r.holds;
    check_docs.push_back(json_check(r));
  }

  json doc = {{"all_hold", ok},
              {"synthesis_complete", a.complete()},
              {"feasibility", json_report(a.report)},
              {"checks", check_docs},
              {"campaigns", json::array({json_campaign(identity), json_campaign(lemma1)})}};
  if (a.failed_condition) {
    doc["synthesis_failure"] = {{"condition", *a.failed_condition},
                                {"margin", json_number(a.failure_margin)},
                                {"message", a.failure_message}};
  }

  CommandResult r;
  const fs::path js = out_dir / "verify.json";
  write_text_file(js, dump_json(doc));
  r.written.push_back(js);

  std::ostringstream os;
  os << "feasibility:\n";
  append_report(os, a.report);
  if (a.failed_condition)
    os << "synthesis incomplete: condition (" << *a.failed_condition << ") violated\n";
  os << "checks:\n";
  for (const CheckResult& ch : checks) {
    os << "  " << (ch.holds ? "holds " : "FAILS ") << ch.name << "  margin "
       << format_number(ch.margin);
    if (ch.witness) os << "  " << *ch.witness;
    os << '\n';
  }
  for (const CampaignResult* cr : {&identity, &lemma1}) {
    os << "  " << (cr->holds() ? "holds " : "FAILS ") << cr->name << " campaign  " << cr->failures
       << "/" << cr->samples << " failures, worst margin " << format_number(cr->worst_margin) << '\n';
  }
  os << (ok ? "all checks hold\n" : "verification failed\n");
  r.summary = os.str();
  r.exit_code = ok ? kExitOk : kExitVerificationFailure;
  return r;
}

CommandResult run_scaffold(const fs::path& out_dir) {
  CommandResult r;
  const fs::path path = out_dir / "config.json";
  write_text_file(path, dump_json(to_json(scaffold_config())));
  r.written.push_back(path);
  r.summary = "wrote " + path.string() + "\n";
  return r;
}

}  // namespace robust_etc
