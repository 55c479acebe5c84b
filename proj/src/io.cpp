#include "robust_etc/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "robust_etc/error.hpp"

namespace robust_etc {

using nlohmann::json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::strtod(format_number(v).c_str(), nullptr);
}

json json_matrix(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(json_number(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

json json_vector(const Vector& v) {
  json out = json::array();
  for (double x : v) out.push_back(json_number(x));
  return out;
}

json json_report(const FeasibilityReport& report) {
  json out = json::array();
  for (const ConditionCheck& c : report.conditions) {
    json entry = {{"id", c.id},
                  {"statement", c.statement},
                  {"verdict", to_string(c.verdict)},
                  {"margin", json_number(c.margin)},
                  {"witness", c.witness ? json_vector(*c.witness) : json(nullptr)}};
    if (!c.note.empty()) entry["note"] = c.note;
    out.push_back(std::move(entry));
  }
  return out;
}

json json_attempt(const SynthesisAttempt& a) {
  json out = {{"complete", a.complete()},
              {"P", json_matrix(a.P)},
              {"K", json_matrix(a.K)},
              {"L", json_matrix(a.L)},
              {"Ac", json_matrix(a.Ac)},
              {"Z", a.Z ? json_matrix(*a.Z) : json(nullptr)},
              {"Q1", a.Q1 ? json_matrix(*a.Q1) : json(nullptr)},
              {"mu1", a.mu ? json_number(*a.mu) : json(nullptr)},
              {"feasibility", json_report(a.report)},
              {"all_conditions_hold", a.report.all_hold()}};
  if (a.failed_condition) {
    out["failure"] = {{"condition", *a.failed_condition},
                      {"margin", json_number(a.failure_margin)},
                      {"message", a.failure_message}};
  }
  return out;
}

json json_summary(const PolicySummary& s) {
  return {{"transmissions", s.transmissions},
          {"initial_norm", json_number(s.initial_norm)},
          {"final_norm", json_number(s.final_norm)},
          {"decay_ratio", json_number(s.decay_ratio)},
          {"decay_rate", json_number(s.decay_rate)},
          {"gap_min", s.gap_min},
          {"gap_mean", json_number(s.gap_mean)},
          {"gap_max", s.gap_max},
          {"diverged", s.diverged}};
}

json json_comparison(const PolicyComparison& c) {
  return {{"periodic", json_summary(c.periodic_summary)},
          {"event", json_summary(c.event_summary)},
          {"mu", c.event.mu ? json_number(*c.event.mu) : json(nullptr)},
          {"savings_ratio", json_number(c.savings_ratio)}};
}

json json_check(const CheckResult& c) {
  json out = {{"name", c.name}, {"holds", c.holds}, {"margin", json_number(c.margin)}};
  if (c.witness) out["witness"] = *c.witness;
  if (!c.detail.empty()) out["detail"] = c.detail;
  return out;
}

json json_campaign(const CampaignResult& c) {
  json out = {{"name", c.name},
              {"holds", c.holds()},
              {"samples", c.samples},
              {"failures", c.failures},
              {"worst_margin", json_number(c.worst_margin)}};
  if (c.first_failure) out["first_failure"] = *c.first_failure;
  return out;
}

std::string trace_csv(const SimTrace& trace, double sample_time) {
  std::ostringstream os;
  const std::size_t n = trace.steps.empty() ? 0 : trace.steps.front().x.size();
  const std::size_t m = trace.steps.empty() ? 0 : trace.steps.front().u.size();
  const std::size_t d = trace.steps.empty() ? 0 : trace.steps.front().p.size();

  os << "k,t";
  for (std::size_t i = 1; i <= n; ++i) os << ",x_" << i;
  for (std::size_t i = 1; i <= m; ++i) os << ",u_" << i;
  os << ",e_norm_sq,threshold,triggered";
  if (d <= 1) {
    os << ",p";
  } else {
    for (std::size_t i = 1; i <= d; ++i) os << ",p_" << i;
  }
  os << ",V\n";

  for (const SimStep& s : trace.steps) {
    os << s.k << ',' << format_number(static_cast<double>(s.k) * sample_time);
    for (double v : s.x) os << ',' << format_number(v);
    for (double v : s.u) os << ',' << format_number(v);
    os << ',' << format_number(s.e_monitored_sq) << ',' << format_number(s.threshold) << ','
       << (s.triggered ? 1 : 0);
    if (d == 0) os << ',';
    for (double v : s.p) os << ',' << format_number(v);
    os << ',';
    if (s.V) os << format_number(*s.V);
    os << '\n';
  }
  return os.str();
}

std::string dump_json(const json& doc) { return doc.dump(2) + "\n"; }

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace robust_etc
