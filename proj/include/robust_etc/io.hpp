#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "robust_etc/matrix.hpp"
#include "robust_etc/synthesis.hpp"
#include "robust_etc/trigger_sim.hpp"
#include "robust_etc/verification.hpp"

namespace robust_etc {

/// "%.12g"; non-finite values print as "nan", "inf" or "-inf".
std::string format_number(double v);

/// v rounded to 12 significant digits, or null when not finite. Every number
/// in a report goes through this so JSON output is reproducible.
nlohmann::json json_number(double v);
nlohmann::json json_matrix(const Matrix& m);
nlohmann::json json_vector(const Vector& v);

nlohmann::json json_report(const FeasibilityReport& report);
nlohmann::json json_attempt(const SynthesisAttempt& attempt);
nlohmann::json json_summary(const PolicySummary& summary);
nlohmann::json json_comparison(const PolicyComparison& comparison);
nlohmann::json json_check(const CheckResult& check);
nlohmann::json json_campaign(const CampaignResult& campaign);

/// Header `k,t,x_1..x_n,u_1..u_m,e_norm_sq,threshold,triggered,p,V`, one row
/// per sample. `e_norm_sq` is the error the monitor tested; with several
/// parameters `p` becomes `p_1..p_d`. V is blank when not recorded.
std::string trace_csv(const SimTrace& trace, double sample_time);

/// Pretty-printed with two-space indent and a trailing newline.
std::string dump_json(const nlohmann::json& doc);

/// Writes `text` to `path`, creating parent directories. Throws Error.
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace robust_etc
