#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "robust_etc/error.hpp"
#include "robust_etc/matrix.hpp"
#include "robust_etc/synthesis.hpp"
#include "robust_etc/trigger_sim.hpp"
#include "robust_etc/uncertainty.hpp"

namespace robust_etc {

inline constexpr int kSchemaVersion = 1;

/// Malformed or inconsistent experiment configuration. The message names
/// the offending field as a dotted path, e.g. "params.R1".
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct SystemConfig {
  Matrix A;
  Matrix B;
  std::vector<Matrix> basis;
  Vector p_lo;
  Vector p_hi;
  Matrix F;
  /// Sampling interval; only stamps the time column of traces.
  double sample_time = 1.0;

  friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

struct ParamsConfig {
  Matrix Q;
  Matrix R1;
  Matrix R2;
  double alpha = 0.0;
  double beta = 0.0;
  double epsilon = 0.1;
  double sigma = 0.1;

  friend bool operator==(const ParamsConfig&, const ParamsConfig&) = default;
};

struct TrajectoryConfig {
  ParamTrajectory::Kind kind = ParamTrajectory::Kind::kConstant;
  /// constant: one value; ramp: start and end; sequence: every value;
  /// uniform_random: none (draws use the simulation seed).
  std::vector<Vector> values;

  friend bool operator==(const TrajectoryConfig&, const TrajectoryConfig&) = default;
};

struct SimulationConfig {
  Vector x0;
  std::size_t steps = 20;
  PolicyKind policy = PolicyKind::kEvent;
  /// Overrides the synthesized trigger coefficient when set.
  std::optional<double> mu;
  TrajectoryConfig trajectory;
  std::uint64_t seed = 0;

  friend bool operator==(const SimulationConfig&, const SimulationConfig&) = default;
};

struct VerificationConfig {
  std::size_t samples = 1000;
  std::size_t max_dim = 5;
  std::size_t grid_points = 101;

  friend bool operator==(const VerificationConfig&, const VerificationConfig&) = default;
};

struct OutputConfig {
  std::string dir = "results";

  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  SystemConfig system;
  ParamsConfig params;
  SimulationConfig simulation;
  VerificationConfig verification;
  OutputConfig output;

  UncertaintyModel model() const;
  SynthesisParams synthesis_params() const;
  ParamTrajectory trajectory() const;
  FeasibilityOptions feasibility_options() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses and validates every field and all matrix dimensions. Unknown keys
/// are rejected. Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json to_json(const ExperimentConfig& config);

/// The two-state example with p ∈ [0, 0.8] held at 0.8, x0 = [1, −1].
ExperimentConfig scaffold_config();

}  // namespace robust_etc
