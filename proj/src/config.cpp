#include "robust_etc/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <string>
#include <utility>

#include "robust_etc/linalg.hpp"

namespace robust_etc {

namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigError(path + ": " + message);
}

// Object view that rejects keys outside the declared set.
class Fields {
 public:
  Fields(const json& obj, std::string path, std::initializer_list<const char*> allowed)
      : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj_.items()) {
      if (!ok.contains(key)) fail(join(path_, key), "unknown field");
    }
  }

  bool has(const char* key) const { return obj_.contains(key); }

  const json& at(const char* key) const {
    if (!obj_.contains(key)) fail(join(path_, key), "missing required field");
    return obj_.at(key);
  }

  std::string path(const char* key) const { return join(path_, key); }

 private:
  const json& obj_;
  std::string path_;
};

double read_number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(path, "must be finite");
  return d;
}

std::size_t read_count(const json& v, const std::string& path) {
  if (!v.is_number_unsigned()) fail(path, "expected a non-negative integer");
  return v.get<std::size_t>();
}

Vector read_vector(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  Vector out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(read_number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

Matrix read_matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of rows");
  std::size_t cols = 0;
  std::vector<double> entries;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string row_path = path + "[" + std::to_string(i) + "]";
    const Vector row = read_vector(v[i], row_path);
    if (i == 0) {
      cols = row.size();
      if (cols == 0) fail(row_path, "rows must be non-empty");
    } else if (row.size() != cols) {
      fail(row_path, "expected " + std::to_string(cols) + " entries like row 0");
    }
    entries.insert(entries.end(), row.begin(), row.end());
  }
  return Matrix(v.size(), cols, std::move(entries));
}

void require_shape(const Matrix& m, std::size_t rows, std::size_t cols, const std::string& path) {
  if (m.rows() != rows || m.cols() != cols) {
    fail(path, "expected " + std::to_string(rows) + "x" + std::to_string(cols) + ", got " +
                   std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
}

json write_matrix(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

const char* trajectory_name(ParamTrajectory::Kind kind) {
  switch (kind) {
    case ParamTrajectory::Kind::kConstant: return "constant";
    case ParamTrajectory::Kind::kRamp: return "ramp";
    case ParamTrajectory::Kind::kSequence: return "sequence";
    case ParamTrajectory::Kind::kUniformRandom: return "uniform_random";
  }
  return "constant";
}

SystemConfig parse_system(const json& v) {
  const Fields f(v, "system", {"A", "B", "uncertainty", "sample_time"});
  SystemConfig s;
  s.A = read_matrix(f.at("A"), f.path("A"));
  const std::size_t n = s.A.rows();
  require_shape(s.A, n, n, f.path("A"));
  s.B = read_matrix(f.at("B"), f.path("B"));
  if (s.B.rows() != n) fail(f.path("B"), "expected " + std::to_string(n) + " rows");
  if (f.has("sample_time")) {
    s.sample_time = read_number(f.at("sample_time"), f.path("sample_time"));
    if (!(s.sample_time > 0.0)) fail(f.path("sample_time"), "must be > 0");
  }

  const Fields u(f.at("uncertainty"), f.path("uncertainty"), {"basis", "p_lo", "p_hi", "F"});
  const json& basis = u.at("basis");
  if (!basis.is_array()) fail(u.path("basis"), "expected an array of matrices");
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const std::string p = u.path("basis") + "[" + std::to_string(i) + "]";
    s.basis.push_back(read_matrix(basis[i], p));
    require_shape(s.basis.back(), n, n, p);
  }
  s.p_lo = read_vector(u.at("p_lo"), u.path("p_lo"));
  s.p_hi = read_vector(u.at("p_hi"), u.path("p_hi"));
  if (s.p_lo.size() != s.basis.size())
    fail(u.path("p_lo"), "expected one bound per basis matrix (" + std::to_string(s.basis.size()) + ")");
  if (s.p_hi.size() != s.basis.size())
    fail(u.path("p_hi"), "expected one bound per basis matrix (" + std::to_string(s.basis.size()) + ")");
  for (std::size_t i = 0; i < s.p_lo.size(); ++i)
    if (s.p_lo[i] > s.p_hi[i]) fail(u.path("p_lo"), "p_lo[" + std::to_string(i) + "] exceeds p_hi");
  s.F = read_matrix(u.at("F"), u.path("F"));
  require_shape(s.F, n, n, u.path("F"));
  if ((s.F - s.F.transpose()).max_abs() > 1e-12 * std::max(1.0, s.F.max_abs()))
    fail(u.path("F"), "must be symmetric");
  if (!is_positive_semidefinite(s.F)) fail(u.path("F"), "must be positive semidefinite");
  return s;
}

ParamsConfig parse_params(const json& v, std::size_t n, std::size_t m) {
  const Fields f(v, "params", {"Q", "R1", "R2", "alpha", "beta", "epsilon", "sigma"});
  ParamsConfig p;
  p.Q = read_matrix(f.at("Q"), f.path("Q"));
  require_shape(p.Q, n, n, f.path("Q"));
  p.R1 = read_matrix(f.at("R1"), f.path("R1"));
  require_shape(p.R1, m, m, f.path("R1"));
  p.R2 = read_matrix(f.at("R2"), f.path("R2"));
  require_shape(p.R2, n, n, f.path("R2"));
  p.alpha = read_number(f.at("alpha"), f.path("alpha"));
  p.beta = read_number(f.at("beta"), f.path("beta"));
  p.epsilon = read_number(f.at("epsilon"), f.path("epsilon"));
  p.sigma = read_number(f.at("sigma"), f.path("sigma"));
  if (p.beta < 0.0) fail(f.path("beta"), "must be >= 0");
  if (!(p.epsilon > 0.0)) fail(f.path("epsilon"), "must be > 0");
  if (!(p.sigma > 0.0 && p.sigma < 1.0)) fail(f.path("sigma"), "must lie in (0, 1)");
  return p;
}

TrajectoryConfig parse_trajectory(const json& v, const std::string& path, std::size_t d) {
  if (!v.is_object() || !v.contains("kind")) fail(join(path, "kind"), "missing required field");
  if (!v.at("kind").is_string()) fail(join(path, "kind"), "expected a string");
  const std::string kind = v.at("kind").get<std::string>();
  TrajectoryConfig t;
  const auto check_dim = [d](const Vector& p, const std::string& where) {
    if (p.size() != d) fail(where, "expected " + std::to_string(d) + " entries (one per basis matrix)");
  };
  if (kind == "constant") {
    const Fields f(v, path, {"kind", "value"});
    t.kind = ParamTrajectory::Kind::kConstant;
    t.values.push_back(read_vector(f.at("value"), f.path("value")));
    check_dim(t.values[0], f.path("value"));
  } else if (kind == "ramp") {
    const Fields f(v, path, {"kind", "start", "end"});
    t.kind = ParamTrajectory::Kind::kRamp;
    t.values.push_back(read_vector(f.at("start"), f.path("start")));
    t.values.push_back(read_vector(f.at("end"), f.path("end")));
    check_dim(t.values[0], f.path("start"));
    check_dim(t.values[1], f.path("end"));
  } else if (kind == "sequence") {
    const Fields f(v, path, {"kind", "values"});
    t.kind = ParamTrajectory::Kind::kSequence;
    const json& vals = f.at("values");
    if (!vals.is_array() || vals.empty()) fail(f.path("values"), "expected a non-empty array");
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const std::string p = f.path("values") + "[" + std::to_string(i) + "]";
      t.values.push_back(read_vector(vals[i], p));
      check_dim(t.values.back(), p);
    }
  } else if (kind == "uniform_random") {
    const Fields f(v, path, {"kind"});
    t.kind = ParamTrajectory::Kind::kUniformRandom;
  } else {
    fail(join(path, "kind"), "unknown trajectory kind '" + kind +
                                 "' (constant, ramp, sequence, uniform_random)");
  }
  return t;
}

SimulationConfig parse_simulation(const json& v, std::size_t n, std::size_t d) {
  const Fields f(v, "simulation", {"x0", "N", "policy", "mu", "p_trajectory", "seed"});
  SimulationConfig s;
  s.x0 = read_vector(f.at("x0"), f.path("x0"));
  if (s.x0.size() != n) fail(f.path("x0"), "expected " + std::to_string(n) + " entries");
  if (f.has("N")) {
    s.steps = read_count(f.at("N"), f.path("N"));
    if (s.steps < 1) fail(f.path("N"), "must be >= 1");
  }
  if (f.has("policy")) {
    const json& p = f.at("policy");
    if (!p.is_string()) fail(f.path("policy"), "expected \"event\" or \"periodic\"");
    const std::string name = p.get<std::string>();
    if (name == "event") {
      s.policy = PolicyKind::kEvent;
    } else if (name == "periodic") {
      s.policy = PolicyKind::kPeriodic;
    } else {
      fail(f.path("policy"), "expected \"event\" or \"periodic\"");
    }
  }
  if (f.has("mu")) {
    s.mu = read_number(f.at("mu"), f.path("mu"));
    if (!(*s.mu > 0.0)) fail(f.path("mu"), "must be > 0");
  }
  if (f.has("p_trajectory")) {
    s.trajectory = parse_trajectory(f.at("p_trajectory"), f.path("p_trajectory"), d);
  } else if (d == 0) {
    s.trajectory.values.push_back({});
  } else {
    fail(f.path("p_trajectory"), "required when the model has uncertain parameters");
  }
  if (f.has("seed")) {
    if (!f.at("seed").is_number_unsigned()) fail(f.path("seed"), "expected a non-negative integer");
    s.seed = f.at("seed").get<std::uint64_t>();
  }
  return s;
}

VerificationConfig parse_verification(const json& v) {
  const Fields f(v, "verification", {"samples", "max_dim", "grid_points"});
  VerificationConfig c;
  if (f.has("samples")) c.samples = read_count(f.at("samples"), f.path("samples"));
  if (f.has("max_dim")) {
    c.max_dim = read_count(f.at("max_dim"), f.path("max_dim"));
    if (c.max_dim < 1) fail(f.path("max_dim"), "must be >= 1");
  }
  if (f.has("grid_points")) {
    c.grid_points = read_count(f.at("grid_points"), f.path("grid_points"));
    if (c.grid_points < 2) fail(f.path("grid_points"), "must be >= 2");
  }
  return c;
}

OutputConfig parse_output(const json& v) {
  const Fields f(v, "output", {"dir"});
  OutputConfig o;
  if (f.has("dir")) {
    if (!f.at("dir").is_string()) fail(f.path("dir"), "expected a string");
    o.dir = f.at("dir").get<std::string>();
  }
  return o;
}

}  // namespace

UncertaintyModel ExperimentConfig::model() const {
  return UncertaintyModel(system.basis, ParameterBox(system.p_lo, system.p_hi), system.F);
}

SynthesisParams ExperimentConfig::synthesis_params() const {
  return SynthesisParams(params.Q, params.R1, params.R2, params.alpha, params.beta,
                         params.epsilon, params.sigma);
}

ParamTrajectory ExperimentConfig::trajectory() const {
  const auto& t = simulation.trajectory;
  switch (t.kind) {
    case ParamTrajectory::Kind::kConstant: return ParamTrajectory::constant(t.values.at(0));
    case ParamTrajectory::Kind::kRamp: return ParamTrajectory::ramp(t.values.at(0), t.values.at(1));
    case ParamTrajectory::Kind::kSequence: return ParamTrajectory::sequence(t.values);
    case ParamTrajectory::Kind::kUniformRandom:
      return ParamTrajectory::uniform_random(simulation.seed);
  }
  return ParamTrajectory::constant(t.values.at(0));
}

FeasibilityOptions ExperimentConfig::feasibility_options() const {
  FeasibilityOptions o;
  o.grid_points = verification.grid_points;
  return o;
}

ExperimentConfig parse_config(const nlohmann::json& doc) {
  const Fields root(doc, "",
                    {"schema_version", "system", "params", "simulation", "verification", "output"});
  ExperimentConfig c;
  const json& version = root.at("schema_version");
  if (!version.is_number_integer() || version.get<int>() != kSchemaVersion)
    fail("schema_version", "unsupported version (expected " + std::to_string(kSchemaVersion) + ")");
  c.schema_version = kSchemaVersion;
  c.system = parse_system(root.at("system"));
  const std::size_t n = c.system.A.rows();
  const std::size_t d = c.system.basis.size();
  c.params = parse_params(root.at("params"), n, c.system.B.cols());
  c.simulation = parse_simulation(root.at("simulation"), n, d);
  if (root.has("verification")) c.verification = parse_verification(root.at("verification"));
  if (root.has("output")) c.output = parse_output(root.at("output"));

  // Definiteness and rank checks live in the library constructors.
  try {
    (void)c.synthesis_params();
  } catch (const InvalidArgument& e) {
    fail("params", e.what());
  }
  try {
    (void)pseudo_inverse(c.system.B);
  } catch (const Error& e) {
    fail("system.B", std::string("must have full column rank (") + e.what() + ")");
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  return parse_config(doc);
}

nlohmann::json to_json(const ExperimentConfig& c) {
  json basis = json::array();
  for (const Matrix& e : c.system.basis) basis.push_back(write_matrix(e));

  json traj = {{"kind", trajectory_name(c.simulation.trajectory.kind)}};
  const auto& tv = c.simulation.trajectory.values;
  switch (c.simulation.trajectory.kind) {
    case ParamTrajectory::Kind::kConstant: traj["value"] = tv.at(0); break;
    case ParamTrajectory::Kind::kRamp:
      traj["start"] = tv.at(0);
      traj["end"] = tv.at(1);
      break;
    case ParamTrajectory::Kind::kSequence: traj["values"] = tv; break;
    case ParamTrajectory::Kind::kUniformRandom: break;
  }

  json sim = {{"x0", c.simulation.x0},
              {"N", c.simulation.steps},
              {"policy", to_string(c.simulation.policy)},
              {"p_trajectory", traj},
              {"seed", c.simulation.seed}};
  if (c.simulation.mu) sim["mu"] = *c.simulation.mu;

  return json{
      {"schema_version", c.schema_version},
      {"system",
       {{"A", write_matrix(c.system.A)},
        {"B", write_matrix(c.system.B)},
        {"sample_time", c.system.sample_time},
        {"uncertainty",
         {{"basis", basis}, {"p_lo", c.system.p_lo}, {"p_hi", c.system.p_hi},
          {"F", write_matrix(c.system.F)}}}}},
      {"params",
       {{"Q", write_matrix(c.params.Q)},
        {"R1", write_matrix(c.params.R1)},
        {"R2", write_matrix(c.params.R2)},
        {"alpha", c.params.alpha},
        {"beta", c.params.beta},
        {"epsilon", c.params.epsilon},
        {"sigma", c.params.sigma}}},
      {"simulation", sim},
      {"verification",
       {{"samples", c.verification.samples},
        {"max_dim", c.verification.max_dim},
        {"grid_points", c.verification.grid_points}}},
      {"output", {{"dir", c.output.dir}}}};
}

ExperimentConfig scaffold_config() {
  ExperimentConfig c;
  c.system.A = Matrix{{0, 1}, {1, 0}};
  c.system.B = Matrix{{0}, {1}};
  c.system.basis = {Matrix{{1, 1}, {0, 0}}};
  c.system.p_lo = {0.0};
  c.system.p_hi = {0.8};
  c.system.F = Matrix::constant(2, 2, 6.09);
  c.params.Q = Matrix::identity(2);
  c.params.R1 = Matrix::identity(1);
  c.params.R2 = Matrix::identity(2);
  c.params.alpha = 10.0;
  c.params.beta = 5.0;
  c.params.epsilon = 0.1;
  c.params.sigma = 0.1;
  c.simulation.x0 = {1.0, -1.0};
  c.simulation.mu = 0.29;
  c.simulation.trajectory.values = {{0.8}};
  return c;
}

}  // namespace robust_etc
