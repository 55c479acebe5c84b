#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "robust_etc/error.hpp"
#include "robust_etc/linalg.hpp"
#include "robust_etc/synthesis.hpp"
#include "robust_etc/trigger_sim.hpp"

using namespace robust_etc;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const Matrix kA{{0, 1}, {1, 0}};
const Matrix kB{{0}, {1}};

UncertaintyModel example_model(double p_hi = 0.8) {
  return UncertaintyModel({Matrix{{1, 1}, {0, 0}}}, ParameterBox({0.0}, {p_hi}),
                          Matrix::constant(2, 2, 6.09));
}

Matrix example_gain() {
  const SynthesisParams params(Matrix::identity(2), Matrix{{1}}, Matrix::identity(2), 10, 5, 0.1, 0.1);
  const Matrix P = solve_modified_dare(kA, kB, params, example_model().bound());
  return compute_gain_K(kA, kB, P, params);
}

}  // namespace

TEST_CASE("build_delta_A examples", "[trigger_sim]") {
  const UncertaintyModel m = example_model();
  const DeltaA d = build_delta_A(m, Vector{0.8});
  CHECK(d.value == (Matrix{{0.8, 0.8}, {0, 0}}));
  CHECK_FALSE(d.clamped);
  // Nominal plus ΔA is [[p, 1 + p], [1, 0]].
  CHECK(kA + d.value == (Matrix{{0.8, 1.8}, {1, 0}}));
  CHECK(build_delta_A(m, Vector{0.0}).value == Matrix(2, 2));

  const UncertaintyModel two({Matrix{{1, 0}, {0, 0}}, Matrix{{0, 2}, {0, 0}}},
                             ParameterBox({0.0, 0.0}, {1.0, 1.0}), Matrix::identity(2));
  CHECK(build_delta_A(two, Vector{1, 1}).value == (Matrix{{1, 2}, {0, 0}}));

  const DeltaA c = build_delta_A(m, Vector{1.5});
  CHECK(c.clamped);
  CHECK(c.value == (Matrix{{0.8, 0.8}, {0, 0}}));
  CHECK_THROWS_AS(build_delta_A(m, Vector{0.1, 0.2}), InvalidArgument);
}

TEST_CASE("should_trigger examples", "[trigger_sim]") {
  CHECK_FALSE(should_trigger(Vector{1, 0}, Vector{1, 0}, 0.29));
  CHECK(should_trigger(Vector{0, 0}, Vector{0.1, 0}, 0.29));
  CHECK(should_trigger(Vector{1, 0}, Vector{1.6, 0}, 0.29));
  // Boundary is inclusive: ‖e‖² = 0.25 = μ‖x‖².
  CHECK(should_trigger(Vector{1, 0}, Vector{1.5, 0}, 0.25));
  CHECK_THROWS_AS(should_trigger(Vector{1}, Vector{1}, 0.0), InvalidArgument);
}

TEST_CASE("parameter trajectories", "[trigger_sim]") {
  const ParameterBox box({0.0}, {0.8});
  const auto c = ParamTrajectory::constant({0.8}).generate(box, 20);
  CHECK(c.values.size() == 21);
  for (const auto& v : c.values) CHECK(v == Vector{0.8});

  const auto r = ParamTrajectory::ramp({0.0}, {0.8}).generate(box, 20);
  CHECK(r.values.front() == Vector{0.0});
  CHECK(r.values.back() == Vector{0.8});
  CHECK_THAT(r.values[10][0], WithinAbs(0.4, 1e-15));

  const auto s = ParamTrajectory::sequence({{0.1}, {2.0}}).generate(box, 3);
  CHECK(s.values[0] == Vector{0.1});
  CHECK(s.values[1] == Vector{0.8});
  CHECK(s.clamped[1]);
  CHECK(s.values[3] == Vector{0.8});

  const auto u1 = ParamTrajectory::uniform_random(5).generate(box, 50);
  const auto u2 = ParamTrajectory::uniform_random(5).generate(box, 50);
  CHECK(u1.values == u2.values);
  for (const auto& v : u1.values) CHECK(box.contains(v));
  CHECK(u1.values != ParamTrajectory::uniform_random(6).generate(box, 50).values);
}

TEST_CASE("x0 = 0 stays at the origin with one transmission", "[trigger_sim]") {
  const SimTrace t = simulate(kA, kB, example_model(), example_gain(), TriggerPolicy::event(0.29),
                              ParamTrajectory::constant({0.8}), Vector{0, 0}, 20);
  REQUIRE(t.steps.size() == 21);
  for (const SimStep& s : t.steps) CHECK(s.x == Vector{0, 0});
  CHECK(t.transmissions == 1);
  CHECK(t.steps[0].triggered);
}

TEST_CASE("scalar periodic loop decays geometrically", "[trigger_sim]") {
  const double k = -0.618;
  const SimTrace t = simulate(Matrix{{1}}, Matrix{{1}}, UncertaintyModel::none(Matrix{{0}}),
                              Matrix{{k}}, TriggerPolicy::periodic(), ParamTrajectory::constant({}),
                              Vector{1.0}, 20);
  for (const SimStep& s : t.steps) {
    CHECK_THAT(s.x[0], WithinRel(std::pow(1.0 + k, static_cast<double>(s.k)), 1e-12));
    CHECK(s.triggered);
  }
  CHECK(t.transmissions == 21);
}

TEST_CASE("trace invariants for the example configuration", "[trigger_sim][property]") {
  const double mu = 0.29;
  const Matrix K = example_gain();
  for (const auto& traj : {ParamTrajectory::constant({0.8}), ParamTrajectory::ramp({0.0}, {0.8}),
                           ParamTrajectory::uniform_random(3)}) {
    const SimTrace t = simulate(kA, kB, example_model(), K, TriggerPolicy::event(mu), traj,
                                Vector{1, -1}, 20, Matrix::identity(2));
    REQUIRE(t.steps.size() == 21);
    CHECK(t.steps[0].triggered);
    std::size_t count = 0;
    Vector held;
    for (const SimStep& s : t.steps) {
      if (s.triggered) {
        ++count;
        held = s.x;
        CHECK(squared_norm(s.e) == 0.0);
      } else {
        // Trigger soundness.
        CHECK(s.e_monitored_sq < mu * squared_norm(s.x));
      }
      // e(k) = x(k_i) − x(k) and zero-order hold.
      for (std::size_t i = 0; i < s.x.size(); ++i) CHECK(s.e[i] == held[i] - s.x[i]);
      CHECK(s.u == K * held);
      CHECK(s.V);
    }
    CHECK(count == t.transmissions);
    CHECK(t.inter_event_gaps.size() == t.transmissions - 1);
  }
}

TEST_CASE("simulation is deterministic", "[trigger_sim][property]") {
  const auto run = [] {
    return simulate(kA, kB, example_model(), example_gain(), TriggerPolicy::event(0.29),
                    ParamTrajectory::uniform_random(42), Vector{1, -1}, 50, Matrix::identity(2));
  };
  const SimTrace a = run();
  const SimTrace b = run();
  REQUIRE(a.steps.size() == b.steps.size());
  for (std::size_t k = 0; k < a.steps.size(); ++k) {
    CHECK(a.steps[k].x == b.steps[k].x);
    CHECK(a.steps[k].u == b.steps[k].u);
    CHECK(a.steps[k].p == b.steps[k].p);
    CHECK(a.steps[k].triggered == b.steps[k].triggered);
  }
}

TEST_CASE("example configuration: event policy converges with fewer transmissions", "[trigger_sim]") {
  const PolicyComparison c = compare_policies(kA, kB, example_model(), example_gain(), 0.29,
                                              ParamTrajectory::constant({0.8}), Vector{1, -1}, 20);
  CHECK(c.periodic.transmissions == 21);
  CHECK(c.event.transmissions < 20);
  CHECK(c.event_summary.final_norm <= 0.05 * c.event_summary.initial_norm);
  CHECK_THAT(c.savings_ratio, WithinAbs(1.0 - c.event.transmissions / 21.0, 1e-15));
  CHECK(c.savings_ratio > 0.0);
  CHECK(c.event_summary.gap_min >= 1);
  CHECK(c.event_summary.gap_max >= c.event_summary.gap_min);
}

TEST_CASE("tiny mu reproduces the periodic trace", "[trigger_sim]") {
  const PolicyComparison c = compare_policies(kA, kB, example_model(), example_gain(), 1e-12,
                                              ParamTrajectory::constant({0.8}), Vector{1, -1}, 20);
  CHECK(c.event.transmissions == c.periodic.transmissions);
  CHECK(c.savings_ratio == 0.0);
  for (std::size_t k = 0; k < c.periodic.steps.size(); ++k) {
    CHECK(c.event.steps[k].x == c.periodic.steps[k].x);
  }
}

TEST_CASE("no uncertainty and x0 = 0: both policies transmit once", "[trigger_sim]") {
  const UncertaintyModel none = UncertaintyModel::none(Matrix::identity(2));
  const PolicyComparison c = compare_policies(kA, kB, none, example_gain(), 0.29,
                                              ParamTrajectory::constant({}), Vector{0, 0}, 20);
  CHECK(c.event.transmissions == 1);
  // The periodic sensor still sends every sample; it carries no new state.
  CHECK(c.periodic.transmissions == 21);
}

TEST_CASE("divergence guard truncates the trace", "[trigger_sim]") {
  const SimTrace t = simulate(Matrix{{10}}, Matrix{{1}}, UncertaintyModel::none(Matrix{{0}}),
                              Matrix{{0}}, TriggerPolicy::periodic(), ParamTrajectory::constant({}),
                              Vector{1.0}, 40);
  CHECK(t.diverged);
  CHECK(t.steps.size() < 41);
}

TEST_CASE("simulate validates its inputs", "[trigger_sim]") {
  const Matrix K = example_gain();
  CHECK_THROWS_AS(simulate(kA, kB, example_model(), K, TriggerPolicy::periodic(),
                           ParamTrajectory::constant({0.8}), Vector{1}, 20),
                  InvalidArgument);
  CHECK_THROWS_AS(simulate(kA, kB, example_model(), K, TriggerPolicy::periodic(),
                           ParamTrajectory::constant({0.8}), Vector{1, 1}, 0),
                  InvalidArgument);
  CHECK_THROWS_AS(TriggerPolicy::event(0.0), InvalidArgument);
}
