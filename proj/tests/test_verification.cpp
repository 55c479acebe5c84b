#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracle.hpp"
#include "robust_etc/error.hpp"
#include "robust_etc/linalg.hpp"
#include "robust_etc/synthesis.hpp"
#include "robust_etc/trigger_sim.hpp"
#include "robust_etc/verification.hpp"

using namespace robust_etc;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const double kGolden = (1.0 + std::sqrt(5.0)) / 2.0;

struct Demo {
  Matrix A{{0.1, 0.1}, {0.5, 0.3}};
  Matrix B{{0}, {1}};
  UncertaintyModel model{{Matrix{{0.05, 0}, {0, 0}}, Matrix{{0, 0}, {0.1, 0.1}}},
                         ParameterBox({-1.0, -1.0}, {1.0, 1.0}),
                         Matrix::identity(2)};
  SynthesisParams params{Matrix::identity(2), Matrix{{1}}, Matrix::identity(2), 0.15, 2, 0.1, 0.1};
  SynthesisOutcome out = synthesize(A, B, model, params);

  Matrix Me() const {
    const Matrix BK = B * out.K;
    return (BK.transpose() * out.Z * BK).symmetrized();
  }
  SimTrace run(const Matrix& K, std::span<const double> x0, std::uint64_t seed = 9) const {
    return simulate(A, B, model, K, TriggerPolicy::event(out.mu),
                    ParamTrajectory::uniform_random(seed), x0, 20, out.P);
  }
};

}  // namespace

TEST_CASE("inversion identity examples", "[verification]") {
  const CheckResult a = check_inversion_identity(Matrix{{1.618}}, 0.1);
  CHECK(a.holds);
  const double lhs = 1.0 / (1.0 / 1.618 - 0.1);
  CHECK_THAT(lhs, WithinAbs(1.9305, 5e-4));
  CHECK_THAT(1.618 + 1.618 * 1.618 / (10.0 - 1.618), WithinRel(lhs, 1e-12));
  CHECK(a.margin <= 1e-12);

  const CheckResult b = check_inversion_identity(Matrix{{0.5}}, 1.0);
  CHECK(b.holds);
  CHECK(b.margin == 0.0);

  CHECK_THROWS_AS(check_inversion_identity(Matrix{{11.0}}, 0.1), ConditionViolation);
  CHECK_THROWS_AS(check_inversion_identity(Matrix{{-1.0}}, 0.1), InvalidArgument);
}

TEST_CASE("lemma 1 degenerate cases", "[verification]") {
  const Matrix P{{2, 0.5}, {0.5, 1}};
  const double eps = 0.2;
  const Matrix Ac{{0.3, -0.2}, {0.1, 0.9}};
  const Matrix dA{{0.4, 0.1}, {-0.3, 0.2}};
  const oracle::Mat Pe = oracle::to_eigen(P);
  const oracle::Mat X = oracle::Mat::Identity(2, 2) / eps - Pe;

  const CheckResult zero_dA = check_lemma1(P, eps, Ac, Matrix(2, 2));
  CHECK(zero_dA.holds);
  const oracle::Mat Ace = oracle::to_eigen(Ac);
  const oracle::Mat s1 = Ace.transpose() * Pe * X.inverse() * Pe * Ace;
  CHECK_THAT(zero_dA.margin, WithinAbs(oracle::eigvals(s1)(0), 1e-12));

  const CheckResult zero_Ac = check_lemma1(P, eps, Matrix(2, 2), dA);
  CHECK(zero_Ac.holds);
  const oracle::Mat dAe = oracle::to_eigen(dA);
  CHECK_THAT(zero_Ac.margin, WithinAbs(oracle::eigvals(dAe.transpose() * X * dAe)(0), 1e-12));
}

TEST_CASE("lemma 1 needs eps^-1 I - P > 0", "[verification]") {
  // The example's P exceeds eps^-1 = 10, so the lemma does not apply.
  const Matrix A{{0, 1}, {1, 0}};
  const Matrix B{{0}, {1}};
  const SynthesisParams params(Matrix::identity(2), Matrix{{1}}, Matrix::identity(2), 10, 5, 0.1, 0.1);
  const Matrix P = solve_modified_dare(A, B, params, Matrix::constant(2, 2, 6.09));
  const Matrix Ac = A + B * compute_gain_K(A, B, P, params);
  try {
    check_lemma1(P, 0.1, Ac, Matrix{{0.5, 0.5}, {0, 0}});
    FAIL("expected ConditionViolation");
  } catch (const ConditionViolation& e) {
    CHECK(e.condition() == "29");
    CHECK(e.margin() < 0.0);
  }
}

TEST_CASE("lemma 2 on the feasible demo", "[verification]") {
  const Demo d;
  const CheckResult r = check_lemma2(d.A, d.B, d.out.P, d.params, d.out.K, d.out.L, d.out.Z);
  CHECK(r.holds);
  CHECK(r.margin > 0.0);
}

TEST_CASE("lemma 2 on the scalar golden instance matches scalar arithmetic", "[verification]") {
  // With α = 0: slack = ac²(z̃ − z) + s − k², z̃ = (1/p − ε)⁻¹, s = (1/p + 1)⁻¹.
  const double p = kGolden;
  const double eps = 0.1;
  const double k = -p / (1.0 + p);
  const double ac = 1.0 + k;
  const double z = 1.0 / eps + p * p / (1.0 / eps - p);
  const double zt = 1.0 / (1.0 / p - eps);
  const double s = 1.0 / (1.0 / p + 1.0);
  const double slack = ac * ac * (zt - z) + s - k * k;

  const SynthesisParams params(Matrix{{1}}, Matrix{{1}}, Matrix{{1}}, 0, 0, eps, 0.1);
  const CheckResult r = check_lemma2(Matrix{{1}}, Matrix{{1}}, Matrix{{p}}, params, Matrix{{k}},
                                     Matrix{{0}}, Matrix{{z}});
  CHECK_THAT(r.margin, WithinAbs(slack, 1e-10));
  // In one dimension the lemma reduces to P < ε⁻¹ ≤ 2P, false here.
  CHECK_FALSE(r.holds);
}

TEST_CASE("lemma 2 with A = 0 and zero gains is an equality", "[verification]") {
  const SynthesisParams params(Matrix::identity(2), Matrix{{1}}, Matrix::identity(2), 1, 1, 0.1, 0.1);
  const Matrix P = Matrix::identity(2);
  const CheckResult r = check_lemma2(Matrix(2, 2), Matrix{{0}, {1}}, P, params, Matrix(1, 2),
                                     Matrix(2, 2), compute_Z(P, 0.1));
  CHECK(r.holds);
  CHECK(r.margin == 0.0);
}

TEST_CASE("dissipation along the feasible demo", "[verification]") {
  const Demo d;
  for (std::uint64_t seed : {1u, 2u, 3u, 9u}) {
    const SimTrace t = d.run(d.out.K, Vector{1, -1}, seed);
    const CheckResult r = check_dissipation(t, d.model, d.out.P, d.out.Z, d.out.Q1, d.Me(),
                                            d.params.sigma());
    CHECK(r.holds);
    CHECK(check_contraction(t, d.out.Q1, d.params.sigma()).holds);
    CHECK(check_lyapunov_bounds(t, d.out.P).holds);
  }
}

TEST_CASE("dissipation on the zero trajectory", "[verification]") {
  const Demo d;
  const SimTrace t = d.run(d.out.K, Vector{0, 0});
  const CheckResult r = check_dissipation(t, d.model, d.out.P, d.out.Z, d.out.Q1, d.Me(),
                                          d.params.sigma());
  CHECK(r.holds);
  CHECK(r.margin == 0.0);
}

TEST_CASE("dissipation fails for a destabilizing gain", "[verification]") {
  const Demo d;
  const Matrix flipped = -1.0 * d.out.K;
  const SimTrace t = d.run(flipped, Vector{1, -1});
  const CheckResult r = check_dissipation(t, d.model, d.out.P, d.out.Z, d.out.Q1, d.Me(),
                                          d.params.sigma());
  CHECK_FALSE(r.holds);
  CHECK(r.margin < 0.0);
  REQUIRE(r.witness);
  CHECK(r.witness->find("dV") != std::string::npos);
}

TEST_CASE("dissipation requires Lyapunov values", "[verification]") {
  const Demo d;
  const SimTrace t = simulate(d.A, d.B, d.model, d.out.K, TriggerPolicy::periodic(),
                              ParamTrajectory::constant({0, 0}), Vector{1, 1}, 5);
  CHECK_THROWS_AS(check_dissipation(t, d.model, d.out.P, d.out.Z, d.out.Q1, d.Me(), 0.1),
                  InvalidArgument);
}

TEST_CASE("identity and lemma 1 campaigns", "[verification][property]") {
  const CampaignResult id = identity_campaign();
  CHECK(id.samples == 1000);
  CHECK(id.failures == 0);
  CHECK(id.worst_margin <= 1e-8);
  const CampaignResult l1 = lemma1_campaign();
  CHECK(l1.failures == 0);
  CHECK(l1.worst_margin >= -1e-8);

  CampaignOptions other;
  other.seed = 77;
  other.samples = 200;
  const CampaignResult again = identity_campaign(other);
  CHECK(again.worst_margin == identity_campaign(other).worst_margin);
  CHECK(again.failures == 0);
}
