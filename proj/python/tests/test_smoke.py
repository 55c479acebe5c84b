import json
import pathlib

import numpy as np
import pytest

import robust_etc as re

CONFIGS = pathlib.Path(__file__).resolve().parents[2] / "configs"


def example_arrays():
    A = np.array([[0.0, 1.0], [1.0, 0.0]])
    B = np.array([[0.0], [1.0]])
    return A, B, np.eye(2), np.eye(1), np.eye(2), np.full((2, 2), 6.09)


def test_gains_match_example():
    A, B, Q, R1, R2, F = example_arrays()
    P = re.solve_modified_dare(A, B, Q, R1, R2, 10.0, 5.0, 0.1, F)
    np.testing.assert_allclose(P, [[33.0587, 6.09006], [6.09006, 32.1]], atol=1e-3)
    K, L = re.gains(A, B, P, Q, R1, R2, 10.0, 5.0, 0.1)
    np.testing.assert_allclose(K, [[-0.9687, -0.0001]], atol=1e-3)
    np.testing.assert_allclose(L, [[-0.0006, -0.1], [0.0, 0.0]], atol=1e-3)


def test_scalar_golden_ratio():
    one = np.eye(1)
    P = re.solve_modified_dare(one, one, one, one, one, 0.0, 0.0, 0.1, np.zeros((1, 1)))
    assert P[0, 0] == pytest.approx((1 + 5**0.5) / 2, abs=1e-10)


def test_pseudo_inverse_matches_numpy():
    rng = np.random.default_rng(3)
    B = rng.normal(size=(4, 2))
    np.testing.assert_allclose(re.pseudo_inverse(B), np.linalg.pinv(B), atol=1e-10)


def test_compute_Z_scalar():
    Z = re.compute_Z(np.array([[1.618]]), 0.1)
    assert Z[0, 0] == pytest.approx(10 + 1.618**2 / (10 - 1.618), rel=1e-12)


def test_config_round_trip():
    cfg = re.scaffold_config()
    assert re.normalize_config(cfg) == cfg
    assert re.load_config(CONFIGS / "section4.json")["simulation"]["mu"] == 0.29


def test_config_errors_name_the_field():
    cfg = re.scaffold_config()
    cfg["params"]["bogus"] = 1
    with pytest.raises(re.ConfigError, match="params.bogus"):
        re.normalize_config(cfg)


def test_synthesis_report_on_example():
    report = re.synthesize(re.load_config(CONFIGS / "section4.json"))
    assert not report["complete"]
    assert report["failure"]["condition"] == "14"
    verdicts = {c["id"]: c["verdict"] for c in report["feasibility"]}
    assert verdicts["9"] == "fails"
    assert set(verdicts) == {"13", "9", "17", "22", "23", "24"}


def test_feasible_demo_is_complete():
    report = re.synthesize(re.load_config(CONFIGS / "feasible_demo.json"))
    assert report["complete"]
    assert report["all_conditions_hold"]
    assert report["mu1"] > 0


def test_simulation_shapes_and_trigger():
    cfg = re.load_config(CONFIGS / "section4.json")
    event = re.simulate(cfg)
    periodic = re.simulate(cfg, policy="periodic")
    assert event["x"].shape == (21, 2)
    assert event["u"].shape == (21, 1)
    assert event["triggered"][0]
    assert periodic["transmissions"] == 21
    assert event["transmissions"] < 20
    assert np.linalg.norm(event["x"][-1]) <= 0.05 * np.linalg.norm(event["x"][0])
    assert event["summary"]["transmissions"] == event["transmissions"]


def test_simulate_without_mu_raises_condition():
    cfg = re.load_config(CONFIGS / "section4.json")
    del cfg["simulation"]["mu"]
    with pytest.raises(re.ConditionViolation) as info:
        re.simulate(cfg)
    assert info.value.condition == "14"
    assert info.value.margin < 0


def test_run_command_writes_artifacts(tmp_path):
    cfg = re.load_config(CONFIGS / "feasible_demo.json")
    code, summary, written = re.run_command("compare", cfg, tmp_path)
    assert code == 0
    assert summary
    names = {pathlib.Path(p).name for p in written}
    assert {"compare.json", "trace_periodic.csv", "trace_event.csv"} <= names
    doc = json.loads((tmp_path / "compare.json").read_text())
    assert doc["periodic"]["transmissions"] == 21


def test_verify_exit_codes(tmp_path):
    assert re.run_command("verify", re.load_config(CONFIGS / "feasible_demo.json"), tmp_path)[0] == 0
    assert re.run_command("verify", re.load_config(CONFIGS / "section4.json"), tmp_path)[0] == 4


def test_campaigns():
    ident = re.identity_campaign(samples=200, seed=5)
    assert ident["failures"] == 0
    assert re.lemma1_campaign(samples=200, seed=5)["failures"] == 0


def test_invalid_arguments_raise_value_error():
    with pytest.raises(ValueError):
        re.compute_Z(np.array([[1.0, 2.0, 3.0]]), 0.1)
