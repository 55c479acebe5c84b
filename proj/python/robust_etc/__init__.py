"""Robust event-triggered state feedback for uncertain discrete-time systems.

Thin wrapper over the C++ core. Configs are plain dicts with the same schema
as the CLI's JSON files; reports come back as dicts.
"""

import json

from . import _core
from ._core import (
    ConditionViolation,
    ConfigError,
    Error,
    compute_Z,
    gains,
    pseudo_inverse,
    solve_modified_dare,
)

__all__ = [
    "ConditionViolation",
    "ConfigError",
    "Error",
    "compute_Z",
    "gains",
    "identity_campaign",
    "lemma1_campaign",
    "load_config",
    "normalize_config",
    "pseudo_inverse",
    "run_command",
    "scaffold_config",
    "simulate",
    "solve_modified_dare",
    "synthesize",
]


def _text(config):
    return config if isinstance(config, str) else json.dumps(config)


def load_config(path):
    with open(path, encoding="utf-8") as f:
        return normalize_config(json.load(f))


def scaffold_config():
    return json.loads(_core.scaffold_config())


def normalize_config(config):
    """Validated config with every default filled in."""
    return json.loads(_core.normalize_config(_text(config)))


def synthesize(config):
    """P, K, L, Z, Q1, mu1 and the feasibility report. Missing pieces are None."""
    return json.loads(_core.synthesize(_text(config)))


def simulate(config, policy=None):
    """Closed-loop run. `policy` overrides the config: "periodic" or "event".

    Returns a dict with arrays `x` (N+1 by n) and `u`, lists `triggered` and
    `V`, and a `summary` dict.
    """
    trace = _core.simulate(_text(config), policy)
    trace["summary"] = json.loads(trace["summary"])
    return trace


def run_command(command, config, out_dir):
    """Same as the CLI subcommand; returns (exit_code, summary, written paths)."""
    return _core.run_command(command, _text(config or {}), str(out_dir))


def identity_campaign(samples=1000, seed=0, max_dim=5):
    return json.loads(_core.identity_campaign(samples, seed, max_dim))


def lemma1_campaign(samples=1000, seed=0, max_dim=5):
    return json.loads(_core.lemma1_campaign(samples, seed, max_dim))
