"""Python interface to the flexqpq core library."""

import json

from . import _core
from ._core import (
    DecodeError,
    PlanningError,
    conclusive_probability,
    expected_known_bits,
    failure_probability,
    helstrom_guess,
    helstrom_guess_numeric,
    joint_usd_bound,
    solve_theta,
)

__all__ = [
    "DecodeError",
    "PlanningError",
    "attack",
    "conclusive_probability",
    "decode_frame",
    "encode_frame",
    "expected_known_bits",
    "failure_probability",
    "figure",
    "helstrom_guess",
    "helstrom_guess_numeric",
    "joint_usd_bound",
    "plan",
    "run_session",
    "solve_theta",
    "table",
    "table_mismatches",
]


def plan(n, n_bar, k=None, theta_min=0.2, theta_max=None):
    kwargs = {} if theta_max is None else {"theta_max": theta_max}
    return json.loads(_core.plan_json(n, n_bar, k, theta_min, **kwargs))


def run_session(n, k, theta, **kwargs):
    """Runs one in-process session. Keyword arguments: loss, seed, item,
    database (binary or hex text), flip, max_restarts, check_fraction,
    error_threshold, photon_batch."""
    return json.loads(_core.run_session_json(n, k, theta, **kwargs))


def attack(kind, theta, k=1, n=0, trials=0, seed=1, want_conclusive=True):
    return json.loads(_core.attack_json(kind, theta, k, n, trials, seed, want_conclusive))


def table(which):
    return json.loads(_core.table_json(which))


def table_mismatches(which):
    return _core.table_mismatches(which)


def figure(which, theta_steps=90, max_k=8):
    return json.loads(_core.figure_json(which, theta_steps, max_k))


def encode_frame(message_type, **fields):
    """Encodes one frame. Bit arrays are given as '0'/'1' strings."""
    return _core.encode_frame(message_type, json.dumps(fields))


def decode_frame(data):
    """Returns (type name, fields dict) for one complete frame."""
    doc = json.loads(_core.decode_frame(bytes(data)))
    return doc["type"], doc["fields"]
