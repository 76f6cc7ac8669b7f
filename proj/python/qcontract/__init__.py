"""Convergence-optimal quantizer design for contractive fixed-point iterations."""

import json

from . import _core
from ._core import (
    ConfigError,
    ScalarQuantizer,
    lp_norm,
    nearest_point_a_star,
    sq_worst_case_error,
    tvcoq_error_bound,
    vq_worst_case_error,
    weighted_max_norm,
)

__all__ = [
    "ConfigError",
    "ScalarQuantizer",
    "block_norm",
    "design",
    "lp_norm",
    "nearest_point_a_star",
    "simulate",
    "sq_worst_case_error",
    "tradeoff",
    "tvcoq_error_bound",
    "tvcoq_master",
    "vq_worst_case_error",
    "weighted_max_norm",
]


def block_norm(x, norm):
    return _core.block_norm(list(x), json.dumps(norm))


def tvcoq_master(alpha, n, L, T, L_prime=0.0):
    return json.loads(_core.tvcoq_master(alpha, n, L, T, L_prime))


def _run(fn, config, *args):
    code, output, message = fn(json.dumps(config), *args)
    return code, output, message


def design(config):
    """Returns (exit_code, report dict or None, message)."""
    code, output, message = _run(_core.design, config, "json")
    return code, json.loads(output) if output else None, message


def simulate(config, seeds=None, format="csv"):
    """Returns (exit_code, CSV or JSON text, message)."""
    return _run(_core.simulate, config, seeds, format)


def tradeoff(config, seeds=None, format="csv"):
    return _run(_core.tradeoff, config, seeds, format)
