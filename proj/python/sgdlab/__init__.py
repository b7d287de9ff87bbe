"""Stochastic-optimizer acceleration laboratory.

Thin Python veneer over the C++ core: baseline first-order steppers, the
consistency-based acceleration wrappers, closed-form convergence-rate
formulas, and Monte-Carlo verification of the Gaussian expectation identities.
"""

import json as _json

from ._core import (  # noqa: F401
    ConsistencyRecord,
    Objective,
    Optimizer,
    RandomStream,
    classify,
    dot,
    emit_plot,
    make_objective,
    norm_sq,
    quadratic_from,
    reject_filter,
    residual,
    rva_apply_elementwise,
    rva_apply_full,
    rva_wrap,
    sample_gaussian,
    theory,
)
from . import _core as _c

__all__ = [
    "ConsistencyRecord",
    "Objective",
    "Optimizer",
    "RandomStream",
    "classify",
    "compare",
    "dot",
    "emit_plot",
    "make_objective",
    "norm_sq",
    "quadratic_from",
    "reject_filter",
    "residual",
    "run_experiment",
    "run_lemma_suite",
    "rva_apply_elementwise",
    "rva_apply_full",
    "rva_wrap",
    "sample_gaussian",
    "theory",
    "verify_expectation",
    "auto_alpha",
]


def run_experiment(config, out_dir=""):
    """Run one experiment. config: dict or JSON string. Returns the summary dict."""
    if not isinstance(config, str):
        config = _json.dumps(config)
    return _json.loads(_c.run_experiment(config, str(out_dir)))


def auto_alpha(config, pilot_T):
    if not isinstance(config, str):
        config = _json.dumps(config)
    return _json.loads(_c.auto_alpha(config, pilot_T))


def compare(configs):
    payload = [c if isinstance(c, str) else _json.dumps(c) for c in configs]
    return _json.loads(_c.compare(payload))


def verify_expectation(part, d, b, x, n_samples, seed):
    return _json.loads(_c.verify_expectation(part, d, b, x, n_samples, seed))


def run_lemma_suite(n_samples, seed):
    return _json.loads(_c.run_lemma_suite(n_samples, seed))
