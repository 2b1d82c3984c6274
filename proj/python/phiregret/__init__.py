"""Comparator-adaptive swap-regret learners, game self-play and regret analytics."""

import json as _json

from . import _core
from ._core import (
    BmMeta,
    BudgetError,
    ConvergenceError,
    CounterRng,
    KernelMeta,
    ProtocolError,
    best_external,
    best_swap,
    complexity,
    expected_loss_vectors,
    make_matching_pennies,
    make_polymatrix,
    make_zero_sum,
    prior_marginal,
    prior_mass,
    prior_psi,
    prior_weights,
    quantile_regret,
    regret_against,
    self_play,
    stationary_distribution,
    verify,
)

__version__ = "0.1.0"


def run_expert(**options):
    """Run one expert experiment; options mirror the CLI flags."""
    return _json.loads(_core.run_expert(**options))


def run_game(**options):
    """Run one self-play experiment; options mirror the CLI flags."""
    return _json.loads(_core.run_game(**options))


def run_sweep(**options):
    """Run consecutive seeds in parallel; options mirror the CLI flags."""
    return _json.loads(_core.run_sweep(**options))


__all__ = [name for name in dir() if not name.startswith("_")]
