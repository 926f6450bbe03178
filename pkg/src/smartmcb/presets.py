"""Shipped truth scenarios for power studies and worked examples.

Each scenario pins full generative truth (per-sequence response
probabilities plus stage-1 response rates) to a small set of published
summary targets.  The numeric values below are frozen output of
``scripts/reconstruct_eta.py``; rerun that script to regenerate them and
see the derivation notes.

``design1`` and ``general`` are benchmark scenarios matched to target
log-odds shortfall vectors; ``engage`` mirrors a two-stage alcohol
intervention trial whose four EDTR response probabilities were
(0.38, 0.41, 0.19, 0.22).
"""

from __future__ import annotations

from .design import builtin_design
from .power import TruthEta

# deviation allowed between a scenario's achieved summaries and its targets
TARGET_TOLERANCE = 0.01

# log-odds shortfall of each EDTR against the best one (zero marks the best)
DESIGN1_DELTA_TARGET = {1: 0.59, 2: 1.30, 3: 0.67, 4: 0.00}
GENERAL_DELTA_TARGET = {1: 0.93, 2: 1.93, 3: 0.00, 4: 1.14, 5: 2.66, 6: 1.94, 7: 0.84, 8: 0.17}

# smallest shortfall considered clinically meaningful in the benchmarks
DESIGN1_DELTA_MIN = 0.61
GENERAL_DELTA_MIN = 0.9

# EDTR response probabilities observed in the engage-style trial, and the
# shortfall threshold used when sizing a follow-up
ENGAGE_EDTR_PROB_TARGET = {1: 0.38, 2: 0.41, 3: 0.19, 4: 0.22}
ENGAGE_DELTA_MIN = 0.5
ENGAGE_STAGE1_N = 148

_DESIGN1_THETA = {1: 0.421653, 2: 0.56433, 3: 0.278976, 4: 0.568631, 5: 0.433017, 6: 0.704246}
_DESIGN1_LAM = {1: 0.4, -1: 0.4}

_GENERAL_THETA = {
    1: 0.353349,
    2: 0.739262,
    3: 0.838201,
    4: 0.349362,
    5: 0.088543,
    6: 0.907967,
    7: 0.325805,
    8: 0.609959,
}
_GENERAL_LAM = {1: 0.5, -1: 0.5}

_ENGAGE_THETA = {1: 0.65, 2: 0.234615, 3: 0.280769, 4: 0.53, 5: 0.006923, 6: 0.053077}
_ENGAGE_LAM = {1: 0.35, -1: 0.35}


def design1_truth() -> TruthEta:
    """Benchmark scenario for the design1 layout (best EDTR is 4)."""
    return TruthEta(builtin_design("design1"), dict(_DESIGN1_THETA), dict(_DESIGN1_LAM))


def general_truth() -> TruthEta:
    """Benchmark scenario for the general layout (best EDTR is 3)."""
    return TruthEta(builtin_design("general"), dict(_GENERAL_THETA), dict(_GENERAL_LAM))


def engage_truth() -> TruthEta:
    """Scenario matching the engage-style trial (best EDTR is 2)."""
    return TruthEta(builtin_design("design1"), dict(_ENGAGE_THETA), dict(_ENGAGE_LAM))
