"""Set-of-best selection via rank-based simultaneous upper credible limits.

Given M posterior draws of the log-odds differences zeta(l) between each
candidate EDTR and a reference (the column for the reference itself is
identically zero and excluded), we want one-sided upper limits U(l) that
hold simultaneously:

    P( zeta(l) <= U(l) for every l ) >= 1 - alpha   under the posterior.

Working with ranks makes this exact and distribution-free within the draw
matrix.  Rank every draw within its column (ascending, ties share the
minimum rank), take each draw row's worst rank across columns, and find
the smallest rank r such that at least ceil((1 - alpha) * M) rows have
worst rank <= r.  Reading off the r-th ascending order statistic of each
column gives limits that cover at least that many complete rows, hence
simultaneous coverage >= 1 - alpha by construction, ties included.

An EDTR whose upper limit falls below zero is credibly worse than the
reference; everything else, always including the reference, forms the
"set of best".
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .posterior import DrawMatrix

# absolute slack when turning (1 - alpha) * M into a count, so that values
# a hair above an integer due to float rounding do not bump the ceiling
_CEIL_SLACK = 1e-9


@dataclass(frozen=True)
class McbResult:
    """Outcome of a set-of-best analysis at credibility level 1 - alpha."""

    alpha: float
    critical_rank: int
    upper_limits: dict[int, float]
    set_of_best: tuple[int, ...]
    reference: int


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie strictly between 0 and 1, got {alpha}")
    return alpha


def coverage_count(alpha: float, m_draws: int) -> int:
    """Number of draw rows the limits must cover: ceil((1 - alpha) * M)."""
    target = math.ceil((1.0 - _check_alpha(alpha)) * m_draws - _CEIL_SLACK)
    return max(1, min(m_draws, target))


def column_ranks(zeta: np.ndarray) -> np.ndarray:
    """Ascending within-column ranks of the draws; ties get the minimum rank."""
    zeta = np.asarray(zeta, dtype=float)
    if zeta.ndim != 2:
        raise ValueError("zeta must be a 2-d array of shape (m_draws, n_columns)")
    if zeta.shape[0] < 1:
        raise ValueError("zeta must contain at least one draw")
    return rankdata(zeta, method="min", axis=0).astype(np.int64)


def critical_rank(ranks: np.ndarray, alpha: float) -> int:
    """Smallest rank covering ceil((1 - alpha) * M) complete draw rows.

    ``ranks`` is the matrix from column_ranks.  A draw row is covered at
    rank r when every column rank in that row is <= r, so the answer is
    the coverage-count order statistic of the row-wise maximum ranks.
    """
    ranks = np.asarray(ranks)
    if ranks.ndim != 2 or ranks.shape[1] < 1:
        raise ValueError("ranks must be 2-d with at least one column")
    m = ranks.shape[0]
    target = coverage_count(alpha, m)
    worst = ranks.max(axis=1)
    worst.sort()
    return int(worst[target - 1])


def upper_limits(zeta: np.ndarray, rank: int) -> np.ndarray:
    """Per-column upper limits: the rank-th ascending order statistic."""
    zeta = np.asarray(zeta, dtype=float)
    m = zeta.shape[0]
    if not (1 <= rank <= m):
        raise ValueError(f"rank must lie in 1..{m}, got {rank}")
    return np.sort(zeta, axis=0)[rank - 1, :]


def set_of_best(draws: DrawMatrix, alpha: float) -> McbResult:
    """EDTRs not credibly worse than the reference at level 1 - alpha.

    The reference always belongs to the set; any other EDTR stays in
    exactly when its simultaneous upper log-odds limit is >= 0.
    """
    alpha = _check_alpha(alpha)
    ids = draws.nonreference_ids
    if not ids:
        raise ValueError("draw matrix has no non-reference EDTR columns to compare")
    ranks = column_ranks(draws.zeta)
    rank = critical_rank(ranks, alpha)
    limits = upper_limits(draws.zeta, rank)
    upper = {l: float(u) for l, u in zip(ids, limits)}
    best = tuple(sorted([draws.reference] + [l for l in ids if upper[l] >= 0.0]))
    return McbResult(
        alpha=alpha,
        critical_rank=rank,
        upper_limits=upper,
        set_of_best=best,
        reference=draws.reference,
    )
