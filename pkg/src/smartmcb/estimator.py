"""Estimator-style front end for the set-of-best analysis.

SmartMcbAnalyzer wraps design resolution, posterior sampling and the
rank-based set-of-best selection behind the familiar fit-and-inspect
shape: hyperparameters in the constructor, ``fit`` on data, results as
trailing-underscore attributes.  It composes with scikit-learn tooling
(get_params, set_params, clone).
"""

from __future__ import annotations

import numbers
import secrets

from sklearn.base import BaseEstimator

from .data import TrialData, aggregate_subjects
from .design import SmartDesign, load_design
from .mcb import set_of_best
from .posterior import DEFAULT_PRIOR, draw_posterior, posterior_mean_edtr_probs


def resolve_seed(random_state) -> int:
    """Pin a reproducible integer seed; None draws one from entropy."""
    if random_state is None:
        return secrets.randbits(32)
    if isinstance(random_state, numbers.Integral) and int(random_state) >= 0:
        return int(random_state)
    raise ValueError(f"random_state must be a non-negative integer or None, got {random_state!r}")


class SmartMcbAnalyzer(BaseEstimator):
    """Bayesian set-of-best analysis of a two-stage SMART.

    Parameters
    ----------
    design : str or SmartDesign, default "design1"
        Builtin kind name, path to a design JSON file, or a SmartDesign.
    alpha : float, default 0.05
        One minus the simultaneous credibility level.
    n_draws : int, default 1000
        Posterior draws per EDTR.
    reference : "auto" or int, default "auto"
        Reference EDTR; "auto" picks the highest posterior mean.
    prior : (float, float), default (1.0, 1.0)
        Beta hyperparameters shared by every sequence and response rate.
    random_state : int or None, default None
        Seed for the posterior draws; None draws one from entropy (kept
        in ``seed_`` so the run can be reproduced).

    Attributes
    ----------
    design_ : SmartDesign used for the fit.
    data_ : TrialData the posteriors were built from.
    seed_ : int, the seed actually used.
    draws_ : DrawMatrix of posterior draws.
    result_ : McbResult with limits and membership.
    posterior_mean_ : dict of exact posterior means per EDTR.
    upper_limits_ : dict of simultaneous upper log-odds limits per
        non-reference EDTR.
    critical_rank_ : int rank that upper limits were read at.
    set_of_best_ : tuple of EDTR ids not credibly worse than the best.
    reference_ : int reference EDTR id.
    """

    def __init__(
        self,
        design="design1",
        alpha: float = 0.05,
        n_draws: int = 1000,
        reference="auto",
        prior=DEFAULT_PRIOR,
        random_state=None,
    ):
        self.design = design
        self.alpha = alpha
        self.n_draws = n_draws
        self.reference = reference
        self.prior = prior
        self.random_state = random_state

    def _resolve_design(self) -> SmartDesign:
        if isinstance(self.design, SmartDesign):
            return self.design
        return load_design(self.design)

    def fit(self, X, y=None):
        """Run the analysis on trial data.

        X is either a TrialData of aggregated counts or subject-level
        rows with columns a1, s, a2, y (a2 NaN where absent).  y is
        ignored; the outcome lives in the rows.
        """
        design = self._resolve_design()
        data = X if isinstance(X, TrialData) else aggregate_subjects(design, X)
        seed = resolve_seed(self.random_state)
        draws = draw_posterior(
            design, data, self.n_draws, seed, reference=self.reference, prior=self.prior
        )
        result = set_of_best(draws, self.alpha)
        self.design_ = design
        self.data_ = data
        self.seed_ = seed
        self.draws_ = draws
        self.result_ = result
        self.posterior_mean_ = posterior_mean_edtr_probs(design, data, self.prior)
        self.upper_limits_ = dict(result.upper_limits)
        self.critical_rank_ = result.critical_rank
        self.set_of_best_ = result.set_of_best
        self.reference_ = result.reference
        return self
