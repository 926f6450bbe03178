"""Conjugate posterior for EDTR response probabilities.

Per-sequence response probabilities and per-arm stage-1 response rates
get independent beta posteriors under independent beta priors (default
uniform).  The response probability of an EDTR follows by averaging its
responder and non-responder sequences:

    theta_edtr = theta_resp * lam + theta_nonresp * (1 - lam)

where ``lam`` is the arm's stage-1 response rate.  Exact posterior
sampling is therefore a matter of drawing each beta coordinate and
combining, no MCMC involved.  Comparisons between EDTRs are done on
log-odds differences against a reference EDTR.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logit as _logit

from .data import TrialData
from .design import SmartDesign

# floor/ceiling applied to probabilities before logit so log-odds stay finite
EPSILON = 1e-12

DEFAULT_PRIOR = (1.0, 1.0)


@dataclass(frozen=True)
class BetaPosterior:
    """Beta(alpha, beta) distribution with both shapes positive."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError(f"beta shapes must be positive, got ({self.alpha}, {self.beta})")

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    @property
    def variance(self) -> float:
        a, b = self.alpha, self.beta
        return a * b / ((a + b) ** 2 * (a + b + 1.0))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.beta(self.alpha, self.beta, size)


def clamp_probability(p):
    """Clip probabilities into [EPSILON, 1 - EPSILON]; shape-preserving."""
    return np.clip(p, EPSILON, 1.0 - EPSILON)


def logit(p):
    """Log-odds of a probability after clamping away 0 and 1."""
    return _logit(clamp_probability(p))


def _check_prior(prior) -> tuple[float, float]:
    a, b = float(prior[0]), float(prior[1])
    if not (a > 0 and b > 0):
        raise ValueError(f"prior hyperparameters must be positive, got ({a}, {b})")
    return a, b


def posterior_theta(data: TrialData, seq_id: int, prior=DEFAULT_PRIOR) -> BetaPosterior:
    """Posterior of one sequence's response probability."""
    a, b = _check_prior(prior)
    if seq_id not in data.totals:
        raise KeyError(f"unknown sequence id {seq_id}")
    s = data.successes[seq_id]
    t = data.totals[seq_id]
    if not (0 <= s <= t):
        raise ValueError(f"sequence {seq_id}: need 0 <= successes <= total, got {s}/{t}")
    return BetaPosterior(a + s, b + (t - s))


def posterior_lambda(data: TrialData, arm: int, prior=DEFAULT_PRIOR) -> BetaPosterior:
    """Posterior of one arm's stage-1 response rate."""
    a, b = _check_prior(prior)
    if arm not in data.enrolled:
        raise KeyError(f"unknown arm {arm}")
    r = data.responders.get(arm, 0)
    e = data.enrolled[arm]
    if not (0 <= r <= e):
        raise ValueError(f"arm {arm:+d}: need 0 <= responders <= enrolled, got {r}/{e}")
    return BetaPosterior(a + r, b + (e - r))


def compute_edtr_prob(theta_resp, theta_nonresp, lam):
    """EDTR response probability from its two sequence probabilities.

    Accepts scalars or arrays (broadcast together).  All inputs must lie
    in [0, 1]; the output is their lam-weighted average and always lands
    between min and max of the two sequence probabilities.
    """
    theta_resp = np.asarray(theta_resp, dtype=float)
    theta_nonresp = np.asarray(theta_nonresp, dtype=float)
    lam = np.asarray(lam, dtype=float)
    for name, v in (("theta_resp", theta_resp), ("theta_nonresp", theta_nonresp), ("lam", lam)):
        if np.any(v < 0.0) or np.any(v > 1.0):
            raise ValueError(f"{name} must lie in [0, 1]")
    out = theta_resp * lam + theta_nonresp * (1.0 - lam)
    return out if out.ndim else float(out)


def posterior_mean_edtr_probs(design: SmartDesign, data: TrialData, prior=DEFAULT_PRIOR) -> dict[int, float]:
    """Exact posterior means of all EDTR response probabilities.

    Posterior independence of the sequence and response-rate coordinates
    makes the mean of the product the product of the means.
    """
    theta_mean = {k: posterior_theta(data, k, prior).mean for k in design.sequence_ids}
    lam_mean = {arm: posterior_lambda(data, arm, prior).mean for arm in design.arms}
    return {
        e.id: compute_edtr_prob(theta_mean[e.responder_seq], theta_mean[e.nonresponder_seq], lam_mean[e.arm])
        for e in design.edtrs
    }


@dataclass(frozen=True)
class DrawMatrix:
    """Monte Carlo draws from the joint posterior of EDTR probabilities.

    theta_edtr has one column per EDTR (ascending id order, all entries
    strictly inside (0, 1)); zeta holds log-odds differences against the
    reference EDTR, one column per non-reference EDTR in ascending id
    order.  The reference column is identically zero and therefore
    omitted.
    """

    theta_edtr: np.ndarray
    zeta: np.ndarray
    reference: int
    seed: object
    edtr_ids: tuple[int, ...]

    @property
    def m_draws(self) -> int:
        return int(self.theta_edtr.shape[0])

    @property
    def nonreference_ids(self) -> tuple[int, ...]:
        return tuple(l for l in self.edtr_ids if l != self.reference)

    def column(self, edtr_id: int) -> np.ndarray:
        """Draws of one EDTR's response probability."""
        return self.theta_edtr[:, self.edtr_ids.index(edtr_id)]

    def zeta_column(self, edtr_id: int) -> np.ndarray:
        """Draws of one non-reference EDTR's log-odds difference."""
        return self.zeta[:, self.nonreference_ids.index(edtr_id)]


def _draw_components(design, data, m_draws, seed, prior):
    """Raw per-sequence and per-arm posterior draws.

    Draw order is fixed (sequences by ascending id, then arms by
    ascending code) so results are reproducible from the seed alone.
    Draws are clamped away from 0 and 1 immediately.
    """
    rng = np.random.default_rng(seed)
    theta = {
        k: clamp_probability(posterior_theta(data, k, prior).sample(rng, m_draws))
        for k in design.sequence_ids
    }
    lam = {
        arm: clamp_probability(posterior_lambda(data, arm, prior).sample(rng, m_draws))
        for arm in design.arms
    }
    return theta, lam


def select_reference(design: SmartDesign, data: TrialData, prior=DEFAULT_PRIOR) -> int:
    """Default reference EDTR: highest posterior-mean response probability.

    Ties resolve to the smallest EDTR id.
    """
    means = posterior_mean_edtr_probs(design, data, prior)
    best = max(means.values())
    return min(l for l, m in means.items() if m == best)


def draw_posterior(
    design: SmartDesign,
    data: TrialData,
    m_draws: int,
    seed,
    reference="auto",
    prior=DEFAULT_PRIOR,
) -> DrawMatrix:
    """Sample the joint posterior of all EDTR response probabilities.

    Parameters
    ----------
    design, data : the trial layout and its aggregated counts.
    m_draws : number of Monte Carlo draws, at least 1.
    seed : anything accepted by numpy.random.default_rng.
    reference : "auto" picks the EDTR with the highest posterior mean
        (ties to the smallest id); an integer forces that EDTR.
    prior : (alpha, beta) hyperparameters shared by every coordinate.
    """
    if int(m_draws) < 1:
        raise ValueError(f"m_draws must be at least 1, got {m_draws}")
    m_draws = int(m_draws)
    violations = data.validate_against(design)
    if violations:
        raise ValueError("data inconsistent with design: " + "; ".join(violations))
    if reference == "auto":
        ref = select_reference(design, data, prior)
    else:
        ref = int(reference)
        if ref not in design.edtr_ids:
            raise ValueError(f"reference EDTR {ref} is not part of the design")

    theta_seq, lam = _draw_components(design, data, m_draws, seed, prior)
    edtr_ids = design.edtr_ids
    theta_edtr = np.column_stack([
        compute_edtr_prob(theta_seq[e.responder_seq], theta_seq[e.nonresponder_seq], lam[e.arm])
        for e in (design.edtr(l) for l in edtr_ids)
    ])
    ref_logit = logit(theta_edtr[:, edtr_ids.index(ref)])
    zeta = np.column_stack([
        logit(theta_edtr[:, edtr_ids.index(l)]) - ref_logit
        for l in edtr_ids if l != ref
    ]) if len(edtr_ids) > 1 else np.empty((m_draws, 0))
    return DrawMatrix(theta_edtr=theta_edtr, zeta=zeta, reference=ref, seed=seed, edtr_ids=edtr_ids)
