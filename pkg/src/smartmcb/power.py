"""Monte Carlo power and sample size planning.

A trial scenario ("truth") assigns every sequence a response probability
and every arm a stage-1 response rate; randomizations are balanced coin
flips.  Power, for a clinically meaningful log-odds gap delta_min, is the
probability that a set-of-best analysis of a simulated trial excludes
every EDTR whose true log-odds shortfall against the true best reaches
delta_min.  Each simulated dataset contributes one indicator; power is
the Monte Carlo mean over datasets.

Seeds are split per (sample size, dataset index) with SeedSequence spawn
keys, so estimates do not depend on evaluation order or on how grid
points are spread over worker processes.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data import TrialData, aggregate_subjects
from .design import SmartDesign
from .mcb import set_of_best
from .posterior import clamp_probability, compute_edtr_prob, draw_posterior, logit

DEFAULT_DATASETS_PER_N = 1000
DEFAULT_DRAWS_PER_DATASET = 1000
# cheaper settings for interactive exploration; noisier but same machinery
DESK_DATASETS_PER_N = 200
DESK_DRAWS_PER_DATASET = 500


@dataclass(frozen=True)
class TruthEta:
    """True generative scenario for a design.

    theta_seq maps sequence id to response probability, lam maps arm code
    to its stage-1 response rate.  Randomization probabilities are fixed
    at one half; the fields exist so the simulator never hides them.
    """

    design: SmartDesign
    theta_seq: dict[int, float]
    lam: dict[int, float]
    rand_prob_stage1: float = 0.5
    rand_prob_stage2: float = 0.5

    def validate(self) -> list[str]:
        """Structural violations: coverage, probability bounds, coin fairness."""
        out: list[str] = []
        for k in self.design.sequence_ids:
            if k not in self.theta_seq:
                out.append(f"sequence {k}: no response probability given")
            elif not (0.0 <= self.theta_seq[k] <= 1.0):
                out.append(f"sequence {k}: response probability {self.theta_seq[k]} outside [0, 1]")
        for k in sorted(set(self.theta_seq) - set(self.design.sequence_ids)):
            out.append(f"sequence {k}: not part of the design")
        for arm in self.design.arms:
            if arm not in self.lam:
                out.append(f"arm {arm:+d}: no stage-1 response rate given")
            elif not (0.0 <= self.lam[arm] <= 1.0):
                out.append(f"arm {arm:+d}: response rate {self.lam[arm]} outside [0, 1]")
        for arm in sorted(set(self.lam) - set(self.design.arms)):
            out.append(f"arm {arm:+d}: not part of the design")
        if self.rand_prob_stage1 != 0.5 or self.rand_prob_stage2 != 0.5:
            out.append("randomization probabilities are fixed at 0.5")
        return out

    def interior_violations(self) -> list[str]:
        """Probabilities sitting on 0 or 1; power analysis refuses these."""
        out = []
        for k in sorted(self.design.sequence_ids):
            p = self.theta_seq.get(k)
            if p is not None and not (0.0 < p < 1.0):
                out.append(f"sequence {k}: response probability {p} outside (0, 1)")
        for arm in self.design.arms:
            p = self.lam.get(arm)
            if p is not None and not (0.0 < p < 1.0):
                out.append(f"arm {arm:+d}: response rate {p} outside (0, 1)")
        return out

    def to_dict(self) -> dict:
        return {
            "theta_seq": {str(k): float(self.theta_seq[k]) for k in sorted(self.theta_seq)},
            "lambda": {f"{arm:+d}": float(self.lam[arm]) for arm in sorted(self.lam)},
        }

    @staticmethod
    def from_dict(design: SmartDesign, payload: dict) -> "TruthEta":
        try:
            theta_seq = {int(k): float(v) for k, v in payload["theta_seq"].items()}
            lam = {int(a): float(v) for a, v in payload["lambda"].items()}
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed truth payload: {exc}") from exc
        eta = TruthEta(design=design, theta_seq=theta_seq, lam=lam)
        violations = eta.validate()
        if violations:
            raise ValueError("invalid truth: " + "; ".join(violations))
        return eta


def _require_valid(eta: TruthEta) -> None:
    violations = eta.validate()
    if violations:
        raise ValueError("invalid truth: " + "; ".join(violations))


def true_edtr_probs(eta: TruthEta) -> dict[int, float]:
    """True response probability of every EDTR under the scenario."""
    _require_valid(eta)
    return {
        e.id: compute_edtr_prob(
            eta.theta_seq[e.responder_seq], eta.theta_seq[e.nonresponder_seq], eta.lam[e.arm]
        )
        for e in eta.design.edtrs
    }


def true_best(eta: TruthEta) -> int:
    """EDTR with the highest true response probability, ties to the smallest id."""
    probs = true_edtr_probs(eta)
    top = max(probs.values())
    return min(l for l, p in probs.items() if p == top)


def true_delta(eta: TruthEta) -> dict[int, float]:
    """Log-odds shortfall of every EDTR against the true best (best maps to 0)."""
    probs = true_edtr_probs(eta)
    best_logit = logit(probs[true_best(eta)])
    return {l: float(best_logit - logit(p)) for l, p in probs.items()}


def inferior_edtrs(eta: TruthEta, delta_min: float) -> tuple[int, ...]:
    """EDTRs whose true shortfall reaches delta_min; these should be excluded."""
    delta = true_delta(eta)
    return tuple(sorted(l for l, d in delta.items() if d >= float(delta_min)))


# -- simulation ----------------------------------------------------------


def simulate_subjects(eta: TruthEta, n: int, seed) -> np.ndarray:
    """Simulate n subject rows (columns a1, s, a2, y) under the scenario.

    Both randomizations are fair coins; a2 is NaN for subjects whose
    (arm, responder-status) cell is not re-randomized.  Deterministic
    given the seed.
    """
    _require_valid(eta)
    n = int(n)
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    design = eta.design
    rng = np.random.default_rng(seed)
    # fixed draw order: arm, response, stage-2, outcome
    u_arm = rng.random(n)
    u_resp = rng.random(n)
    u_stage2 = rng.random(n)
    u_outcome = rng.random(n)

    a1 = np.where(u_arm < eta.rand_prob_stage1, 1.0, -1.0)
    lam_vec = np.where(a1 > 0, eta.lam.get(1, 0.0), eta.lam.get(-1, 0.0))
    s = (u_resp < lam_vec).astype(float)
    a2 = np.full(n, np.nan)
    for arm in design.arms:
        for responder in (True, False):
            if design.rerandomizes(arm, responder):
                cell = (a1 == arm) & (s == int(responder))
                a2[cell] = np.where(u_stage2[cell] < eta.rand_prob_stage2, 1.0, -1.0)
    theta_vec = np.zeros(n)
    for seq in design.sequences:
        mask = (a1 == seq.arm) & (s == int(seq.responder))
        if seq.stage2 is None:
            mask &= np.isnan(a2)
        else:
            mask &= a2 == seq.stage2
        theta_vec[mask] = eta.theta_seq[seq.id]
    y = (u_outcome < theta_vec).astype(float)
    return np.column_stack([a1, s, a2, y])


def simulate_trial(eta: TruthEta, n: int, seed) -> TrialData:
    """Simulate a trial and aggregate it to counts."""
    return aggregate_subjects(eta.design, simulate_subjects(eta, n, seed))


# -- power ---------------------------------------------------------------


@dataclass(frozen=True)
class PowerSpec:
    """Inputs of a power or sample size computation."""

    eta: TruthEta
    alpha: float
    gamma: float
    delta_min: float
    grid: tuple[int, ...]
    datasets_per_n: int = DEFAULT_DATASETS_PER_N
    draws_per_dataset: int = DEFAULT_DRAWS_PER_DATASET
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(int(n) for n in self.grid))

    def validate(self) -> list[str]:
        out = self.eta.validate() + self.eta.interior_violations()
        if not (0.0 < self.alpha < 1.0):
            out.append(f"alpha must lie strictly between 0 and 1, got {self.alpha}")
        if not (0.0 < self.gamma < 1.0):
            out.append(f"gamma must lie strictly between 0 and 1, got {self.gamma}")
        if self.delta_min < 0.0:
            out.append(f"delta_min must be non-negative, got {self.delta_min}")
        if len(self.grid) < 1:
            out.append("grid must contain at least one sample size")
        if any(n < 1 for n in self.grid):
            out.append("grid sample sizes must be positive")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            out.append("grid must be strictly increasing")
        if int(self.datasets_per_n) < 1:
            out.append(f"datasets_per_n must be at least 1, got {self.datasets_per_n}")
        if int(self.draws_per_dataset) < 1:
            out.append(f"draws_per_dataset must be at least 1, got {self.draws_per_dataset}")
        if not isinstance(self.seed, (int, np.integer)) or int(self.seed) < 0:
            out.append(f"seed must be a non-negative integer, got {self.seed!r}")
        return out


@dataclass(frozen=True)
class PowerPoint:
    """Power estimate at one sample size."""

    n: int
    power: float
    se: float


@dataclass(frozen=True)
class PowerCurve:
    """Power across the sample size grid plus the scenario summary."""

    spec: PowerSpec
    points: tuple[PowerPoint, ...]
    delta: dict[int, float]
    inferior_set: tuple[int, ...]
    recommended_n: int | None

    @property
    def target_power(self) -> float:
        return 1.0 - self.spec.gamma


def _check_power_inputs(spec: PowerSpec) -> tuple[int, ...]:
    violations = spec.validate()
    if violations:
        raise ValueError("invalid power spec: " + "; ".join(violations))
    inferior = inferior_edtrs(spec.eta, spec.delta_min)
    best = true_best(spec.eta)
    if best in inferior:
        raise ValueError(
            f"inferior set {inferior} contains the true best EDTR {best}; "
            "delta_min must be positive and the shortfalls consistent"
        )
    return inferior


def _exclusion_indicator(spec: PowerSpec, inferior: tuple[int, ...], n: int, i: int) -> bool:
    """One simulated trial: does the analysis exclude every truly inferior EDTR?"""
    sim_seed = np.random.SeedSequence(spec.seed, spawn_key=(n, i, 0))
    draw_seed = np.random.SeedSequence(spec.seed, spawn_key=(n, i, 1))
    data = simulate_trial(spec.eta, n, sim_seed)
    draws = draw_posterior(
        spec.eta.design, data, spec.draws_per_dataset, draw_seed, reference="auto"
    )
    result = set_of_best(draws, spec.alpha)
    return not set(inferior) & set(result.set_of_best)


def estimate_power(spec: PowerSpec, n: int) -> PowerPoint:
    """Monte Carlo power at one sample size.

    With an empty inferior set there is nothing to exclude and the power
    is exactly one, no simulation needed.
    """
    inferior = _check_power_inputs(spec)
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if not inferior:
        return PowerPoint(n=n, power=1.0, se=0.0)
    reps = int(spec.datasets_per_n)
    hits = sum(
        _exclusion_indicator(spec, inferior, n, i) for i in range(reps)
    )
    p = hits / reps
    se = float(np.sqrt(p * (1.0 - p) / reps))
    return PowerPoint(n=n, power=float(p), se=se)


def _estimate_power_task(args) -> PowerPoint:
    spec, n = args
    return estimate_power(spec, n)


def sample_size_search(spec: PowerSpec, threads: int = 1) -> PowerCurve:
    """Power over the whole grid and the smallest n meeting 1 - gamma.

    threads > 1 spreads grid points over worker processes; the seed
    scheme keys every dataset by (n, index), so results are identical
    for any thread count.
    """
    inferior = _check_power_inputs(spec)
    threads = int(threads)
    if threads < 1:
        raise ValueError(f"threads must be at least 1, got {threads}")
    if threads == 1 or len(spec.grid) == 1 or not inferior:
        points = tuple(estimate_power(spec, n) for n in spec.grid)
    else:
        with ProcessPoolExecutor(max_workers=min(threads, len(spec.grid))) as pool:
            points = tuple(pool.map(_estimate_power_task, [(spec, n) for n in spec.grid]))
    recommended = next(
        (pt.n for pt in points if pt.power >= 1.0 - spec.gamma), None
    )
    return PowerCurve(
        spec=spec,
        points=points,
        delta=true_delta(spec.eta),
        inferior_set=inferior,
        recommended_n=recommended,
    )
