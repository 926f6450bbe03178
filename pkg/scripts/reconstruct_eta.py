#!/usr/bin/env python3
"""Derive the truth scenarios shipped in smartmcb.presets.

Each shipped scenario is pinned by published summary targets: either a
vector of log-odds shortfalls against the best EDTR (design1, general) or
the EDTR response probabilities themselves (engage).  Those targets do
not identify a full scenario, so the remaining freedom is pinned by
explicit anchors:

* stage-1 response rates are fixed per arm,
* responder-sequence probabilities are pulled toward an anchor (the mean
  of the arm's target EDTR probabilities unless stated otherwise),
* for design1 the overall level is pinned by anchoring the best EDTR's
  probability; for general the level is forced by the within-arm
  constraint theta(1) - theta(2) - theta(3) + theta(4) = 0, which a
  shared log-odds level can only satisfy near one point.

Solving is a small least-squares problem in the logit of the sequence
probabilities.  Shortfall targets are matched to well under +/-0.01; for
general the two arm constraints cannot both hold exactly at one level,
and the tiny slack is spread across coordinates by the least squares.

The engage anchors (response rates 0.35, responder anchors 0.65/0.53)
were calibrated by a grid search so that Monte Carlo power at n=148 with
delta_min=0.5 lands near 0.57 and the 80%/90% sample size
recommendations land near 250/350; see smartmcb.presets for the frozen
result.

Run with --json to print the scenarios machine-readably; the default
output is human-oriented and includes the achieved targets.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np
from scipy.optimize import least_squares
from scipy.special import expit, logit

from smartmcb import SmartDesign, TruthEta, builtin_design, true_delta, true_edtr_probs
from smartmcb.presets import (
    DESIGN1_DELTA_TARGET,
    ENGAGE_EDTR_PROB_TARGET,
    GENERAL_DELTA_TARGET,
    TARGET_TOLERANCE,
)

ROUND_DECIMALS = 6


def _edtr_probs_from_z(design: SmartDesign, z: np.ndarray, lam: dict[int, float]) -> dict[int, float]:
    theta = dict(zip(design.sequence_ids, expit(z)))
    return {
        e.id: theta[e.responder_seq] * lam[e.arm] + theta[e.nonresponder_seq] * (1.0 - lam[e.arm])
        for e in design.edtrs
    }


def _responder_anchors(design: SmartDesign, edtr_prob_anchor: dict[int, float]) -> dict[int, float]:
    """Anchor each arm's responder sequences at the arm's mean target probability."""
    return {
        arm: float(np.mean([edtr_prob_anchor[e.id] for e in design.edtrs if e.arm == arm]))
        for arm in design.arms
    }


def _solve(design, lam, residual_fn) -> TruthEta:
    z0 = np.zeros(design.n_sequences)
    fit = least_squares(residual_fn, z0, method="lm", xtol=1e-14, ftol=1e-14)
    theta = {
        k: round(float(p), ROUND_DECIMALS)
        for k, p in zip(design.sequence_ids, expit(fit.x))
    }
    eta = TruthEta(design=design, theta_seq=theta, lam=dict(lam))
    bad = eta.validate() + eta.interior_violations()
    if bad:
        raise RuntimeError("solver left the feasible region: " + "; ".join(bad))
    return eta


def solve_from_gaps(
    design: SmartDesign,
    delta_target: dict[int, float],
    lam: dict[int, float],
    level_anchor: float,
    level_weight: float,
    pin_weight: float,
) -> TruthEta:
    """Scenario whose log-odds shortfalls match delta_target.

    The best EDTR is the one with target shortfall zero.  level_anchor
    pins its probability (hard for design1, as a soft hint when the
    design itself forces the level).
    """
    best = min(l for l, d in delta_target.items() if d == min(delta_target.values()))
    prob_anchor = {l: expit(logit(level_anchor) - d) for l, d in delta_target.items()}
    resp_anchor = _responder_anchors(design, prob_anchor)
    seq_ids = design.sequence_ids
    resp_idx = [
        (seq_ids.index(s.id), logit(resp_anchor[s.arm]))
        for s in design.sequences
        if s.responder
    ]

    def residuals(z):
        probs = _edtr_probs_from_z(design, z, lam)
        x_best = logit(probs[best])
        out = [x_best - logit(probs[l]) - delta_target[l] for l in sorted(probs) if l != best]
        out.append(level_weight * (x_best - logit(level_anchor)))
        out.extend(pin_weight * (z[i] - anchor) for i, anchor in resp_idx)
        return np.asarray(out)

    return _solve(design, lam, residuals)


def solve_from_probs(
    design: SmartDesign,
    prob_target: dict[int, float],
    lam: dict[int, float],
    resp_anchor: dict[int, float],
) -> TruthEta:
    """Scenario whose EDTR response probabilities match prob_target."""
    seq_ids = design.sequence_ids
    resp_idx = [
        (seq_ids.index(s.id), logit(resp_anchor[s.arm]))
        for s in design.sequences
        if s.responder
    ]

    def residuals(z):
        probs = _edtr_probs_from_z(design, z, lam)
        out = [logit(probs[l]) - logit(prob_target[l]) for l in sorted(probs)]
        out.extend(z[i] - anchor for i, anchor in resp_idx)
        return np.asarray(out)

    return _solve(design, lam, residuals)


def reconstruct_all() -> dict[str, TruthEta]:
    design1 = builtin_design("design1")
    general = builtin_design("general")
    return {
        # level 0.65 keeps every cell probability well inside (0, 1) at the
        # trial sizes of interest; response rate 0.4 leaves non-responder
        # cells large enough to carry the comparisons
        "design1": solve_from_gaps(
            design1,
            DESIGN1_DELTA_TARGET,
            lam={1: 0.4, -1: 0.4},
            level_anchor=0.65,
            level_weight=1.0,
            pin_weight=1.0,
        ),
        # the level is forced by the within-arm constraints, so the anchor
        # only seeds the search
        "general": solve_from_gaps(
            general,
            GENERAL_DELTA_TARGET,
            lam={1: 0.5, -1: 0.5},
            level_anchor=0.79,
            level_weight=0.001,
            pin_weight=0.01,
        ),
        "engage": solve_from_probs(
            design1,
            ENGAGE_EDTR_PROB_TARGET,
            lam={1: 0.35, -1: 0.35},
            resp_anchor={1: 0.65, -1: 0.53},
        ),
    }


def verify(name: str, eta: TruthEta) -> list[str]:
    lines = []
    if name == "engage":
        achieved = true_edtr_probs(eta)
        target = ENGAGE_EDTR_PROB_TARGET
        label = "edtr prob"
    else:
        achieved = true_delta(eta)
        target = DESIGN1_DELTA_TARGET if name == "design1" else GENERAL_DELTA_TARGET
        label = "shortfall"
    worst = max(abs(achieved[l] - target[l]) for l in target)
    for l in sorted(target):
        lines.append(
            f"  edtr {l}: {label} target {target[l]:.4f} achieved {achieved[l]:.4f}"
        )
    lines.append(f"  worst deviation {worst:.2e} (tolerance {TARGET_TOLERANCE})")
    if worst > TARGET_TOLERANCE:
        raise RuntimeError(f"{name}: achieved targets deviate by {worst}")
    return lines


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--json", action="store_true", help="print scenarios as JSON only")
    args = parser.parse_args(argv)
    etas = reconstruct_all()
    if args.json:
        payload = {name: eta.to_dict() for name, eta in etas.items()}
        json.dump(payload, sys.stdout, indent=2)
        sys.stdout.write("\n")
        for name, eta in etas.items():
            verify(name, eta)
        return 0
    for name, eta in etas.items():
        print(f"{name}:")
        print(f"  theta_seq = {eta.theta_seq}")
        print(f"  lam = {eta.lam}")
        for line in verify(name, eta):
            print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
