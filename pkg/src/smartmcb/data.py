"""Observed trial data as per-sequence and per-arm counts.

The analysis only needs aggregated counts: binary outcome successes and
totals for every treatment sequence, plus responder counts and enrollment
for every stage-1 arm.  Subject-level rows (columns ``a1, s, a2, y``) can
be aggregated against a design with :func:`aggregate_subjects`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .design import SmartDesign

# column order for subject-level arrays; a2 is NaN when the subject's
# cell was not re-randomized
SUBJECT_COLUMNS = ("a1", "s", "a2", "y")


@dataclass(frozen=True)
class TrialData:
    """Aggregated counts keyed by sequence id and by arm code."""

    successes: dict[int, int]
    totals: dict[int, int]
    responders: dict[int, int]
    enrolled: dict[int, int]

    def validate(self) -> list[str]:
        """Internal count consistency; returns violations (empty means valid)."""
        out: list[str] = []
        for k in sorted(self.totals):
            s = self.successes.get(k)
            t = self.totals[k]
            if s is None:
                out.append(f"sequence {k}: totals given without successes")
                continue
            if not (0 <= s <= t):
                out.append(f"sequence {k}: need 0 <= successes <= total, got {s}/{t}")
        for k in sorted(set(self.successes) - set(self.totals)):
            out.append(f"sequence {k}: successes given without totals")
        for arm in sorted(self.enrolled):
            r = self.responders.get(arm, 0)
            e = self.enrolled[arm]
            if not (0 <= r <= e):
                out.append(f"arm {arm:+d}: need 0 <= responders <= enrolled, got {r}/{e}")
        return out

    def validate_against(self, design: SmartDesign) -> list[str]:
        """Count consistency plus agreement with a design's structure."""
        out = self.validate()
        for k in design.sequence_ids:
            if k not in self.totals:
                out.append(f"sequence {k}: no counts recorded")
        for k in sorted(set(self.totals) - set(design.sequence_ids)):
            out.append(f"sequence {k}: not part of the design")
        for arm in design.arms:
            if arm not in self.enrolled:
                out.append(f"arm {arm:+d}: no enrollment recorded")
        for arm in sorted(set(self.enrolled) - set(design.arms)):
            out.append(f"arm {arm:+d}: not part of the design")
        for arm in design.arms:
            if arm not in self.enrolled:
                continue
            seqs = design.sequences_in_arm(arm)
            if any(s.id not in self.totals for s in seqs):
                continue
            arm_total = sum(self.totals[s.id] for s in seqs)
            if arm_total != self.enrolled[arm]:
                out.append(
                    f"arm {arm:+d}: sequence totals sum to {arm_total} "
                    f"but enrollment is {self.enrolled[arm]}"
                )
            resp_total = sum(self.totals[s.id] for s in seqs if s.responder)
            if resp_total != self.responders.get(arm, 0):
                out.append(
                    f"arm {arm:+d}: responder sequence totals sum to {resp_total} "
                    f"but responder count is {self.responders.get(arm, 0)}"
                )
        return out

    def empty_sequences(self, design: SmartDesign) -> tuple[int, ...]:
        """Design sequences with zero observed subjects."""
        return tuple(k for k in design.sequence_ids if self.totals.get(k, 0) == 0)

    def to_dict(self) -> dict:
        return {
            "sequences": {
                str(k): {"successes": int(self.successes[k]), "total": int(self.totals[k])}
                for k in sorted(self.totals)
            },
            "arms": {
                f"{arm:+d}": {
                    "responders": int(self.responders.get(arm, 0)),
                    "enrolled": int(self.enrolled[arm]),
                }
                for arm in sorted(self.enrolled)
            },
        }

    @staticmethod
    def from_dict(payload: dict) -> "TrialData":
        try:
            sequences = payload["sequences"]
            arms = payload["arms"]
            successes = {int(k): int(v["successes"]) for k, v in sequences.items()}
            totals = {int(k): int(v["total"]) for k, v in sequences.items()}
            responders = {int(a): int(v["responders"]) for a, v in arms.items()}
            enrolled = {int(a): int(v["enrolled"]) for a, v in arms.items()}
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"malformed counts payload: {exc}") from exc
        data = TrialData(successes, totals, responders, enrolled)
        violations = data.validate()
        if violations:
            raise ValueError("invalid counts: " + "; ".join(violations))
        return data


def check_subject_rows(rows) -> np.ndarray:
    """Coerce subject-level rows to a float array of shape (n, 4).

    Columns follow SUBJECT_COLUMNS.  a1 must be -1 or +1, s and y must be
    0 or 1, a2 must be -1, +1 or NaN (absent).
    """
    arr = np.asarray(rows, dtype=float)
    if arr.size == 0:
        return arr.reshape(0, 4)
    if arr.ndim != 2 or arr.shape[1] != 4:
        raise ValueError(f"subject rows must have shape (n, 4) with columns {SUBJECT_COLUMNS}")
    a1, s, a2, y = arr.T
    bad = ~np.isin(a1, (-1.0, 1.0))
    if bad.any():
        raise ValueError(f"row {int(np.argmax(bad))}: a1 must be -1 or +1")
    bad = ~np.isin(s, (0.0, 1.0))
    if bad.any():
        raise ValueError(f"row {int(np.argmax(bad))}: s must be 0 or 1")
    bad = ~(np.isnan(a2) | np.isin(a2, (-1.0, 1.0)))
    if bad.any():
        raise ValueError(f"row {int(np.argmax(bad))}: a2 must be -1, +1 or absent")
    bad = ~np.isin(y, (0.0, 1.0))
    if bad.any():
        raise ValueError(f"row {int(np.argmax(bad))}: y must be 0 or 1")
    return arr


def aggregate_subjects(design: SmartDesign, rows) -> TrialData:
    """Aggregate subject-level rows into TrialData for ``design``.

    Every row must map onto exactly one design sequence, otherwise a
    ValueError identifies the first offending row.
    """
    arr = check_subject_rows(rows)
    a1, s, a2, y = arr.T if arr.size else (np.empty(0),) * 4
    assigned = np.zeros(arr.shape[0], dtype=bool)
    successes: dict[int, int] = {}
    totals: dict[int, int] = {}
    for seq in design.sequences:
        mask = (a1 == seq.arm) & (s == int(seq.responder))
        if seq.stage2 is None:
            mask &= np.isnan(a2)
        else:
            mask &= a2 == seq.stage2
        successes[seq.id] = int(y[mask].sum())
        totals[seq.id] = int(mask.sum())
        assigned |= mask
    if not assigned.all():
        i = int(np.argmin(assigned))
        raise ValueError(
            "row {}: no sequence with a1={:+d}, responder={}, stage2={} in this design".format(
                i, int(a1[i]), int(s[i]), "none" if math.isnan(a2[i]) else f"{int(a2[i]):+d}"
            )
        )
    responders = {arm: int(((a1 == arm) & (s == 1)).sum()) for arm in design.arms}
    enrolled = {arm: int((a1 == arm).sum()) for arm in design.arms}
    return TrialData(successes, totals, responders, enrolled)
