"""Two-stage SMART design descriptions.

A design enumerates the treatment sequences a trial can realize and the
embedded dynamic treatment regimes (EDTRs) built from them.  A sequence is
a path through the trial: stage-1 arm, end-of-stage-1 responder status,
and (when that cell is re-randomized) a stage-2 assignment.  An EDTR is a
decision rule that starts everyone in one arm, sends responders down one
sequence of that arm and non-responders down another.

Two standard layouts ship as builtins:

``design1``
    Responders to either arm continue on their stage-1 treatment and are
    not re-randomized; non-responders are re-randomized between two
    stage-2 options.  6 sequences, 4 EDTRs.

``general``
    Everyone is re-randomized at stage 2, responders included.
    8 sequences, 8 EDTRs.

Arbitrary layouts can be loaded from a JSON file (kind ``custom``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from functools import cached_property

ARM_PLUS = 1
ARM_MINUS = -1
ARMS = (ARM_MINUS, ARM_PLUS)

DESIGN1 = "design1"
GENERAL = "general"
CUSTOM = "custom"
BUILTIN_KINDS = (DESIGN1, GENERAL)


@dataclass(frozen=True)
class TreatmentSequence:
    """One realizable path through the trial.

    Parameters
    ----------
    id : int
        Sequence index, 1-based and consecutive within a design.
    arm : int
        Stage-1 assignment, +1 or -1.
    responder : bool
        End-of-stage-1 responder status on this path.
    stage2 : int or None
        Stage-2 assignment (+1 or -1) when this cell is re-randomized,
        None when subjects in this cell simply continue.
    """

    id: int
    arm: int
    responder: bool
    stage2: int | None = None


@dataclass(frozen=True)
class EmbeddedDtr:
    """Decision rule: start on ``arm``, follow ``responder_seq`` on
    response and ``nonresponder_seq`` otherwise."""

    id: int
    arm: int
    responder_seq: int
    nonresponder_seq: int


def _fmt_stage2(stage2: int | None) -> str:
    return "none" if stage2 is None else f"{stage2:+d}"


@dataclass(frozen=True)
class SmartDesign:
    """Immutable SMART layout: sequences plus the EDTRs built on them."""

    kind: str
    sequences: tuple[TreatmentSequence, ...]
    edtrs: tuple[EmbeddedDtr, ...]

    def __post_init__(self):
        object.__setattr__(self, "sequences", tuple(self.sequences))
        object.__setattr__(self, "edtrs", tuple(self.edtrs))

    # -- lookups --------------------------------------------------------

    @cached_property
    def _seq_by_id(self) -> dict[int, TreatmentSequence]:
        return {s.id: s for s in self.sequences}

    @cached_property
    def _edtr_by_id(self) -> dict[int, EmbeddedDtr]:
        return {e.id: e for e in self.edtrs}

    @cached_property
    def _seq_by_path(self) -> dict[tuple[int, bool, int | None], int]:
        return {(s.arm, s.responder, s.stage2): s.id for s in self.sequences}

    @property
    def n_sequences(self) -> int:
        return len(self.sequences)

    @property
    def n_edtrs(self) -> int:
        return len(self.edtrs)

    @property
    def sequence_ids(self) -> tuple[int, ...]:
        return tuple(sorted(self._seq_by_id))

    @property
    def edtr_ids(self) -> tuple[int, ...]:
        return tuple(sorted(self._edtr_by_id))

    @property
    def arms(self) -> tuple[int, ...]:
        return tuple(sorted({s.arm for s in self.sequences}))

    def sequence(self, seq_id: int) -> TreatmentSequence:
        try:
            return self._seq_by_id[seq_id]
        except KeyError:
            raise KeyError(f"unknown sequence id {seq_id}") from None

    def edtr(self, edtr_id: int) -> EmbeddedDtr:
        try:
            return self._edtr_by_id[edtr_id]
        except KeyError:
            raise KeyError(f"unknown EDTR id {edtr_id}") from None

    def sequences_in_arm(self, arm: int) -> tuple[TreatmentSequence, ...]:
        return tuple(s for s in self.sequences if s.arm == arm)

    def sequence_of(self, a1: int, responder: bool, stage2: int | None = None) -> int:
        """Map a realized (a1, s, a2) path to its sequence id.

        Raises ValueError when the design has no such path, e.g. a
        stage-2 assignment supplied for a cell that is not re-randomized.
        """
        key = (int(a1), bool(responder), None if stage2 is None else int(stage2))
        try:
            return self._seq_by_path[key]
        except KeyError:
            raise ValueError(
                "no such sequence: a1={:+d}, responder={}, stage2={}".format(
                    key[0], int(key[1]), _fmt_stage2(key[2])
                )
            ) from None

    def rerandomizes(self, arm: int, responder: bool) -> bool:
        """Whether the (arm, responder-status) cell gets a stage-2 randomization."""
        stages = {s.stage2 for s in self.sequences if s.arm == arm and s.responder == responder}
        if not stages:
            raise ValueError(f"design has no sequences with arm={arm:+d}, responder={int(responder)}")
        return None not in stages

    # -- validation -----------------------------------------------------

    def validate(self) -> list[str]:
        """Check structural invariants; returns a list of violations (empty means valid)."""
        out: list[str] = []
        k = self.n_sequences
        ids = [s.id for s in self.sequences]
        if sorted(ids) != list(range(1, k + 1)):
            out.append(f"sequence ids must be 1..{k} without gaps, got {sorted(ids)}")
        arms_seen = {s.arm for s in self.sequences}
        if not arms_seen <= set(ARMS):
            out.append(f"arm codes must be in {{-1, +1}}, got {sorted(arms_seen)}")
        if arms_seen != set(ARMS):
            out.append("design must use both stage-1 arms")
        paths: dict[tuple, int] = {}
        for s in self.sequences:
            if s.stage2 is not None and s.stage2 not in ARMS:
                out.append(f"sequence {s.id}: stage2 must be -1, +1 or absent")
            key = (s.arm, s.responder, s.stage2)
            if key in paths:
                out.append(
                    f"duplicate sequence: ids {paths[key]} and {s.id} share "
                    f"a1={s.arm:+d}, responder={int(s.responder)}, stage2={_fmt_stage2(s.stage2)}"
                )
            else:
                paths[key] = s.id
        # each re-randomized cell needs both stage-2 options, otherwise some
        # realized paths would have no sequence to land in
        for arm in sorted(arms_seen & set(ARMS)):
            for responder in (True, False):
                stages = {s.stage2 for s in self.sequences if s.arm == arm and s.responder == responder}
                if not stages:
                    out.append(f"arm {arm:+d} has no sequence for responder={int(responder)}")
                elif stages != {None} and stages != {ARM_MINUS, ARM_PLUS}:
                    out.append(
                        f"ambiguous cell: arm {arm:+d}, responder={int(responder)} must either "
                        "continue (single sequence, no stage2) or re-randomize to both -1 and +1"
                    )

        n_edtr = self.n_edtrs
        edtr_ids = [e.id for e in self.edtrs]
        if sorted(edtr_ids) != list(range(1, n_edtr + 1)):
            out.append(f"EDTR ids must be 1..{n_edtr} without gaps, got {sorted(edtr_ids)}")
        seq_ids = set(ids)
        pairs: dict[tuple[int, int], int] = {}
        for e in self.edtrs:
            for label, ref in (("responder_seq", e.responder_seq), ("nonresponder_seq", e.nonresponder_seq)):
                if ref not in seq_ids:
                    out.append(f"EDTR {e.id}: dangling sequence reference {label}={ref}")
            if e.responder_seq in seq_ids:
                rs = self._first_seq(e.responder_seq)
                if not rs.responder:
                    out.append(f"EDTR {e.id}: responder_seq {e.responder_seq} is not a responder sequence")
                if rs.arm != e.arm:
                    out.append(f"EDTR {e.id}: responder_seq {e.responder_seq} belongs to arm {rs.arm:+d}, not {e.arm:+d}")
            if e.nonresponder_seq in seq_ids:
                ns = self._first_seq(e.nonresponder_seq)
                if ns.responder:
                    out.append(f"EDTR {e.id}: nonresponder_seq {e.nonresponder_seq} is not a non-responder sequence")
                if ns.arm != e.arm:
                    out.append(f"EDTR {e.id}: nonresponder_seq {e.nonresponder_seq} belongs to arm {ns.arm:+d}, not {e.arm:+d}")
            pair = (e.responder_seq, e.nonresponder_seq)
            if pair in pairs:
                out.append(f"duplicate EDTR: ids {pairs[pair]} and {e.id} pair the same sequences")
            else:
                pairs[pair] = e.id
        referenced_nr = {e.nonresponder_seq for e in self.edtrs}
        for s in self.sequences:
            if not s.responder and s.id not in referenced_nr:
                out.append(f"non-responder sequence {s.id} is not referenced by any EDTR")
        return out

    def _first_seq(self, seq_id: int) -> TreatmentSequence:
        # like sequence() but safe while ids may still be duplicated
        for s in self.sequences:
            if s.id == seq_id:
                return s
        raise KeyError(seq_id)

    # -- serialization --------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "sequences": [asdict(s) for s in self.sequences],
            "edtrs": [asdict(e) for e in self.edtrs],
        }

    @staticmethod
    def from_dict(payload: dict) -> "SmartDesign":
        if not isinstance(payload, dict) or "kind" not in payload:
            raise ValueError("design payload must be an object with a 'kind' field")
        kind = str(payload["kind"]).lower()
        if kind in BUILTIN_KINDS and "sequences" not in payload:
            return builtin_design(kind)
        try:
            sequences = tuple(
                TreatmentSequence(
                    id=int(s["id"]),
                    arm=int(s["arm"]),
                    responder=bool(s["responder"]),
                    stage2=None if s.get("stage2") is None else int(s["stage2"]),
                )
                for s in payload["sequences"]
            )
            edtrs = tuple(
                EmbeddedDtr(
                    id=int(e["id"]),
                    arm=int(e["arm"]),
                    responder_seq=int(e["responder_seq"]),
                    nonresponder_seq=int(e["nonresponder_seq"]),
                )
                for e in payload["edtrs"]
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed design payload: {exc}") from exc
        design = SmartDesign(kind=kind, sequences=sequences, edtrs=edtrs)
        violations = design.validate()
        if violations:
            raise ValueError("invalid design: " + "; ".join(violations))
        return design


def builtin_design(kind: str) -> SmartDesign:
    """Return one of the shipped layouts, ``design1`` or ``general``."""
    norm = str(kind).lower()
    if norm == DESIGN1:
        sequences = (
            TreatmentSequence(1, ARM_PLUS, True, None),
            TreatmentSequence(2, ARM_PLUS, False, ARM_PLUS),
            TreatmentSequence(3, ARM_PLUS, False, ARM_MINUS),
            TreatmentSequence(4, ARM_MINUS, True, None),
            TreatmentSequence(5, ARM_MINUS, False, ARM_PLUS),
            TreatmentSequence(6, ARM_MINUS, False, ARM_MINUS),
        )
        edtrs = (
            EmbeddedDtr(1, ARM_PLUS, 1, 2),
            EmbeddedDtr(2, ARM_PLUS, 1, 3),
            EmbeddedDtr(3, ARM_MINUS, 4, 5),
            EmbeddedDtr(4, ARM_MINUS, 4, 6),
        )
        return SmartDesign(DESIGN1, sequences, edtrs)
    if norm == GENERAL:
        sequences = (
            TreatmentSequence(1, ARM_PLUS, True, ARM_PLUS),
            TreatmentSequence(2, ARM_PLUS, True, ARM_MINUS),
            TreatmentSequence(3, ARM_PLUS, False, ARM_PLUS),
            TreatmentSequence(4, ARM_PLUS, False, ARM_MINUS),
            TreatmentSequence(5, ARM_MINUS, True, ARM_PLUS),
            TreatmentSequence(6, ARM_MINUS, True, ARM_MINUS),
            TreatmentSequence(7, ARM_MINUS, False, ARM_PLUS),
            TreatmentSequence(8, ARM_MINUS, False, ARM_MINUS),
        )
        edtrs = (
            EmbeddedDtr(1, ARM_PLUS, 1, 3),
            EmbeddedDtr(2, ARM_PLUS, 1, 4),
            EmbeddedDtr(3, ARM_PLUS, 2, 3),
            EmbeddedDtr(4, ARM_PLUS, 2, 4),
            EmbeddedDtr(5, ARM_MINUS, 5, 7),
            EmbeddedDtr(6, ARM_MINUS, 5, 8),
            EmbeddedDtr(7, ARM_MINUS, 6, 7),
            EmbeddedDtr(8, ARM_MINUS, 6, 8),
        )
        return SmartDesign(GENERAL, sequences, edtrs)
    raise ValueError(f"unknown builtin design kind {kind!r}, expected one of {BUILTIN_KINDS}")


def load_design(source: str) -> SmartDesign:
    """Resolve a CLI-style design reference: builtin kind name or JSON file path."""
    if str(source).lower() in BUILTIN_KINDS:
        return builtin_design(source)
    with open(source, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{source}: not valid JSON ({exc})") from exc
    return SmartDesign.from_dict(payload)
