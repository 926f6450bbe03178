"""File formats: subject CSV, aggregated-counts JSON, truth files, power
configs, and the report payloads emitted by the command line tools.

Subject-level CSV carries one row per subject with header ``a1,s,a2,y``
(any column order, no extras).  ``a1`` is -1 or +1, ``s`` and ``y`` are
0 or 1, and ``a2`` is -1, +1 or empty for subjects whose cell was not
re-randomized.  Errors cite physical line numbers, the header being
line 1.
"""

from __future__ import annotations

import csv
import json
import math

import numpy as np

from .data import SUBJECT_COLUMNS, TrialData
from .design import SmartDesign
from .mcb import McbResult
from .posterior import DrawMatrix
from .power import PowerCurve, PowerSpec, TruthEta


class DataFormatError(ValueError):
    """Malformed input file; the message carries file and line context."""


# -- subject CSV ----------------------------------------------------------


def _parse_field(raw: str, allowed: dict[str, object], line: int, name: str, source: str):
    value = raw.strip()
    if value in allowed:
        return allowed[value]
    expected = "/".join(sorted(k for k in allowed if k)) or "empty"
    raise DataFormatError(f"{source}, line {line}: {name} must be {expected}, got {raw!r}")


_A1_VALUES = {"-1": -1, "1": 1, "+1": 1}
_BIN_VALUES = {"0": 0, "1": 1}
_A2_VALUES = {"-1": -1, "1": 1, "+1": 1, "": None}


def read_subject_csv(path: str, design: SmartDesign) -> TrialData:
    """Parse and aggregate a subject-level CSV against ``design``.

    Every row must map to a design sequence; the first offense raises a
    DataFormatError naming the line.
    """
    successes = {k: 0 for k in design.sequence_ids}
    totals = {k: 0 for k in design.sequence_ids}
    responders = {arm: 0 for arm in design.arms}
    enrolled = {arm: 0 for arm in design.arms}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}, line 1: missing header row") from None
        cols = [c.strip() for c in header]
        if sorted(cols) != sorted(SUBJECT_COLUMNS):
            raise DataFormatError(
                f"{path}, line 1: header must contain exactly the columns "
                f"{','.join(SUBJECT_COLUMNS)}, got {','.join(cols)}"
            )
        idx = {name: cols.index(name) for name in SUBJECT_COLUMNS}
        for row in reader:
            line = reader.line_num
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(cols):
                raise DataFormatError(
                    f"{path}, line {line}: expected {len(cols)} fields, got {len(row)}"
                )
            a1 = _parse_field(row[idx["a1"]], _A1_VALUES, line, "a1", path)
            s = _parse_field(row[idx["s"]], _BIN_VALUES, line, "s", path)
            a2 = _parse_field(row[idx["a2"]], _A2_VALUES, line, "a2", path)
            y = _parse_field(row[idx["y"]], _BIN_VALUES, line, "y", path)
            try:
                seq = design.sequence_of(a1, s == 1, a2)
            except ValueError as exc:
                raise DataFormatError(f"{path}, line {line}: {exc}") from None
            totals[seq] += 1
            successes[seq] += y
            enrolled[a1] += 1
            responders[a1] += s
    return TrialData(successes, totals, responders, enrolled)


def subject_csv_text(rows: np.ndarray) -> str:
    """Subject rows as CSV text (columns a1,s,a2,y, a2 blank where absent)."""
    arr = np.asarray(rows, dtype=float).reshape(-1, 4)
    lines = [",".join(SUBJECT_COLUMNS)]
    for a1, s, a2, y in arr:
        a2_txt = "" if math.isnan(a2) else str(int(a2))
        lines.append(f"{int(a1)},{int(s)},{a2_txt},{int(y)}")
    return "\n".join(lines) + "\n"


def write_subject_csv(path: str, rows: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(subject_csv_text(rows))


# -- JSON inputs ----------------------------------------------------------


def _load_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}, line {exc.lineno}: not valid JSON ({exc.msg})") from exc


def read_counts_json(path: str) -> TrialData:
    payload = _load_json(path)
    try:
        return TrialData.from_dict(payload)
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def read_trial_data(path: str, design: SmartDesign, fmt: str = "auto") -> TrialData:
    """Load trial data from subject CSV or aggregated-counts JSON."""
    if fmt == "auto":
        fmt = "counts" if str(path).lower().endswith(".json") else "csv"
    if fmt == "csv":
        return read_subject_csv(path, design)
    if fmt == "counts":
        return read_counts_json(path)
    raise ValueError(f"unknown data format {fmt!r}, expected csv or counts")


def read_truth(path: str, design: SmartDesign) -> TruthEta:
    payload = _load_json(path)
    try:
        return TruthEta.from_dict(design, payload)
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc


def _grid_from_config(raw) -> tuple[int, ...]:
    if isinstance(raw, dict):
        try:
            start, stop, step = int(raw["start"]), int(raw["stop"]), int(raw.get("step", 1))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"grid object needs integer start/stop/step: {exc}") from exc
        if step < 1:
            raise ValueError("grid step must be positive")
        return tuple(range(start, stop + 1, step))
    if isinstance(raw, (list, tuple)):
        return tuple(int(n) for n in raw)
    raise ValueError("grid must be a list of sample sizes or {start, stop, step}")


def read_power_config(path: str) -> dict:
    """Load a power/samplesize config file as a raw payload.

    The config carries: design (builtin kind or inline design object),
    eta (inline truth object) or eta_file (path), alpha, gamma,
    delta_min, grid, and optionally datasets_per_n, draws_per_dataset,
    seed.
    """
    payload = _load_json(path)
    if not isinstance(payload, dict):
        raise DataFormatError(f"{path}: config must be a JSON object")
    return payload


def power_spec_from_config(
    payload: dict, source: str, seed: int, design_override: str | None = None
) -> PowerSpec:
    """Build a validated PowerSpec from a config payload and resolved seed."""
    try:
        if design_override is not None:
            from .design import load_design

            design = load_design(design_override)
        else:
            raw_design = payload["design"]
            design = (
                SmartDesign.from_dict(raw_design)
                if isinstance(raw_design, dict)
                else SmartDesign.from_dict({"kind": raw_design})
            )
        if "eta" in payload:
            eta = TruthEta.from_dict(design, payload["eta"])
        elif "eta_file" in payload:
            eta = read_truth(payload["eta_file"], design)
        else:
            raise ValueError("config needs an 'eta' object or an 'eta_file' path")
        spec = PowerSpec(
            eta=eta,
            alpha=float(payload["alpha"]),
            gamma=float(payload["gamma"]),
            delta_min=float(payload["delta_min"]),
            grid=_grid_from_config(payload["grid"]),
            datasets_per_n=int(payload.get("datasets_per_n", 1000)),
            draws_per_dataset=int(payload.get("draws_per_dataset", 1000)),
            seed=int(seed),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"{source}: {exc}") from exc
    violations = spec.validate()
    if violations:
        raise DataFormatError(f"{source}: invalid power spec: " + "; ".join(violations))
    return spec


# -- reports --------------------------------------------------------------


def analyze_report(
    design: SmartDesign,
    data: TrialData,
    draws: DrawMatrix,
    result: McbResult,
    posterior_means: dict[int, float],
    seed,
    prior,
    warnings: list[str],
) -> dict:
    """Full analysis report; embeds every run parameter needed to rerun."""
    return {
        "command": "analyze",
        "design": design.kind,
        "alpha": result.alpha,
        "draws": draws.m_draws,
        "seed": seed,
        "prior": [float(prior[0]), float(prior[1])],
        "reference": result.reference,
        "critical_rank": result.critical_rank,
        "set_of_best": list(result.set_of_best),
        "edtrs": [
            {
                "id": l,
                "posterior_mean": float(posterior_means[l]),
                "upper_limit": None if l == result.reference else result.upper_limits[l],
                "in_set_of_best": l in result.set_of_best,
            }
            for l in design.edtr_ids
        ],
        "data": data.to_dict(),
        "warnings": list(warnings),
    }


def analyze_csv_lines(report: dict) -> list[str]:
    """Tabular view of an analysis: one row per EDTR, 'ref' marks the reference."""
    lines = ["id,posterior_mean,upper_limit,in_set_of_best"]
    for row in report["edtrs"]:
        upper = "ref" if row["upper_limit"] is None else repr(row["upper_limit"])
        lines.append(
            f"{row['id']},{row['posterior_mean']!r},{upper},{str(row['in_set_of_best']).lower()}"
        )
    return lines


def power_report(curve: PowerCurve, command: str) -> dict:
    spec = curve.spec
    return {
        "command": command,
        "design": spec.eta.design.kind,
        "alpha": spec.alpha,
        "gamma": spec.gamma,
        "delta_min": spec.delta_min,
        "target_power": curve.target_power,
        "datasets_per_n": spec.datasets_per_n,
        "draws_per_dataset": spec.draws_per_dataset,
        "seed": spec.seed,
        "eta": spec.eta.to_dict(),
        "delta": {str(l): float(curve.delta[l]) for l in sorted(curve.delta)},
        "inferior_set": list(curve.inferior_set),
        "recommended_n": curve.recommended_n,
        "curve": [
            {
                "n": pt.n,
                "power": pt.power,
                "se": pt.se,
                "recommended": pt.n == curve.recommended_n,
            }
            for pt in curve.points
        ],
    }


def curve_csv_lines(curve: PowerCurve) -> list[str]:
    lines = ["n,power,se,recommended"]
    for pt in curve.points:
        flag = str(pt.n == curve.recommended_n).lower()
        lines.append(f"{pt.n},{pt.power!r},{pt.se!r},{flag}")
    return lines


def run_parameters_text(report: dict) -> str:
    """One-line reproducibility summary shown whenever the main output is CSV."""
    keys = ("design", "seed", "draws", "draws_per_dataset", "datasets_per_n",
            "alpha", "gamma", "delta_min")
    parts = [f"{k}={report[k]}" for k in keys if k in report]
    return f"run parameters: {' '.join(parts)}"


def dump_json(payload: dict) -> str:
    return json.dumps(payload, indent=2) + "\n"
