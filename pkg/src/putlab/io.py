"""File formats: pmf/mechanism/solution JSON and sample/curve CSV."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from .bounds import HolderSpec
from .prob import Alphabet, JointPmf, Mechanism, SampleSet
from .solver import CurvePoint, PutSolution, RobustSolution


def dumps(obj) -> str:
    # allow_nan=False: unbounded quantities are written as null, never Infinity
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def pmf_to_dict(p: JointPmf) -> dict:
    return {
        "s_labels": list(p.rows.labels),
        "x_labels": list(p.cols.labels),
        "pmf": p.p.tolist(),
    }


def pmf_from_dict(d: dict) -> JointPmf:
    try:
        return JointPmf(Alphabet(d["s_labels"]), Alphabet(d["x_labels"]), d["pmf"])
    except KeyError as e:
        raise ValueError(f"pmf JSON is missing field {e}") from None


def load_pmf(path) -> JointPmf:
    return pmf_from_dict(read_json(path))


def mechanism_to_dict(m: Mechanism) -> dict:
    return {
        "x_labels": list(m.inputs.labels),
        "y_labels": list(m.outputs.labels),
        "mechanism": m.rows.tolist(),
    }


def mechanism_from_dict(d: dict) -> Mechanism:
    # solution files nest the mechanism one level down
    if isinstance(d.get("mechanism"), dict):
        d = d["mechanism"]
    try:
        return Mechanism(Alphabet(d["x_labels"]), Alphabet(d["y_labels"]), d["mechanism"])
    except KeyError as e:
        raise ValueError(f"mechanism JSON is missing field {e}") from None


def load_mechanism(path) -> Mechanism:
    return mechanism_from_dict(read_json(path))


def _finite_or_none(v: float):
    return v if math.isfinite(v) else None


def holder_to_dict(h: HolderSpec) -> dict:
    return {
        "r0": _finite_or_none(h.r0),
        "alpha": h.alpha,
        "c_l": h.c_l,
        "c_u": h.c_u,
        "certified": h.certified,
    }


def solution_to_dict(s: PutSolution) -> dict:
    return {
        "eps": s.eps,
        "utility_value": s.utility_value,
        "leakage_value": s.leakage_value,
        "method": s.method,
        "feasible": s.feasible,
        "certificate": s.certificate,
        "mechanism": mechanism_to_dict(s.mechanism),
    }


def robust_to_dict(s: RobustSolution) -> dict:
    return {
        "eps": s.eps,
        "r": s.r,
        "shrunk_eps": s.shrunk_eps,
        "center_utility": s.center_utility,
        "certified_worst_utility": s.certified_worst_utility,
        "sampled_worst_utility": s.sampled_worst_utility,
        "sampled_max_leakage": s.sampled_max_leakage,
        "holder": holder_to_dict(s.holder),
        "method": s.put.method,
        "mechanism": mechanism_to_dict(s.mechanism),
    }


def read_samples_csv(path) -> SampleSet:
    """Header ``s,x`` then one observation per line."""
    text = Path(path).read_text(encoding="utf-8")
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError(f"{path}: empty sample file") from None
    if [h.strip() for h in header] != ["s", "x"]:
        raise ValueError(f"{path}:1: expected header 's,x', got {','.join(header)!r}")
    pairs = []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise ValueError(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
        pairs.append((row[0].strip(), row[1].strip()))
    if not pairs:
        raise ValueError(f"{path}: no observations")
    return SampleSet(pairs)


def write_samples_csv(path, samples: SampleSet) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["s", "x"])
    w.writerows(samples.pairs)
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def curve_to_csv(points: list[CurvePoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["eps", "utility", "leakage", "method"])
    for pt in points:
        method = pt.method if pt.feasible else f"{pt.method}:infeasible"
        w.writerow([repr(pt.eps), repr(pt.utility), repr(pt.leakage), method])
    return buf.getvalue()


def records_to_csv(records: list[dict]) -> str:
    buf = io.StringIO()
    if not records:
        return ""
    w = csv.DictWriter(buf, fieldnames=list(records[0]), lineterminator="\n")
    w.writeheader()
    for rec in records:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in rec.items()})
    return buf.getvalue()
