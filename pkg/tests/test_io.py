import json

import numpy as np
import pytest

from putlab import JointPmf, Mechanism, SampleSet, pc_holder_constants
from putlab import io as pio
from putlab.solver import CurvePoint


def test_pmf_roundtrip_is_bit_exact(tmp_path):
    p = JointPmf.from_array([[0.1, 0.2], [0.30000000000000004, 0.39999999999999997]], ["a", "b"], ["u", "v"])
    path = tmp_path / "p.json"
    pio.write_json(path, pio.pmf_to_dict(p))
    assert pio.load_pmf(path) == p


def test_pmf_missing_field():
    with pytest.raises(ValueError, match="missing"):
        pio.pmf_from_dict({"s_labels": ["a"], "pmf": [[1.0]]})


def test_mechanism_roundtrip_and_nesting():
    m = Mechanism.from_array([[0.5, 0.5], [1.0, 0.0]])
    d = pio.mechanism_to_dict(m)
    assert pio.mechanism_from_dict(d) == m
    assert pio.mechanism_from_dict({"eps": 0.1, "mechanism": d}) == m


def test_infinite_r0_written_as_null():
    text = pio.dumps(pio.holder_to_dict(pc_holder_constants()))
    assert json.loads(text)["r0"] is None
    with pytest.raises(ValueError):
        pio.dumps({"x": float("inf")})


def test_samples_csv(tmp_path):
    path = tmp_path / "s.csv"
    pio.write_samples_csv(path, SampleSet([("a", "0"), ("b", "1")]))
    assert pio.read_samples_csv(path).pairs == (("a", "0"), ("b", "1"))


@pytest.mark.parametrize("text,msg", [
    ("", "empty"),
    ("s,y\na,0\n", ":1: expected header"),
    ("s,x\na,0\nb\n", ":3: expected 2 fields"),
    ("s,x\n", "no observations"),
])
def test_samples_csv_errors(tmp_path, text, msg):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    with pytest.raises(ValueError, match=msg):
        pio.read_samples_csv(path)


def test_curve_csv_layout():
    pts = [CurvePoint(0.1, 0.5, 0.1, "grid", True), CurvePoint(0.2, 0.4, 0.3, "grid", False)]
    lines = pio.curve_to_csv(pts).splitlines()
    assert lines[0] == "eps,utility,leakage,method"
    assert lines[2].endswith("grid:infeasible")
