from __future__ import annotations

import json
import math
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import SAMPLE_PARAMS
from monofinsler import io
from monofinsler.analysis import ScanSpec, run_scan, sample_indicatrix


@pytest.fixture(scope="module")
def scan():
    return run_scan(ScanSpec("r", 0.01, 1.0, 30, invariants=("F2", "Delta1", "Delta2", "signature", "R_C", "B_C", "G", "N")))


def _floats(obj):
    if isinstance(obj, dict):
        for v in obj.values():
            yield from _floats(v)
    elif isinstance(obj, list):
        for v in obj:
            yield from _floats(v)
    elif isinstance(obj, float):
        yield obj


def test_json_round_trip_is_bit_exact(scan):
    d = io.to_jsonable(io.scan_to_dict(scan))
    back = json.loads(io.scan_to_json(scan))
    a, b = list(_floats(d)), list(_floats(back))
    assert len(a) == len(b) > 0
    for u, v in zip(a, b):
        assert (math.isnan(u) and math.isnan(v)) or u.hex() == v.hex()


def test_json_is_deterministic(scan):
    assert io.scan_to_json(scan) == io.scan_to_json(run_scan(scan.spec))


def test_json_echoes_params_and_poles(scan):
    d = json.loads(io.scan_to_json(scan))
    assert d["params"]["V"] == SAMPLE_PARAMS.V
    assert d["spec"]["steps"] == 30
    assert len(d["rows"]) == 30
    assert d["poles"] == scan.poles


def test_csv_columns_and_values(scan):
    rows = io.read_csv(io.scan_to_csv(scan))
    assert list(rows[0])[:7] == list(io.CSV_COLUMNS)
    assert "signature" in rows[0] and "G1" in rows[0] and "N33" in rows[0]
    assert len(rows) == 30
    for row, r in zip(rows, scan.rows):
        assert float(row["sweep"]) == r.sweep
        assert float(row["RC"]) == r.values["R_C"]
        assert float(row["BC"]) == r.values["B_C"]
        assert row["pole"] == ("pole" if r.pole else "")


def test_csv_pole_rows_keep_raw_values():
    res = run_scan(ScanSpec("rdot", -0.01, 0.01, 21, invariants=("F2", "Delta2")))
    rows = io.read_csv(io.scan_to_csv(res))
    assert rows[10]["pole"] == "pole"
    assert rows[10]["F2"] == "nan"
    assert rows[9]["pole"] == ""


@settings(max_examples=200)
@given(st.floats(allow_nan=False))
def test_fmt_round_trips(v):
    assert float(io.fmt(v)) == v


def test_obj_round_trip():
    s = sample_indicatrix((0.01, 0.1, 0.0), SAMPLE_PARAMS, mode="grid", resolution=24)
    verts, faces = io.read_obj(io.indicatrix_to_obj(s))
    assert np.array_equal(verts, s.points)
    assert np.array_equal(faces, s.faces)


def test_indicatrix_csv_round_trip():
    s = sample_indicatrix((0.01, 0.1, 0.0), SAMPLE_PARAMS, resolution=8)
    rows = io.read_csv(io.indicatrix_to_csv(s))
    assert len(rows) == len(s)
    assert float(rows[0]["rdot"]) == s.points[0, 1]


def test_write_atomic(tmp_path):
    path = tmp_path / "out.txt"
    io.write_atomic(path, "first\n")
    io.write_atomic(path, "second\n")
    assert path.read_text() == "second\n"
    assert os.listdir(tmp_path) == ["out.txt"]


def test_write_atomic_missing_directory(tmp_path):
    with pytest.raises(OSError):
        io.write_atomic(tmp_path / "missing" / "out.txt", "x")
