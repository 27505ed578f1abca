"""Serialization of results: CSV, JSON and OBJ, written atomically.

Floats are written with ``repr``, the shortest decimal that round-trips, so
parsing an emitted file gives back bit-identical values.  Non-finite values
use the JSON tokens ``NaN``/``Infinity`` that Python's json module reads back.
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile

import numpy as np

from .analysis.indicatrix import IndicatrixSample
from .analysis.scan import ScanResult, params_dict

CSV_COLUMNS = ("sweep", "F2", "Delta1", "Delta2", "RC", "BC", "pole")
_FIELD_OF = {"F2": "F2", "Delta1": "Delta1", "Delta2": "Delta2", "RC": "R_C", "BC": "B_C"}


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temp file in the same directory."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=d)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt(v) -> str:
    return repr(float(v))


def to_jsonable(obj):
    """Plain Python containers and floats (numpy scalars and arrays converted)."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=1, allow_nan=True) + "\n"


def _signature_text(sig) -> str:
    return sig if isinstance(sig, str) else ",".join(sig)


# -- scans ---------------------------------------------------------------------

def scan_to_dict(res: ScanResult) -> dict:
    rows = []
    for r in res.rows:
        row = {"sweep": r.sweep}
        for k, v in r.values.items():
            row[k] = _signature_text(v) if k == "signature" else v
        row["pole"] = r.pole
        row["flags"] = list(r.flags)
        rows.append(row)
    return {
        "kind": "scan",
        "spec": res.spec.to_dict(),
        "params": params_dict(res.spec.params),
        "rows": rows,
        "poles": res.poles,
    }


def scan_to_json(res: ScanResult) -> str:
    return dumps(scan_to_dict(res))


def scan_to_csv(res: ScanResult) -> str:
    extra = []
    inv = res.spec.invariants
    if "signature" in inv:
        extra.append("signature")
    if "G" in inv:
        extra += [f"G{i + 1}" for i in range(3)]
    if "N" in inv:
        extra += [f"N{i + 1}{j + 1}" for i in range(3) for j in range(3)]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(CSV_COLUMNS) + extra)
    for r in res.rows:
        line = [fmt(r.sweep)]
        for col in CSV_COLUMNS[1:-1]:
            f = _FIELD_OF[col]
            line.append(fmt(r.values[f]) if f in r.values else "")
        line.append("pole" if r.pole else "")
        if "signature" in inv:
            line.append(_signature_text(r.values["signature"]))
        if "G" in inv:
            line += [fmt(v) for v in np.ravel(r.values["G"])]
        if "N" in inv:
            line += [fmt(v) for v in np.ravel(r.values["N"])]
        w.writerow(line)
    return buf.getvalue()


def read_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


# -- indicatrix ------------------------------------------------------------------

def indicatrix_to_csv(s: IndicatrixSample) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["xidot", "rdot", "phidot", "residual"])
    for p, res in zip(s.points, s.residuals):
        w.writerow([fmt(p[0]), fmt(p[1]), fmt(p[2]), fmt(res)])
    return buf.getvalue()


def indicatrix_to_obj(s: IndicatrixSample) -> str:
    lines = [f"# indicatrix F^2 = 1, {len(s.points)} vertices"]
    lines += [f"v {fmt(p[0])} {fmt(p[1])} {fmt(p[2])}" for p in s.points]
    if s.faces is not None:
        lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in s.faces]
    return "\n".join(lines) + "\n"


def read_obj(text: str) -> tuple[np.ndarray, np.ndarray]:
    verts, faces = [], []
    for line in text.splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            verts.append([float(v) for v in parts[1:4]])
        elif parts[0] == "f":
            faces.append([int(v) - 1 for v in parts[1:4]])
    return np.array(verts).reshape(-1, 3), np.array(faces, dtype=int).reshape(-1, 3)
