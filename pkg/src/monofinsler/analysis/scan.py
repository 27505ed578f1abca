"""One-dimensional parameter scans of the invariants."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import geometry
from ..model import ModelParams, coefficient_functions, delta2_value

BASE_VARS = ("t", "r", "phi")
FIBER_VARS = ("xidot", "rdot", "phidot")
#: sweepable quantities; ``v`` = rdot/xidot and ``u`` = xidot/rdot move xidot
SWEEP_VARS = BASE_VARS + FIBER_VARS + ("V", "v", "u")
INVARIANTS = ("F2", "Delta1", "Delta2", "signature", "R_C", "B_C", "G", "N")
DEFAULT_INVARIANTS = ("F2", "Delta1", "Delta2", "R_C", "B_C")
DEFAULT_FIXED = {"t": 0.01, "r": 0.1, "phi": 0.0, "xidot": 0.001, "rdot": 0.01, "phidot": 0.0}


class ScanSpecError(ValueError):
    pass


@dataclass
class ScanSpec:
    var: str
    lo: float
    hi: float
    steps: int
    fixed: dict = field(default_factory=dict)
    invariants: tuple = DEFAULT_INVARIANTS
    params: ModelParams = field(default_factory=ModelParams)
    spacing: str = "linear"
    order: int | None = None

    def __post_init__(self):
        self.fixed = {**DEFAULT_FIXED, **self.fixed}
        self.invariants = tuple(self.invariants)
        self.validate()

    def validate(self):
        if self.var not in SWEEP_VARS:
            raise ScanSpecError(f"unknown sweep variable {self.var!r}; choose from {SWEEP_VARS}")
        unknown = set(self.fixed) - set(DEFAULT_FIXED)
        if unknown:
            raise ScanSpecError(f"unknown fixed variables {sorted(unknown)}")
        bad = set(self.invariants) - set(INVARIANTS)
        if bad:
            raise ScanSpecError(f"unknown invariants {sorted(bad)}; choose from {INVARIANTS}")
        if not self.lo < self.hi:
            raise ScanSpecError(f"need lo < hi, got [{self.lo!r}, {self.hi!r}]")
        if self.steps < 2:
            raise ScanSpecError(f"need steps >= 2, got {self.steps}")
        if self.spacing not in ("linear", "log"):
            raise ScanSpecError(f"spacing must be 'linear' or 'log', got {self.spacing!r}")
        if self.spacing == "log" and not self.lo > 0:
            raise ScanSpecError("log spacing needs lo > 0")
        f = self.fixed
        if self.var not in ("rdot",) and f["rdot"] == 0:
            raise ScanSpecError("fiber pole: rdot = 0 for every row")
        if self.var == "r" and self.lo <= 0:
            raise ScanSpecError("r range must be positive")
        if self.var != "r" and not f["r"] > 0:
            raise ScanSpecError(f"r must be positive, got {f['r']!r}")
        if self.var == "t" and self.lo < 0:
            raise ScanSpecError("t range must be non-negative")
        if self.var != "t" and f["t"] < 0:
            raise ScanSpecError(f"t must be non-negative, got {f['t']!r}")
        if self.var == "v" and self.lo <= 0 <= self.hi:
            raise ScanSpecError("v range must not contain 0")
        if self.var == "V" and self.lo < 0:
            raise ScanSpecError("V is a magnitude; range must be non-negative")

    def grid(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.lo, self.hi, self.steps)
        return np.linspace(self.lo, self.hi, self.steps)

    def to_dict(self) -> dict:
        return {
            "var": self.var,
            "lo": float(self.lo),
            "hi": float(self.hi),
            "steps": int(self.steps),
            "spacing": self.spacing,
            "fixed": {k: float(v) for k, v in self.fixed.items()},
            "invariants": list(self.invariants),
            "params": params_dict(self.params),
            "order": self.order,
        }


def params_dict(p: ModelParams) -> dict:
    return {
        "m": p.m,
        "c": p.c,
        "p": p.p,
        "V": p.V,
        "mode": p.mode,
        "frozen_A": p.frozen_A,
        "frozen_B": p.frozen_B,
        "frozen_C": p.frozen_C,
    }


@dataclass
class ScanRow:
    sweep: float
    values: dict
    pole: bool
    flags: list


@dataclass
class ScanResult:
    spec: ScanSpec
    rows: list
    metadata: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        if name == "sweep":
            return np.array([r.sweep for r in self.rows])
        return np.array([r.values[name] for r in self.rows])

    @property
    def poles(self) -> list:
        return [r.sweep for r in self.rows if r.pole]


def _points(spec: ScanSpec, s: np.ndarray):
    n = len(s)
    cols = {k: np.full(n, float(v)) for k, v in spec.fixed.items()}
    if spec.var in cols:
        cols[spec.var] = s.copy()
    elif spec.var == "v":
        cols["xidot"] = cols["rdot"] / s
    elif spec.var == "u":
        cols["xidot"] = s * cols["rdot"]
    return tuple(cols[k] for k in BASE_VARS), tuple(cols[k] for k in FIBER_VARS)


#: flag for rows on either side of a sign change of Delta2
CROSSING = "Delta2-crossing"


def _delta2_column(spec: ScanSpec, x, y, s) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        u = y[0] / y[1]
        if spec.var == "V":
            out = np.empty(len(s))
            for k, V in enumerate(s):
                A, B, C = coefficient_functions(x[0][k], x[1][k], spec.params.with_(V=V))
                out[k] = delta2_value(A, B, C, u[k])
            return out
        A, B, C = coefficient_functions(x[0], x[1], spec.params)
        return delta2_value(A, B, C, u)


def _mark_crossings(d2: np.ndarray, flags: list) -> None:
    sg = np.sign(d2)
    for k in range(len(sg) - 1):
        if sg[k] * sg[k + 1] < 0:
            for j in (k, k + 1):
                if CROSSING not in flags[j]:
                    flags[j].append(CROSSING)


def run_scan(spec: ScanSpec, chunk: int = 256) -> ScanResult:
    """Evaluate the requested invariants on every grid point of ``spec``.

    Rows at a pole (relative size below 1e-12) or on either side of a sign
    change of Delta2 are flagged; their values are recorded as computed
    (NaN only where the pole is exact).
    """
    spec.validate()
    s = spec.grid()
    x, y = _points(spec, s)
    fields = spec.invariants
    if spec.var == "V":
        vals = {f: [] for f in fields}
        flags = []
        for k, V in enumerate(s):
            v, fl = geometry.evaluate_points(
                tuple(a[k : k + 1] for a in x), tuple(a[k : k + 1] for a in y),
                spec.params.with_(V=V), fields, order=spec.order,
            )
            for f in fields:
                vals[f].append(v[f][0])
            flags.append(fl[0])
    else:
        vals, flags = geometry.evaluate_points(x, y, spec.params, fields, order=spec.order, chunk=chunk)
    _mark_crossings(_delta2_column(spec, x, y, s), flags)
    rows = []
    for k, sv in enumerate(s):
        row_vals = {}
        for f in fields:
            v = vals[f][k]
            row_vals[f] = v if f == "signature" else np.asarray(v, dtype=float)
            if f not in ("G", "N", "signature"):
                row_vals[f] = float(row_vals[f])
        rows.append(ScanRow(float(sv), row_vals, bool(flags[k]), list(flags[k])))
    return ScanResult(spec, rows, {"spec": spec.to_dict()})
