"""Figure presets: scans and classification batches with caption-fixed values.

Each preset carries ``source``, a list of ``key=value`` strings recording the
values printed with the corresponding figure.  :func:`self_check` verifies
that the preset's numbers equal those records.  Values not fixed by a figure
(sweep ranges, step counts, reference points) are listed in ``chosen``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .analysis.scan import ScanSpec
from .model import ModelParams

FIG5_B = (0.922721, 0.0315175, 0.0102984, 0.00605459, 0.00181076, 0.00117419)
FIG6_B = (-0.00243306, -0.0109207, -0.0321398, -0.0745781, -1.19919)
INDICATRIX_A = 4.78079e7
INDICATRIX_C = 423e-10
INDICATRIX_V = 15.0
# printed alongside the B values; no algorithm uses them
FIG5_X0 = (0.0796186, 0.079618558, 0.079618557, 0.0796185568, 0.0796185566, 0.07961855657, 0.0796185565)
FIG6_X0 = (0.0796185564, 0.0796185562, 0.079618556, 0.079618555, 0.079618553, 0.0796185)


@dataclass
class Series:
    label: str
    spec: ScanSpec | None = None
    batch: list | None = None  # classification batch: list of (label, ModelParams)


@dataclass
class FigurePreset:
    id: str
    series: list
    source: list
    chosen: list = field(default_factory=list)
    base_point: tuple = (0.01, 0.1, 0.0)
    metadata: dict = field(default_factory=dict)


def _ricci_r() -> FigurePreset:
    fixed = dict(t=0.01, xidot=0.00001, rdot=0.01, phidot=0.0)
    speeds = (1e-15, 1e-10, 1e-8, 1e-7, 10.0)
    series = [
        Series(f"V={V!r}", ScanSpec("r", 0.01, 1.0, 200, fixed=fixed, invariants=("F2", "Delta1", "Delta2", "R_C"), params=ModelParams(V=V)))
        for V in speeds
    ]
    return FigurePreset(
        "fig-ricci-r", series,
        source=["t=0.01", "xidot=0.00001", "rdot=0.01", "phidot=0", "V=1e-15,1e-10,1e-8,1e-7,10"],
        chosen=["r=0.01..1", "steps=200", "phi=0"],
    )


def _inv_ricci_V() -> FigurePreset:
    fixed = dict(t=0.01, r=0.1, xidot=0.00001, rdot=0.01, phidot=0.0)
    return FigurePreset(
        "fig-inv-ricci-V",
        [Series("R_C-vs-V", ScanSpec("V", 1e-15, 10.0, 81, fixed=fixed, invariants=("F2", "Delta1", "Delta2", "R_C"), spacing="log"))],
        source=["t=0.01", "xidot=0.00001", "rdot=0.01", "phidot=0"],
        chosen=["r=0.1", "V=1e-15..10 log", "steps=81", "phi=0"],
    )


def _berwald_r() -> FigurePreset:
    fixed = dict(t=0.01, xidot=0.001, rdot=0.01, phidot=0.0)
    series = [
        Series(f"V={V!r}", ScanSpec("r", 0.01, 1.0, 200, fixed=fixed, invariants=("F2", "Delta1", "Delta2", "B_C"), params=ModelParams(V=V)))
        for V in (1e-15, 0.1)
    ]
    return FigurePreset(
        "fig-berwald-r", series,
        source=["t=0.01", "xidot=0.001", "rdot=0.01", "phidot=0", "V=1e-15,0.1"],
        chosen=["r=0.01..1", "steps=200", "phi=0"],
    )


def _berwald_v() -> FigurePreset:
    fixed = dict(t=0.01, r=0.1, rdot=1.0, phidot=0.0)
    series = [
        Series(f"V={V!r}", ScanSpec("v", 0.1, 1000.0, 400, fixed=fixed, invariants=("F2", "Delta1", "Delta2", "B_C"), params=ModelParams(V=V), spacing="log"))
        for V in (0.001, 0.1, 10.0)
    ]
    return FigurePreset(
        "fig-berwald-v", series,
        source=["rdot=1", "phidot=0", "t=0.01", "r=0.1", "V=0.001,0.1,10.0"],
        chosen=["v=0.1..1000 log", "steps=400", "phi=0"],
    )


def _indicatrix_types() -> FigurePreset:
    def batch(bs):
        return [
            (f"B={b!r}", ModelParams.frozen(INDICATRIX_A, b, INDICATRIX_C, V=INDICATRIX_V)) for b in bs
        ]

    return FigurePreset(
        "fig-indicatrix-types",
        [Series("single", batch=batch(FIG5_B)), Series("double", batch=batch(FIG6_B))],
        source=[
            "A=4.78079e7",
            "C=423e-10",
            "V=15.0",
            "B_single=" + ",".join(repr(b) for b in FIG5_B),
            "B_double=" + ",".join(repr(b) for b in FIG6_B),
            "x0_single=" + ",".join(repr(v) for v in FIG5_X0),
            "x0_double=" + ",".join(repr(v) for v in FIG6_X0),
        ],
        chosen=["t=0.01", "r=0.1", "phi=0", "window=u in [1e-16, 1e8] log"],
        metadata={"x0_single": list(FIG5_X0), "x0_double": list(FIG6_X0)},
    )


_BUILDERS = {
    "fig-ricci-r": _ricci_r,
    "fig-inv-ricci-V": _inv_ricci_V,
    "fig-berwald-r": _berwald_r,
    "fig-berwald-v": _berwald_v,
    "fig-indicatrix-types": _indicatrix_types,
}
PRESET_IDS = tuple(_BUILDERS)


class UnknownPresetError(KeyError):
    def __str__(self) -> str:
        return f"unknown preset {self.args[0]!r}; available: {', '.join(PRESET_IDS)}"


def get_preset(pid: str) -> FigurePreset:
    try:
        return _BUILDERS[pid]()
    except KeyError:
        raise UnknownPresetError(pid) from None


def _parse_source(items) -> dict:
    out = {}
    for item in items:
        k, v = item.split("=", 1)
        vals = tuple(float(s) for s in v.split(","))
        out[k] = vals[0] if len(vals) == 1 else vals
    return out


def self_check(preset: FigurePreset) -> list[str]:
    """Mismatches between the preset's numbers and its ``source`` records (empty if none)."""
    src = _parse_source(preset.source)
    problems = []

    def check(key, value):
        if key not in src:
            return
        want = src[key]
        if isinstance(want, tuple):
            if value not in want:
                problems.append(f"{key}={value!r} not among {want!r}")
        elif value != want:
            problems.append(f"{key}={value!r}, source says {want!r}")

    for s in preset.series:
        if s.spec is not None:
            for k, v in s.spec.fixed.items():
                if k != s.spec.var:
                    check(k, v)
            if s.spec.var != "V":
                check("V", s.spec.params.V)
        if s.batch is not None:
            key = "B_single" if s.label == "single" else "B_double"
            bs = tuple(p.frozen_B for _, p in s.batch)
            if bs != src.get(key):
                problems.append(f"{key}: {bs!r} != {src.get(key)!r}")
            for _, p in s.batch:
                check("A", p.frozen_A)
                check("C", p.frozen_C)
                check("V", p.V)
    if "V" in src and isinstance(src["V"], tuple):
        used = {s.spec.params.V for s in preset.series if s.spec is not None}
        if used != set(src["V"]):
            problems.append(f"V series {sorted(used)!r} != {sorted(src['V'])!r}")
    return problems
