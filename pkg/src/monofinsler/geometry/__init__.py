"""Finsler invariants of the monolayer metric at a phase-space point.

Two evaluation paths exist for g, C, G and N: ``"closed_form"`` (explicit
formulas in A, B, C and their base partials) and ``"ad"`` (jet
differentiation of F^2).  ``"printed"`` gives the uncorrected bracket forms of
G and N for comparison.  Christoffel symbols, hh-curvature and the Berwald
tensor are jet-only.  Index order is (t, r, phi) for base and
(xidot, rdot, phidot) for fiber components; array index 0 is
tensor index 1.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from ..jets import JetPoleError
from ..model import (
    Coefficients,
    FiberPoleError,
    ModelParams,
    coefficient_functions,
    coefficients,
    delta2_scale,
    delta2_value,
)
from . import chain as _chain
from . import closed_form

ORDER_ENV = "MONOFINSLER_JET_ORDER"
#: relative size below which a denominator counts as a pole
POLE_REL_TOL = 1e-12

CLOSED_FORM = "closed_form"
AD = "ad"
#: uncorrected component formulas, for comparison against the other paths
PRINTED = "printed"


def default_order() -> int | None:
    """Jet order override from the environment, or None for the per-stage minimum."""
    raw = os.environ.get(ORDER_ENV, "").strip()
    return int(raw) if raw else None


@dataclass
class MetricData:
    g: np.ndarray
    g_inv: np.ndarray
    delta1: float
    delta2: float
    delta3: float
    signature: tuple | str


@dataclass
class GeometryBundle:
    metric: MetricData
    cartan: np.ndarray
    spray: np.ndarray
    connection: np.ndarray
    christoffel: np.ndarray
    hh_curv: np.ndarray
    berwald: np.ndarray
    R_C: float
    B_C: float
    F2: float
    pole_flags: list = field(default_factory=list)
    closed_form: dict | None = None
    path_deviation: dict | None = None
    printed_deviation: dict | None = None


def _check(x, y):
    if not x[1] > 0:
        from ..model import ModelDomainError

        raise ModelDomainError(f"r must be positive, got {x[1]!r}")
    if y[1] == 0:
        raise FiberPoleError(0.0)


def _abc(x, params: ModelParams):
    A, B, C = coefficient_functions(x[0], x[1], params)
    return float(A), float(B), float(C)


def pole_flags(x, y, params: ModelParams) -> list[str]:
    """Names of denominators that are numerically zero at (x, y)."""
    flags = []
    ymax = max(abs(v) for v in y)
    if abs(y[1]) <= POLE_REL_TOL * ymax:
        flags.append("rdot")
        return flags
    A, B, C = _abc(x, params)
    u = y[0] / y[1]
    if abs(delta2_value(A, B, C, u)) <= POLE_REL_TOL * delta2_scale(A, B, C, u):
        flags.append("Delta2")
    return flags


def _pole_flags_batch(x, y, params: ModelParams) -> list[list[str]]:
    """:func:`pole_flags` for 1-d arrays of points."""
    ymax = np.max(np.abs(np.stack(y)), axis=0)
    rdot = np.abs(y[1]) <= POLE_REL_TOL * ymax
    with np.errstate(divide="ignore", invalid="ignore"):
        A, B, C = coefficient_functions(x[0], x[1], params)
        u = y[0] / y[1]
        near = np.abs(delta2_value(A, B, C, u)) <= POLE_REL_TOL * delta2_scale(A, B, C, u)
    near = np.broadcast_to(near, rdot.shape)
    return [["rdot"] if rdot[k] else (["Delta2"] if near[k] else []) for k in range(len(rdot))]


def signature(delta1: float, delta2: float, delta3: float, scales=(None, None, None)):
    """Signs of the eigenvalues from leading principal minors (Sylvester).

    Returns a tuple like ``('+', '+', '-')`` or ``"degenerate"`` when a minor is
    zero relative to its scale.
    """
    ds = (delta1, delta2, delta3)
    for d, s in zip(ds, scales):
        ref = abs(d) if s is None else s
        if d == 0 or abs(d) <= POLE_REL_TOL * ref:
            return "degenerate"
    ratios = (delta1, delta2 / delta1, delta3 / delta2)
    return tuple("+" if v > 0 else "-" for v in ratios)


def _minor_scales(x, y, params):
    A, B, C = _abc(x, params)
    u = y[0] / y[1]
    s1 = abs(3 * A * u) + abs(B)
    s2 = float(delta2_scale(A, B, C, u))
    s3 = (C / 2) * x[1] ** 2 * s2
    return s1, s2, s3


def metric_tensor(x, y, params: ModelParams, path: str = AD, order: int | None = None) -> MetricData:
    _check(x, y)
    scales = _minor_scales(x, y, params)
    if path == CLOSED_FORM:
        coef = coefficients(x, params)
        g = closed_form.metric(coef, x, y)
        d1, d2, d3 = closed_form.minors(coef, x, y)
        try:
            g_inv = np.linalg.inv(g) if d3 != 0 else np.full((3, 3), np.nan)
        except np.linalg.LinAlgError:
            g_inv = np.full((3, 3), np.nan)
    elif path == AD:
        try:
            ch = _chain.evaluate(x, y, params, want=("metric",), order=order or default_order())
            g_inv = _chain.values(ch.g_inv)
            g = _chain.values(ch.g)
        except JetPoleError:
            ch = None
            g = 0.5 * _hessian_only(x, y, params)
            g_inv = np.full((3, 3), np.nan)
        d1 = g[0, 0]
        d2 = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
        d3 = float(np.linalg.det(g)) if ch is None else float(_chain.values(ch.det))
    else:
        raise ValueError(f"unknown path {path!r}")
    return MetricData(g, g_inv, float(d1), float(d2), float(d3), signature(d1, d2, d3, scales))


def _hessian_only(x, y, params):
    from ..jets import JetContext, extract_partial
    from ..model import F2_jet

    F = F2_jet(x, y, params, JetContext(6, 2))
    H = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            a = [0] * 6
            a[3 + i] += 1
            a[3 + j] += 1
            H[i, j] = extract_partial(F, a)
    return H


def cartan_tensor(x, y, params: ModelParams, path: str = AD, order: int | None = None) -> np.ndarray:
    _check(x, y)
    if path == CLOSED_FORM:
        return closed_form.cartan(coefficients(x, params), x, y)
    if path == AD:
        from ..jets import JetContext
        from ..model import F2_jet

        n = order or default_order() or 3
        return 0.25 * _chain.third_y_derivatives(F2_jet(x, y, params, JetContext(6, n)))
    raise ValueError(f"unknown path {path!r}")


def spray(x, y, params: ModelParams, path: str = AD, order: int | None = None) -> np.ndarray:
    _check(x, y)
    if path == CLOSED_FORM:
        return closed_form.spray(coefficients(x, params), x, y)
    if path == PRINTED:
        return closed_form.spray(coefficients(x, params), x, y, printed=True)
    if path == AD:
        return _chain.values(_chain.evaluate(x, y, params, want=("spray",), order=order or default_order()).G)
    raise ValueError(f"unknown path {path!r}")


def nonlinear_connection(x, y, params: ModelParams, path: str = AD, order: int | None = None) -> np.ndarray:
    _check(x, y)
    if path == CLOSED_FORM:
        return closed_form.connection(coefficients(x, params), x, y)
    if path == PRINTED:
        return closed_form.printed_connection(coefficients(x, params), x, y)
    if path == AD:
        return _chain.values(_chain.evaluate(x, y, params, want=("connection",), order=order or default_order()).N)
    raise ValueError(f"unknown path {path!r}")


def christoffel(x, y, params: ModelParams, order: int | None = None) -> np.ndarray:
    _check(x, y)
    ch = _chain.evaluate(x, y, params, want=("christoffel",), order=order or default_order())
    return _chain.values(ch.christoffel)


def hh_curvature(x, y, params: ModelParams, order: int | None = None) -> np.ndarray:
    _check(x, y)
    ch = _chain.evaluate(x, y, params, want=("curvature",), order=order or default_order())
    return _chain.values(ch.curvature)


def ricci_scalar(x, y, params: ModelParams, order: int | None = None) -> float:
    """R_C = g^{ij} R^k_{ikj} (plain double trace)."""
    _check(x, y)
    ch = _chain.evaluate(x, y, params, want=("curvature",), order=order or default_order())
    return float(_chain.ricci_trace(_chain.values(ch.g_inv), _chain.values(ch.curvature)))


def berwald(x, y, params: ModelParams, order: int | None = None) -> tuple[np.ndarray, float]:
    """Berwald tensor d^3 G^i / dy^j dy^k dy^l and its trace B_C = g^{ij} B^k_{ikj}."""
    _check(x, y)
    ch = _chain.evaluate(x, y, params, want=("berwald",), order=order or default_order())
    B = ch.berwald
    return B, float(_chain.ricci_trace(_chain.values(ch.g_inv), B))


def relative_deviation(a, b, row_floor: float = 1e-12) -> float:
    """Largest componentwise relative difference between two tensors.

    Each component is compared against ``max(|a|, |b|)``, floored at
    ``row_floor`` times the largest magnitude sharing its first (upper) index,
    so structural zeros that one route reproduces only to roundoff do not count.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    mag = np.maximum(np.abs(a), np.abs(b))
    if mag.ndim >= 2:
        row = mag.reshape(mag.shape[0], -1).max(axis=1)
        row = row.reshape((-1,) + (1,) * (mag.ndim - 1))
    else:
        row = mag
    den = np.maximum(np.maximum(mag, row_floor * row), 1e-300)
    return float(np.max(np.abs(a - b) / den))


# -- batched evaluation --------------------------------------------------------

#: fields understood by :func:`evaluate_points`, with the chain stage each needs
POINT_FIELDS = {
    "F2": "metric",
    "Delta1": "metric",
    "Delta2": "metric",
    "signature": "metric",
    "G": "spray",
    "N": "connection",
    "R_C": "curvature",
    "B_C": "berwald",
}


def _field_values(ch, fields) -> dict:
    out = {}
    g = _chain.values(ch.g)
    d1 = g[..., 0, 0]
    d2 = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] * g[..., 1, 0]
    for f in fields:
        if f == "F2":
            out[f] = _chain.values(ch.F2)
        elif f == "Delta1":
            out[f] = d1
        elif f == "Delta2":
            out[f] = d2
        elif f == "G":
            out[f] = _chain.values(ch.G)
        elif f == "N":
            out[f] = _chain.values(ch.N)
        elif f == "R_C":
            out[f] = _chain.ricci_trace(_chain.values(ch.g_inv), _chain.values(ch.curvature))
        elif f == "B_C":
            out[f] = _chain.ricci_trace(_chain.values(ch.g_inv), ch.berwald)
        elif f == "signature":
            out["_minors"] = np.stack([d1, d2, _chain.values(ch.det)], axis=-1)
    return out


def _empty_value(f, n):
    if f == "G":
        return np.full((n, 3), np.nan)
    if f == "N":
        return np.full((n, 3, 3), np.nan)
    return np.full(n, np.nan)


def evaluate_points(
    x, y, params: ModelParams, fields=("F2", "Delta1", "Delta2", "R_C", "B_C"),
    order: int | None = None, chunk: int = 256,
) -> tuple[dict, list]:
    """Evaluate ``fields`` at n points given as 1-d arrays ``x = (t, r, phi)``, ``y``.

    Returns ``(values, flags)``: ``values[f]`` has a leading axis of length n
    (``signature`` is a list); ``flags[k]`` lists the pole names at point k.
    Chunks containing an exact pole fall back to point-by-point evaluation and
    the offending points carry NaN values.
    """
    x = [np.atleast_1d(np.asarray(v, dtype=float)) for v in x]
    y = [np.atleast_1d(np.asarray(v, dtype=float)) for v in y]
    n = len(x[1])
    fields = tuple(fields)
    unknown = set(fields) - set(POINT_FIELDS)
    if unknown:
        raise ValueError(f"unknown fields {sorted(unknown)}; choose from {sorted(POINT_FIELDS)}")
    # B_C comes from the reduced route; the full chain then stops at order 4
    want = tuple({POINT_FIELDS[f] for f in fields if f != "B_C"})
    order = order or default_order()
    vals = {f: _empty_value(f, n) for f in fields if f != "signature"}
    if "signature" in fields:
        vals["_minors"] = np.full((n, 3), np.nan)
    sig = [None] * n
    flags = _pole_flags_batch(x, y, params)

    def run(sl):
        xs = tuple(v[sl] for v in x)
        ys = tuple(v[sl] for v in y)
        out = {}
        if want:
            ch = _chain.evaluate(xs, ys, params, want=want, order=order)
            out = _field_values(ch, [f for f in fields if f != "B_C"])
        if "B_C" in fields:
            B, g_inv = _chain.berwald_reduced(xs, ys, params)
            out["B_C"] = _chain.ricci_trace(g_inv, B)
        return out

    for start in range(0, n, chunk):
        sl = slice(start, min(start + chunk, n))
        try:
            res = run(sl)
            for f, v in res.items():
                vals[f][sl] = v
        except JetPoleError:
            for k in range(sl.start, sl.stop):
                try:
                    res = run(slice(k, k + 1))
                    for f, v in res.items():
                        vals[f][k] = v[0]
                except JetPoleError as exc:
                    name = "rdot" if exc.name == "rdot" else "Delta2"
                    if name not in flags[k]:
                        flags[k].append(name)
    if "signature" in fields:
        d = vals.pop("_minors")
        for k in range(n):
            if "rdot" in flags[k] or np.isnan(d[k]).any():
                sig[k] = "degenerate"
                continue
            xk = tuple(v[k] for v in x)
            yk = tuple(v[k] for v in y)
            sig[k] = signature(*d[k], _minor_scales(xk, yk, params))
        vals["signature"] = sig
    return vals, flags


def geometry_bundle(
    x, y, params: ModelParams, order: int | None = None, with_closed_form: bool = True
) -> GeometryBundle:
    """Every invariant at (x, y), jet path, optionally with the closed-form values."""
    _check(x, y)
    order = order or default_order()
    flags = pole_flags(x, y, params)
    ch = _chain.evaluate(
        x, y, params, want=("cartan", "curvature", "berwald"), order=order
    )
    g = _chain.values(ch.g)
    g_inv = _chain.values(ch.g_inv)
    d1 = g[0, 0]
    d2 = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
    d3 = float(_chain.values(ch.det))
    md = MetricData(g, g_inv, float(d1), float(d2), d3, signature(d1, d2, d3, _minor_scales(x, y, params)))
    if md.signature == "degenerate" and "Delta2" not in flags:
        flags.append("Delta2")
    R = _chain.values(ch.curvature)
    bundle = GeometryBundle(
        metric=md,
        cartan=ch.cartan,
        spray=_chain.values(ch.G),
        connection=_chain.values(ch.N),
        christoffel=_chain.values(ch.christoffel),
        hh_curv=R,
        berwald=ch.berwald,
        R_C=float(_chain.ricci_trace(g_inv, R)),
        B_C=float(_chain.ricci_trace(g_inv, ch.berwald)),
        F2=float(_chain.values(ch.F2)),
        pole_flags=flags,
    )
    if with_closed_form:
        coef = coefficients(x, params)
        cf = {
            "g": closed_form.metric(coef, x, y),
            "cartan": closed_form.cartan(coef, x, y),
            "spray": closed_form.spray(coef, x, y),
            "connection": closed_form.connection(coef, x, y),
        }
        bundle.closed_form = cf
        bundle.path_deviation = {
            "g": relative_deviation(g, cf["g"]),
            "cartan": relative_deviation(bundle.cartan, cf["cartan"]),
            "spray": relative_deviation(bundle.spray, cf["spray"]),
            "connection": relative_deviation(bundle.connection, cf["connection"]),
        }
        bundle.printed_deviation = {
            "spray": relative_deviation(bundle.spray, closed_form.spray(coef, x, y, printed=True)),
            "connection": relative_deviation(
                bundle.connection, closed_form.printed_connection(coef, x, y)
            ),
        }
    return bundle


__all__ = [
    "AD",
    "CLOSED_FORM",
    "Coefficients",
    "GeometryBundle",
    "MetricData",
    "POINT_FIELDS",
    "PRINTED",
    "berwald",
    "cartan_tensor",
    "christoffel",
    "closed_form",
    "default_order",
    "evaluate_points",
    "geometry_bundle",
    "hh_curvature",
    "metric_tensor",
    "nonlinear_connection",
    "pole_flags",
    "relative_deviation",
    "ricci_scalar",
    "signature",
    "spray",
]
