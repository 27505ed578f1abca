"""Compressibility proxy: the area integral of B_C over a disc annulus."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .. import geometry
from ..model import ModelParams, coefficient_functions, delta2_value


class KappaError(ValueError):
    pass


@dataclass
class KappaResult:
    value: float
    poles: list
    intervals: list
    abserr: float = 0.0
    metadata: dict = field(default_factory=dict)


def delta2_poles_in_r(params: ModelParams, t: float, fiber, r_range, samples: int = 4001) -> list:
    """Sign-change zeros of Delta2 in r at fixed t and fiber vector."""
    lo, hi = r_range
    u = fiber[0] / fiber[1]
    r = np.linspace(lo, hi, samples)

    def d2(rv):
        A, B, C = coefficient_functions(t, rv, params)
        return delta2_value(A, B, C, u)

    v = d2(r)
    sg = np.sign(v)
    out = []
    for i in range(samples - 1):
        if sg[i] == 0:
            out.append(float(r[i]))
        elif sg[i] * sg[i + 1] < 0:
            out.append(float(brentq(d2, r[i], r[i + 1], xtol=1e-300, rtol=1e-12)))
    if sg[-1] == 0:
        out.append(float(r[-1]))
    return out


def bc_profile(params: ModelParams, t: float, fiber, r, order: int | None = None) -> np.ndarray:
    """B_C along the radial array ``r`` (phi = 0)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    n = len(r)
    x = (np.full(n, float(t)), r, np.zeros(n))
    y = tuple(np.full(n, float(c)) for c in fiber)
    vals, _ = geometry.evaluate_points(x, y, params, ("B_C",), order=order)
    return vals["B_C"]


def kappa_integral(
    params: ModelParams, t: float, fiber, r_range, eps: float = 1e-6,
    order: int | None = None, epsrel: float = 1e-10,
) -> KappaResult:
    """2 pi * integral of B_C(r) r dr over ``r_range`` minus eps-neighbourhoods of Delta2 poles.

    The result is an unnormalized proportionality; no physical constant is
    attached.
    """
    lo, hi = float(r_range[0]), float(r_range[1])
    if not (0 < lo < hi):
        raise KappaError(f"need 0 < r_lo < r_hi, got {r_range!r}")
    if not eps > 0:
        raise KappaError("eps must be positive")
    if fiber[1] == 0:
        raise KappaError("fiber pole: rdot = 0")
    poles = delta2_poles_in_r(params, t, fiber, (lo, hi))
    pieces = []
    a = lo
    for p in poles:
        b = p - eps
        if b > a:
            pieces.append((a, b))
        a = max(a, p + eps)
    if hi > a:
        pieces.append((a, hi))
    if not pieces:
        raise KappaError("the whole range lies inside pole neighbourhoods")

    def integrand(r):
        return float(bc_profile(params, t, fiber, [r], order)[0]) * r

    total = 0.0
    err = 0.0
    for a, b in pieces:
        v, e = quad(integrand, a, b, epsrel=epsrel, epsabs=0.0, limit=200)
        total += v
        err += e
    return KappaResult(
        2 * np.pi * total, poles, pieces, 2 * np.pi * err,
        {"t": float(t), "fiber": [float(c) for c in fiber], "r_range": [lo, hi], "eps": float(eps)},
    )
