"""Sign-change zeros of the second Jacobi minor and the three-type classifier.

At a fixed base point A, B, C are constants and Delta2 is a quartic in
``u = xidot / rdot``.  The detector samples Delta2 along a one-parameter fiber
family, brackets sign changes and refines them with Brent's method; the oracle
takes the companion-matrix roots of the same quartic.  The two share nothing
but the coefficients.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from ..model import ModelParams, coefficient_functions, delta2_scale, delta2_value

#: default scan window in u = xidot/rdot (log-spaced, rdot > 0)
DEFAULT_WINDOW = (1e-16, 1e8)
ROOT_RTOL = 1e-10
DEDUPE_RTOL = 1e-8
SAMPLES_PER_DECADE = 64

#: one-parameter fiber families: map the scan variable s to u = xidot/rdot
FAMILIES = ("u", "v", "rdot", "xidot")


def _abc(x, params: ModelParams):
    A, B, C = coefficient_functions(float(x[0]), float(x[1]), params)
    return float(A), float(B), float(C)


def _to_u(s, family: str, fiber):
    if family == "u":
        return s
    if family == "v":
        return 1.0 / s
    if family == "rdot":
        return fiber[0] / s
    if family == "xidot":
        return s / fiber[1]
    raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")


def _grid(lo: float, hi: float, log: bool, samples: int | None):
    if log:
        if not lo > 0:
            raise ValueError("log-spaced windows need lo > 0")
        if samples is None:
            samples = max(int(np.ceil(np.log10(hi / lo) * SAMPLES_PER_DECADE)) + 1, 64)
        return np.geomspace(lo, hi, samples)
    return np.linspace(lo, hi, samples or 4096)


def find_singularities(
    params: ModelParams,
    x,
    fiber=(1.0, 1.0, 0.0),
    window=DEFAULT_WINDOW,
    family: str = "u",
    log: bool = True,
    samples: int | None = None,
) -> list[float]:
    """Sign-change roots of Delta2 along a fiber family, in the family's variable.

    ``family`` picks the scanned quantity: ``"u"`` (xidot/rdot), ``"v"``
    (rdot/xidot), ``"rdot"`` (xidot fixed from ``fiber``) or ``"xidot"``
    (rdot fixed).  Roots are refined to relative tolerance 1e-10 and merged
    when closer than 1e-8 relative.
    """
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise ValueError(f"window must satisfy lo < hi, got {window!r}")
    A, B, C = _abc(x, params)
    if A == 0.0:
        return []

    def f(s):
        return delta2_value(A, B, C, _to_u(s, family, fiber))

    s = _grid(lo, hi, log, samples)
    if family == "rdot" or family == "xidot":
        s = s[s != 0]
    vals = f(s)
    sg = np.sign(vals)
    roots: list[float] = []

    def refine(a, b):
        if log and a > 0 and b > 0:
            g = lambda z: f(np.exp(z))  # noqa: E731
            z = brentq(g, np.log(a), np.log(b), xtol=1e-300, rtol=ROOT_RTOL * 1e-2, maxiter=400)
            return float(np.exp(z))
        return float(brentq(f, a, b, xtol=1e-300, rtol=ROOT_RTOL, maxiter=400))

    for i in range(len(s) - 1):
        a, b = s[i], s[i + 1]
        if sg[i] == 0:
            left = sg[i - 1] if i > 0 else 0
            if left != 0 and sg[i + 1] != 0 and left != sg[i + 1]:
                roots.append(float(a))
            continue
        if sg[i + 1] == 0:
            continue
        if sg[i] != sg[i + 1]:
            roots.append(refine(a, b))
            continue
        # no sign change: a close root pair may hide between samples
        if (
            0 < i < len(s) - 2
            and sg[i - 1] == sg[i]
            and abs(vals[i]) <= abs(vals[i - 1])
            and abs(vals[i]) <= abs(vals[i + 1])
        ):
            roots.extend(_split_pair(f, s[i - 1], s[i + 1], sg[i], log, refine))
    return _dedupe(sorted(roots))


def _split_pair(f, a, b, sgn, log, refine):
    """Look for a sign flip at the extremum of sgn*f on (a, b)."""
    if log:
        res = minimize_scalar(
            lambda z: sgn * f(np.exp(z)), bounds=(np.log(a), np.log(b)), method="bounded",
            options={"xatol": 1e-14},
        )
        m = float(np.exp(res.x))
    else:
        res = minimize_scalar(lambda z: sgn * f(z), bounds=(a, b), method="bounded")
        m = float(res.x)
    if np.sign(f(m)) == -sgn and np.sign(f(m)) != 0:
        return [refine(a, m), refine(m, b)]
    return []


def _dedupe(roots: list[float]) -> list[float]:
    out: list[float] = []
    for r in roots:
        if out and abs(r - out[-1]) <= DEDUPE_RTOL * max(abs(r), abs(out[-1])):
            continue
        out.append(r)
    return out


@dataclass
class QuarticRoots:
    count: int
    roots: list
    all_roots: np.ndarray


def quartic_root_oracle(A: float, B: float, C: float, window=DEFAULT_WINDOW) -> QuarticRoots:
    """Real odd-multiplicity roots of Delta2(u) inside ``window`` via the companion matrix."""
    if A == 0:
        raise ValueError("the oracle needs A != 0 (Delta2 is then a genuine quartic)")
    coeffs = np.array([0.75 * A * A, A * B, 0.0, -1.5 * A * C, -0.5 * B * C])
    z = np.roots(coeffs)
    # polish with Newton on the real parts; the companion eigenvalues of a
    # badly scaled quartic can be off in the last digits
    d = np.polyder(coeffs)
    real = []
    for zk in z:
        if abs(zk.imag) > 1e-7 * max(abs(zk), 1e-300):
            continue
        u = zk.real
        for _ in range(4):
            du = np.polyval(d, u)
            if du == 0:
                break
            step = np.polyval(coeffs, u) / du
            if not np.isfinite(step):
                break
            u -= step
        real.append(u)
    real.sort()
    clusters: list[list[float]] = []
    for u in real:
        if clusters and abs(u - clusters[-1][-1]) <= 1e-6 * max(abs(u), abs(clusters[-1][-1]), 1e-300):
            clusters[-1].append(u)
        else:
            clusters.append([u])
    lo, hi = window
    roots = [
        float(np.mean(c)) for c in clusters if len(c) % 2 == 1 and lo <= np.mean(c) <= hi
    ]
    return QuarticRoots(len(roots), roots, z)


@dataclass
class Classification:
    type: str
    singularities: list
    evidence: dict = field(default_factory=dict)

    @property
    def count(self) -> int:
        return len(self.singularities)


def type_from_count(n: int) -> str:
    if n in (0, 1, 2):
        return f"Type{n + 1}"
    return f"unclassified({n})"


def classify_indicatrix(x, params: ModelParams, window=DEFAULT_WINDOW) -> Classification:
    """Type1/2/3 from the number of Delta2 sign changes in u = xidot/rdot over ``window``."""
    A, B, C = _abc(x, params)
    roots = find_singularities(params, x, window=window, family="u")
    residuals = [
        float(abs(delta2_value(A, B, C, u)) / delta2_scale(A, B, C, u)) for u in roots
    ]
    evidence = {
        "window": [float(window[0]), float(window[1])],
        "variable": "u",
        "A": A,
        "B": B,
        "C": C,
        "root_residuals": residuals,
    }
    return Classification(type_from_count(len(roots)), roots, evidence)
