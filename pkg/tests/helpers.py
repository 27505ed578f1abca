"""Shared sampling helpers and independent oracles for the test suite."""
from __future__ import annotations

import math

import numpy as np

from monofinsler.model import ModelParams, coefficient_functions, delta2_scale, delta2_value

SAMPLE_X = (0.01, 0.1, 0.0)
SAMPLE_Y = (0.001, 0.01, 0.0)
SAMPLE_PARAMS = ModelParams(V=0.1)


def _signed_log(rng, lo, hi):
    return float(rng.choice((-1.0, 1.0)) * 10.0 ** rng.uniform(lo, hi))


def random_params(rng, mode: str) -> ModelParams:
    if mode == "physical":
        return ModelParams(V=10.0 ** rng.uniform(-3, 1))
    return ModelParams.frozen(
        _signed_log(rng, 0, 8),
        _signed_log(rng, -3, 0),
        4.23e-8 * 10.0 ** rng.uniform(-1, 1),
    )


def random_point(rng, params: ModelParams, min_delta2: float = 1e-6):
    """Admissible (x, y): rdot in +-[1e-3, 1] and |Delta2| above ``min_delta2`` of its scale."""
    while True:
        x = (rng.uniform(0.0, 0.05), rng.uniform(0.01, 0.5), rng.uniform(0.0, 2 * math.pi))
        y = (_signed_log(rng, -4, -1), _signed_log(rng, -3, 0), _signed_log(rng, -4, -1))
        A, B, C = (float(v) for v in coefficient_functions(x[0], x[1], params))
        u = y[0] / y[1]
        if abs(delta2_value(A, B, C, u)) > min_delta2 * delta2_scale(A, B, C, u):
            return x, y


def random_cases(seed: int, n: int, mode: str, min_delta2: float = 1e-6):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        p = random_params(rng, mode)
        x, y = random_point(rng, p, min_delta2)
        out.append((x, y, p))
    return out


def rel(a, b) -> float:
    """Max |a - b| / max(|b|) over all components."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    scale = np.max(np.abs(b))
    return float(np.max(np.abs(a - b)) / scale) if scale > 0 else float(np.max(np.abs(a)))


def ei_series_oracle(u: float) -> float:
    """Ei(u) = gamma + ln u + sum u^k / (k k!) in 60-digit arithmetic."""
    import mpmath

    with mpmath.workdps(60):
        U = mpmath.mpf(u)
        s = mpmath.euler + mpmath.log(U)
        term = mpmath.mpf(1)
        k = 1
        while True:
            term *= U / k
            add = term / k
            s += add
            if abs(add) < mpmath.mpf(10) ** -50 * abs(s):
                break
            k += 1
        return float(s)


def riemann_oracle(metric, coords, point):
    """Christoffel symbols, Riemann tensor and scalar of a metric depending on x only.

    ``metric`` is a sympy Matrix, or a list of diagonal entries, in ``coords``; the result uses the
    convention R^i_jkl = d_k Gamma^i_jl - d_l Gamma^i_jk + Gamma^i_hk Gamma^h_jl
    - Gamma^i_hl Gamma^h_jk and scalar g^{ij} R^k_{ikj}.
    """
    import sympy as sp

    n = len(coords)
    g = metric if isinstance(metric, sp.MatrixBase) else sp.diag(*metric)
    gi = g.inv()
    Gam = [[[sp.simplify(sum(gi[i, s] * (sp.diff(g[s, j], coords[k]) + sp.diff(g[k, s], coords[j]) - sp.diff(g[j, k], coords[s])) for s in range(n)) / 2)
             for k in range(n)] for j in range(n)] for i in range(n)]
    R = [[[[sp.diff(Gam[i][j][l], coords[k]) - sp.diff(Gam[i][j][k], coords[l])
            + sum(Gam[i][h][k] * Gam[h][j][l] - Gam[i][h][l] * Gam[h][j][k] for h in range(n))
            for l in range(n)] for k in range(n)] for j in range(n)] for i in range(n)]
    subs = dict(zip(coords, point))
    Gv = np.array([[[float(Gam[i][j][k].subs(subs)) for k in range(n)] for j in range(n)] for i in range(n)])
    Rv = np.array([[[[float(R[i][j][k][l].subs(subs)) for l in range(n)] for k in range(n)] for j in range(n)] for i in range(n)])
    giv = np.array(gi.subs(subs), dtype=float)
    scalar = float(np.einsum("ij,kikj->", giv, Rv))
    return Gv, Rv, scalar


def mp_coefficients(t, r, params: ModelParams):
    """(A, B, C) transcribed in 50-digit arithmetic with mpmath's Ei."""
    import mpmath

    with mpmath.workdps(50):
        t, r = mpmath.mpf(t), mpmath.mpf(r)
        m, c, p, V = (mpmath.mpf(v) for v in (params.m, params.c, params.p, params.V))
        if params.mode == "frozen":
            return mpmath.mpf(params.frozen_A), mpmath.mpf(params.frozen_B), mpmath.mpf(params.frozen_C)
        w = V * t
        e = mpmath.exp(2 * w / r)
        poly = (-mpmath.mpf(4) / 3 * r**5 + mpmath.mpf(16) / 15 * w * r**4 + w**2 * r**3 / 30
                + w**3 * r**2 / 45 + w**4 * r / 45 + 2 * w**5 / 45)
        ei = mpmath.ei(2 * w / r) if w > 0 else 0
        A = p * V / c * r**5 * e
        B = m * c**2 - p * (poly * e - mpmath.mpf(4) / 45 * w**6 / r * ei)
        return A, B, m * c**2


def mp_F2(z, params: ModelParams):
    """F^2 at z = (t, r, phi, xidot, rdot, phidot) in 50-digit arithmetic."""
    import mpmath

    with mpmath.workdps(50):
        t, r, _, xi, rd, ph = (mpmath.mpf(v) for v in z)
        A, B, C = mp_coefficients(t, r, params)
        return A * xi**3 / rd + B * xi**2 - C * (rd**2 + r**2 * ph**2) / 2


def mp_partial(f, z, alpha, rel_step=1e-6):
    """Central-difference partial of order 1 or 2 (``alpha`` a 6-index) in mpmath."""
    import mpmath

    with mpmath.workdps(50):
        idx = [k for k, n in enumerate(alpha) for _ in range(n)]
        h = [mpmath.mpf(rel_step) * max(abs(mpmath.mpf(v)), mpmath.mpf("1e-3")) for v in z]
        total = mpmath.mpf(0)
        signs = [(1,), (-1,)] if len(idx) == 1 else [(1, 1), (1, -1), (-1, 1), (-1, -1)]
        for s in signs:
            zz = [mpmath.mpf(v) for v in z]
            for k, sk in zip(idx, s):
                zz[k] += sk * h[k]
            total += (s[0] * (s[1] if len(s) > 1 else 1)) * f(zz)
        denom = 2 * h[idx[0]] if len(idx) == 1 else 4 * h[idx[0]] * h[idx[1]]
        return float(total / denom)
