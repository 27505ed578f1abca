"""Explicit formulas for g, C, G and N in terms of A, B, C and their partials.

Everything here is plain float arithmetic on :class:`~monofinsler.model.Coefficients`;
no jets.  The spray numerators are written as polynomials in
``(xidot, rdot, phidot)`` so the connection follows from the quotient rule
with hand-coded monomial derivatives.
"""
from __future__ import annotations

import numpy as np

from ..model import Coefficients, FiberPoleError, delta2_value


def _u(y):
    xi, rd, _ = y
    if rd == 0:
        raise FiberPoleError(0.0)
    return xi / rd


def metric(coef: Coefficients, x, y) -> np.ndarray:
    A, B, C = coef.A, coef.B, coef.C
    u = _u(y)
    r = x[1]
    g = np.zeros((3, 3))
    g[0, 0] = 3 * A * u + B
    g[0, 1] = g[1, 0] = -1.5 * A * u**2
    g[1, 1] = A * u**3 - C / 2
    g[2, 2] = -(C / 2) * r**2
    return g


def minors(coef: Coefficients, x, y) -> tuple[float, float, float]:
    A, B, C = coef.A, coef.B, coef.C
    u = _u(y)
    d1 = 3 * A * u + B
    d2 = delta2_value(A, B, C, u)
    d3 = -(C / 2) * x[1] ** 2 * d2
    return d1, d2, d3


def cartan(coef: Coefficients, x, y) -> np.ndarray:
    """Cartan tensor; C_112 carries 1/rdot^2 (half the rdot-derivative of g_11)."""
    A = coef.A
    xi, rd, _ = y
    _u(y)
    out = np.zeros((3, 3, 3))
    vals = {
        (0, 0, 0): 1.5 * A / rd,
        (0, 0, 1): -1.5 * A * xi / rd**2,
        (0, 1, 1): 1.5 * A * xi**2 / rd**3,
        (1, 1, 1): -1.5 * A * xi**3 / rd**4,
    }
    for (i, j, k), v in vals.items():
        for p in {(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)}:
            out[p] = v
    return out


def _metric_x_partials(coef: Coefficients, x, y):
    A_t, A_r, B_t, B_r, C = coef.A_t, coef.A_r, coef.B_t, coef.B_r, coef.C
    u = _u(y)
    return dict(
        g11_t=3 * A_t * u + B_t,
        g11_r=3 * A_r * u + B_r,
        g12_t=-1.5 * A_t * u**2,
        g12_r=-1.5 * A_r * u**2,
        g22_t=A_t * u**3,
        g22_r=A_r * u**3,
        g33_r=-C * x[1],
    )


def spray(coef: Coefficients, x, y, printed: bool = False) -> np.ndarray:
    """G^i in the bracketed form: Delta2 denominators, partials of g_ij.

    ``printed=True`` reproduces the uncorrected variant whose last-but-one
    B-bracket term reads ``dg22/dr * xidot^2``; it disagrees with the spray
    away from xidot = rdot and is kept for comparison only.
    """
    A, B, C = coef.A, coef.B, coef.C
    xi, rd, ph = y
    r = x[1]
    d = _metric_x_partials(coef, x, y)
    d2 = minors(coef, x, y)[1]
    G1 = A / (4 * d2) * (
        d["g11_t"] * xi**5 / rd**3
        + (0.5 * d["g11_r"] + 3 * d["g12_t"]) * xi**4 / rd**2
        + (2 * d["g12_r"] + 2 * d["g22_t"]) * xi**3 / rd
        + 1.5 * d["g22_r"] * xi**2
        - 1.5 * d["g33_r"] * (xi * ph / rd) ** 2
    ) - C / (8 * d2) * (
        d["g11_t"] * xi**2 + 2 * d["g11_r"] * xi * rd + (2 * d["g12_r"] - d["g22_t"]) * rd**2
    )
    G2 = 3 * A / (4 * d2) * (
        0.5 * d["g11_t"] * xi**4 / rd**2
        + 2 * d["g12_t"] * xi**3 / rd
        + (d["g12_r"] + 1.5 * d["g22_t"]) * xi**2
        + d["g22_r"] * xi * rd
        - d["g33_r"] * xi * ph**2 / rd
    ) + B / (4 * d2) * (
        (2 * d["g12_t"] - d["g11_r"]) * xi**2
        + 2 * d["g22_t"] * xi * rd
        + d["g22_r"] * (xi if printed else rd) ** 2  # rdot^2 is what the definition gives
        - d["g33_r"] * ph**2
    )
    G3 = rd * ph / r
    return np.array([G1, G2, G3])


# -- polynomial form: G^i = P_i / (2 Q), Q = 4 rdot^4 Delta2 ------------------
# monomials are (coefficient, exponent of xidot, of rdot, of phidot)

def _numerators(coef: Coefficients, x):
    A, B, C = coef.A, coef.B, coef.C
    A_t, A_r, B_t, B_r = coef.A_t, coef.A_r, coef.B_t, coef.B_r
    r = x[1]
    P1 = [
        (A * A_t, 6, 0, 0),
        (2 * A * B_t, 5, 1, 0),
        (A * B_r, 4, 2, 0),
        (-2 * A_t * C, 3, 3, 0),
        (-(3 * A_r + B_t) * C, 2, 4, 0),
        (3 * A * C * r, 2, 2, 2),
        (-2 * B_r * C, 1, 5, 0),
    ]
    P2 = [
        (3 * A * B_t - 3 * A * A_r - 2 * A_t * B, 4, 2, 0),
        (-4 * A_r * B, 3, 3, 0),
        (-2 * B * B_r, 2, 4, 0),
        (6 * A * C * r, 1, 3, 2),
        (2 * B * C * r, 0, 4, 2),
    ]
    Q = [
        (3 * A * A, 4, 0, 0),
        (4 * A * B, 3, 1, 0),
        (-6 * A * C, 1, 3, 0),
        (-2 * B * C, 0, 4, 0),
    ]
    return P1, P2, Q


def _peval(poly, y) -> float:
    return sum(c * y[0] ** a * y[1] ** b * y[2] ** e for c, a, b, e in poly)


def _pgrad(poly, y) -> np.ndarray:
    out = np.zeros(3)
    for c, a, b, e in poly:
        exps = (a, b, e)
        for j in range(3):
            if exps[j]:
                ex = list(exps)
                ex[j] -= 1
                out[j] += c * exps[j] * y[0] ** ex[0] * y[1] ** ex[1] * y[2] ** ex[2]
    return out


def spray_polynomial(coef: Coefficients, x, y) -> np.ndarray:
    _u(y)
    P1, P2, Q = _numerators(coef, x)
    q = _peval(Q, y)
    return np.array([_peval(P1, y) / (2 * q), _peval(P2, y) / (2 * q), y[1] * y[2] / x[1]])


def connection(coef: Coefficients, x, y) -> np.ndarray:
    """N^i_j = dG^i/dy^j via the quotient rule on P_i / (2 Q)."""
    _u(y)
    r = x[1]
    P1, P2, Q = _numerators(coef, x)
    q = _peval(Q, y)
    dq = _pgrad(Q, y)
    N = np.zeros((3, 3))
    for i, P in enumerate((P1, P2)):
        p = _peval(P, y)
        N[i] = (_pgrad(P, y) * q - p * dq) / (2 * q * q)
    N[2] = [0.0, y[2] / r, y[1] / r]
    return N


def printed_connection(coef: Coefficients, x, y) -> np.ndarray:
    """Connection components in the single-Delta2 bracket form.

    Kept for comparison only: the (1,1), (1,2), (2,1), (2,2) entries of this
    form omit the derivative of the Delta2 denominator and do not equal
    dG^i/dy^j.  The third column and third row do.
    """
    A, B, C = coef.A, coef.B, coef.C
    A_t, A_r, B_t, B_r = coef.A_t, coef.A_r, coef.B_t, coef.B_r
    xi, rd, ph = y
    r = x[1]
    d2 = minors(coef, x, y)[1]
    N = np.zeros((3, 3))
    N[0, 0] = A / (4 * d2) * (
        -3 * A_t * xi**5 / rd**4 + 6 * A_t * xi**5 / rd**3 + 5 * B_t * xi**4 / rd**3
        + 2 * B_r * xi**3 / rd**2 + 3 * C * r * xi * ph**2 / rd**2
    ) - C / (4 * d2) * (3 * A_t * xi**2 / rd + (B_t + 3 * A_r) * xi + B_r * rd)
    N[0, 1] = A / (4 * d2) * (
        -2 * A_t * xi**6 / rd**5 - 3 * B_t * xi**5 / rd**4 - B_r * xi**4 / rd**3
        - 3 * C * r * xi**2 * ph**2 / rd**3
    ) - C / (8 * d2) * (-2 * A_t * xi**3 / rd**2 + B_r * xi)
    N[0, 2] = 3 * A * C / (4 * d2) * r * xi**2 * ph / rd**2
    N[1, 0] = 3 * A / (4 * d2) * (C * r + 2 * B_t - 2 * A_r) * xi**3 / rd**2 - B / (2 * d2) * (
        2 * A_t * xi**3 / rd**2 + 3 * A_r * xi**2 / rd + B_t * xi
    )
    N[1, 1] = 3 * A / (4 * d2) * ((A_r - B_t) * xi**4 / rd**3 - C * r * xi * ph**2 / rd**2) + B / (
        2 * d2
    ) * (A_t * xi**4 / rd**3 + A_r * xi**3 / rd**2)
    N[1, 2] = 3 * A * C / (2 * d2) * r * xi * ph / rd + B * C / (2 * d2) * r * ph
    N[2] = [0.0, ph / r, rd / r]
    return N
