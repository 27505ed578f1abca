"""Compressed-monolayer model: constants, metric coefficients, potential, F^2.

Base coordinates are ``x = (t, r, phi)``; fiber coordinates are the
normalized velocities ``y = (xidot, rdot, phidot)`` (physical radial and
angular speeds divided by ``c``).  The fundamental function is

    F^2 = A xidot^3 / rdot + B xidot^2 - C (rdot^2 + r^2 phidot^2) / 2

with ``A`` already divided by ``c``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from . import jets
from .jets import Jet, JetContext, JetPoleError
from .special import EULER_GAMMA, EiDomainError, exp_integral_ei  # noqa: F401

MOLECULAR_MASS = 47e-26  # kg
LIGHT_SPEED = 3e8  # m/s
COUPLING_P = 8.93434e9  # J/m^5
VACUUM_PERMITTIVITY = 8.8541878128e-12  # F/m

PHYSICAL = "physical"
FROZEN = "frozen"


class ModelDomainError(ValueError):
    pass


class FiberPoleError(JetPoleError):
    """The fiber coordinate ``rdot`` is zero, where F^2 has a pole."""

    def __init__(self, value=0.0):
        super().__init__("rdot", value)
        self.args = (f"fiber pole: rdot = {value:g}",)

    def __str__(self) -> str:
        return self.args[0]


@dataclass(frozen=True)
class ModelParams:
    m: float = MOLECULAR_MASS
    c: float = LIGHT_SPEED
    p: float = COUPLING_P
    V: float = 0.1
    mode: str = PHYSICAL
    frozen_A: float = 0.0
    frozen_B: float = 0.0
    frozen_C: float = MOLECULAR_MASS * LIGHT_SPEED**2
    rho0: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "V", abs(float(self.V)))
        if self.mode not in (PHYSICAL, FROZEN):
            raise ModelDomainError(f"mode must be 'physical' or 'frozen', got {self.mode!r}")
        if not self.m > 0 or not self.c > 0:
            raise ModelDomainError("m and c must be positive")
        if self.p < 0:
            raise ModelDomainError("p must be non-negative")
        if self.mode == FROZEN and not self.frozen_C > 0:
            raise ModelDomainError("frozen_C must be positive")

    @classmethod
    def frozen(cls, A: float, B: float, C: float, **kw) -> "ModelParams":
        return cls(mode=FROZEN, frozen_A=A, frozen_B=B, frozen_C=C, **kw)

    def with_(self, **kw) -> "ModelParams":
        return replace(self, **kw)

    @property
    def C(self) -> float:
        return self.frozen_C if self.mode == FROZEN else self.m * self.c**2


class BasePoint(NamedTuple):
    t: float
    r: float
    phi: float = 0.0


class FiberVector(NamedTuple):
    xidot: float
    rdot: float
    phidot: float = 0.0


@dataclass(frozen=True)
class Coefficients:
    A: float
    B: float
    C: float
    A_t: float = 0.0
    A_r: float = 0.0
    B_t: float = 0.0
    B_r: float = 0.0


def capacitor_potential(q: float, rho: float, D: float, eps_r: float) -> float:
    """Potential across the double layer, ``q rho D / (eps_r eps_0)``.

    Reference helper only: the metric depends on the aggregate coupling
    ``p`` and never on ``q``, ``D`` or ``eps_r`` separately.
    """
    return q * rho * D / (eps_r * VACUUM_PERMITTIVITY)


def density_rho(r0: float, t: float, rdot: float, rho0: float = 1.0) -> float:
    """Surface density ``rho0 * sqrt(r0 / (r0 - |rdot| t))`` of the compressed film."""
    rem = r0 - abs(rdot) * t
    if not rem > 0:
        raise ModelDomainError(f"monolayer collapsed: r0 - |rdot| t = {rem!r} <= 0")
    return rho0 * math.sqrt(r0 / rem)


# -- A, B as functions of (t, r) ---------------------------------------------

def _bracket_poly(w, r):
    """-4/3 r^5 + 16/15 w r^4 + 1/30 w^2 r^3 + 1/45 w^3 r^2 + 1/45 w^4 r + 2/45 w^5."""
    r2 = r * r
    r3 = r2 * r
    w2 = w * w
    w3 = w2 * w
    return (
        (-4.0 / 3.0) * (r3 * r2)
        + (16.0 / 15.0) * (w * r3 * r)
        + (1.0 / 30.0) * (w2 * r3)
        + (1.0 / 45.0) * (w3 * r2)
        + (1.0 / 45.0) * (w3 * w * r)
        + (2.0 / 45.0) * (w3 * w2)
    )


def _ei_term(w, r):
    """4/45 w^6 / r * Ei(2w/r); zero where w vanishes (limit of w^6 ln w)."""
    if isinstance(w, Jet):
        w0 = w.c[..., 0]
        if np.all(w0 == 0):
            return 0.0
        u = 2.0 * w / r
        mask = (w0 > 0).astype(float)
        safe = u + (1.0 - mask)  # replace zero arguments by 1 before Ei
        w6 = w**6
        return (4.0 / 45.0) * jets.ei(safe) * w6 / r * mask
    w = np.asarray(w, dtype=float)
    u = 2.0 * w / r
    out = np.zeros(np.broadcast(w, r).shape)
    pos = np.broadcast_to(w > 0, out.shape)
    if np.any(pos):
        wb, rb, ub = (np.broadcast_to(v, out.shape) for v in (w, r, u))
        out[pos] = (4.0 / 45.0) * wb[pos] ** 6 / rb[pos] * exp_integral_ei(ub[pos])
    return out if out.ndim else float(out)


def _exp(z):
    if isinstance(z, Jet):
        return jets.exp(z)
    if np.any(np.asarray(z) > 709.78):
        raise OverflowError(f"exp overflow: exponent {float(np.max(z))!r}")
    return np.exp(z)


def coefficient_functions(t, r, params: ModelParams):
    """(A, B, C) at (t, r); ``t`` and ``r`` may be floats, arrays or jets.

    ``A`` is the normalized coefficient (divided by ``c``).
    """
    if params.mode == FROZEN:
        return params.frozen_A, params.frozen_B, params.frozen_C
    V = params.V
    mc2 = params.m * params.c**2
    if V == 0.0:
        r5 = r * r * r * r * r
        return 0.0 * r, mc2 + params.p * (4.0 / 3.0) * r5, mc2
    w = V * t
    e = _exp(2.0 * w / r)
    r5 = r * r * r * r * r
    A = (params.p * V / params.c) * r5 * e
    B = mc2 - params.p * (_bracket_poly(w, r) * e - _ei_term(w, r))
    return A, B, mc2


def _check_base(t, r):
    if not np.all(np.asarray(r) > 0):
        raise ModelDomainError(f"r must be positive, got {r!r}")
    if not np.all(np.asarray(t) >= 0):
        raise ModelDomainError(f"t must be non-negative, got {t!r}")


def coefficients(x, params: ModelParams) -> Coefficients:
    """A, B, C and the base partials A_t, A_r, B_t, B_r at ``x``."""
    t, r = float(x[0]), float(x[1])
    _check_base(t, r)
    if params.mode == FROZEN:
        return Coefficients(params.frozen_A, params.frozen_B, params.frozen_C)
    ctx = JetContext(2, 1)
    tj, rj = jets.jet_var(0, t, ctx), jets.jet_var(1, r, ctx)
    A, B, C = coefficient_functions(tj, rj, params)
    if not isinstance(A, Jet):
        A = jets.jet_const(A, ctx) + 0.0 * tj
    return Coefficients(
        A=A.value,
        B=B.value,
        C=C,
        A_t=jets.extract_partial(A, (1, 0)),
        A_r=jets.extract_partial(A, (0, 1)),
        B_t=jets.extract_partial(B, (1, 0)),
        B_r=jets.extract_partial(B, (0, 1)),
    )


def potential_Us(x, rdot_phys: float, params: ModelParams) -> float:
    """Electro-capillary potential energy [J] at base point ``x``.

    ``rdot_phys`` is the physical radial speed (not normalized by ``c``).
    """
    t, r = float(x[0]), float(x[1])
    _check_base(t, r)
    if rdot_phys == 0:
        raise ModelDomainError("singular input: rdot = 0")
    V = params.V
    w = V * t
    e = math.exp(2.0 * w / r)
    bracket = _bracket_poly(w, r) - r**5 * V / rdot_phys
    return -params.p * (bracket * e - _ei_term(w, r))


# -- fundamental function ------------------------------------------------------

def _check_fiber(rdot):
    if isinstance(rdot, Jet):
        rdot = rdot.c[..., 0]
    if np.any(np.asarray(rdot) == 0):
        raise FiberPoleError(0.0)


def fundamental_F2(x, y, params: ModelParams, coeffs=None):
    """F^2 at (x, y).  Components may be floats, arrays or jets.

    ``coeffs`` optionally supplies (A, B, C) already evaluated at ``x``.
    """
    t, r = x[0], x[1]
    xi, rd, ph = y
    _check_fiber(rd)
    A, B, C = coefficient_functions(t, r, params) if coeffs is None else coeffs
    xi2 = xi * xi
    if isinstance(rd, Jet):
        cubic = jets.div(xi2 * xi, rd, "rdot")
    else:
        cubic = xi2 * xi / rd
    return A * cubic + B * xi2 - 0.5 * C * (rd * rd + r * r * (ph * ph))


def phase_space_jets(x, y, ctx: JetContext) -> list[Jet]:
    """Seed jets for (t, r, phi, xidot, rdot, phidot)."""
    if ctx.nvars != 6:
        raise ValueError("phase-space jets need a 6-variable context")
    return jets.jet_vars(list(x) + list(y), ctx)


def coefficient_jets(x, params: ModelParams, ctx: JetContext, positions=(0, 1)):
    """(A, B, C) as jets of ``ctx`` in the base variables at ``positions``.

    ``positions`` gives where t and r sit in ``ctx`` (None for one held
    fixed).  The transcendental work happens in a context with only those
    variables, which is far cheaper than working in the full one.
    """
    live = [i for i, p in enumerate(positions) if p is not None]
    if params.mode == FROZEN or not live:
        A, B, C = coefficient_functions(x[0], x[1], params)
        return A, B, C
    sub = JetContext(len(live), ctx.max_order)
    tr = [x[0], x[1]]
    for n, i in enumerate(live):
        tr[i] = jets.jet_var(n, x[i], sub)
    for i in (0, 1):
        if i not in live:
            tr[i] = jets.jet_const(x[i], sub)
    A, B, C = coefficient_functions(tr[0], tr[1], params)
    where = [positions[i] for i in live]
    return jets.embed(A, where, ctx), jets.embed(B, where, ctx), C


def F2_jet(x, y, params: ModelParams, ctx: JetContext) -> Jet:
    """Jet of F^2 in all six phase-space variables at (x, y)."""
    _check_base(x[0], x[1])
    _check_fiber(y[1])
    v = phase_space_jets(x, y, ctx)
    return fundamental_F2(v[:3], v[3:], params, coefficient_jets(x, params, ctx))


def delta2_value(A, B, C, u):
    """Second Jacobi minor as a quartic in ``u = xidot / rdot``."""
    return 0.75 * A * A * u**4 + A * B * u**3 - 1.5 * A * C * u - 0.5 * B * C


def delta2_scale(A, B, C, u):
    """Sum of magnitudes of the quartic's terms (reference for pole tolerances)."""
    return (
        np.abs(0.75 * A * A * u**4)
        + np.abs(A * B * u**3)
        + np.abs(1.5 * A * C * u)
        + np.abs(0.5 * B * C)
    )
