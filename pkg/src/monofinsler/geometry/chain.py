"""Jet-based evaluation of the invariant chain g -> G -> N -> delta/delta x -> Gamma -> R.

Every quantity is carried as a jet in all six phase-space variables, so
horizontal derivatives of the connection-dependent objects come for free.
Base and fiber values may be arrays of equal shape (a batch of points); all
outputs then carry that batch shape in front of their tensor axes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import jets
from ..jets import Jet, JetContext, einsum
from ..model import (
    F2_jet,
    ModelParams,
    _check_base,
    _check_fiber,
    coefficient_jets,
    fundamental_F2,
)

X_AXES = (0, 1, 2)
Y_AXES = (3, 4, 5)

# truncation order each stage needs to yield point values
REQUIRED_ORDER = {
    "metric": 2,
    "cartan": 3,
    "spray": 2,
    "connection": 3,
    "christoffel": 3,
    "curvature": 4,
    "berwald": 5,
}


def grad(j: Jet, axes) -> Jet:
    """Stack partial derivatives along a new trailing tensor axis."""
    return jets.stack([j.deriv(a) for a in axes], axis=-1)


def third_y_derivatives(j: Jet, offset: int = 3) -> np.ndarray:
    """Point values of d^3 j / dy^a dy^b dy^c, trailing axes (a, b, c).

    The fiber variables are ``offset``, ``offset + 1``, ``offset + 2`` of the jet.
    """
    out = np.empty(j.shape + (3, 3, 3))
    for a in range(3):
        for b in range(3):
            for c in range(3):
                alpha = [0] * j.ctx.nvars
                for k in (a, b, c):
                    alpha[offset + k] += 1
                out[..., a, b, c] = jets.extract_partial(j, alpha)
    return out


def inverse3(g: Jet) -> tuple[Jet, Jet]:
    """Inverse and determinant of a 3x3 matrix of jets (adjugate formula)."""

    def e(i, j):
        return g[..., i, j]

    c = g.c
    if not np.any(c[..., 0:2, 2, :]) and not np.any(c[..., 2, 0:2, :]):
        # block-diagonal: invert the (0,1) block and g_22 separately so the
        # structural zeros of g^{-1} and of everything built on it stay exact
        d2 = e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0)
        inv2 = jets.reciprocal(d2, "det(g)")
        inv3 = jets.reciprocal(e(2, 2), "det(g)")
        zero = 0.0 * e(0, 2)
        rows = [
            [e(1, 1) * inv2, -e(0, 1) * inv2, zero],
            [-e(1, 0) * inv2, e(0, 0) * inv2, zero],
            [zero, zero, inv3],
        ]
        inv = jets.stack([jets.stack(r, axis=-1) for r in rows], axis=-2)
        return inv, d2 * e(2, 2)

    cof = [[None] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            r0, r1 = [k for k in range(3) if k != i]
            c0, c1 = [k for k in range(3) if k != j]
            minor = e(r0, c0) * e(r1, c1) - e(r0, c1) * e(r1, c0)
            cof[i][j] = minor if (i + j) % 2 == 0 else -minor
    det = e(0, 0) * cof[0][0] + e(0, 1) * cof[0][1] + e(0, 2) * cof[0][2]
    inv_det = jets.reciprocal(det, "det(g)")
    adj = jets.stack([jets.stack([cof[j][i] for j in range(3)], axis=-1) for i in range(3)], axis=-2)
    return adj * inv_det.expand(-1).expand(-1), det


def horizontal(f: Jet, N: Jet) -> Jet:
    """delta f / delta x^s = df/dx^s - N^m_s df/dy^m, appended as the last axis."""
    dx = grad(f, X_AXES)
    dy = grad(f, Y_AXES)
    order = min(dy.order, N.order)
    rank = len(f.shape) - len(N.shape) + 2  # tensor rank of f beyond the batch axes
    idx = "abcdefgh"[:rank]
    return dx - einsum(f"{idx}m,ms->{idx}s", dy.truncate(order), N.truncate(order))


@dataclass
class Chain:
    """Jets of the invariants at one point (or a batch of points).

    ``cartan`` and ``berwald`` hold point values (arrays), read off Taylor
    coefficients so they are exactly symmetric.
    """

    F2: Jet
    g: Jet | None = None
    g_inv: Jet | None = None
    det: Jet | None = None
    cartan: np.ndarray | None = None
    G: Jet | None = None
    N: Jet | None = None
    christoffel: Jet | None = None
    curvature: Jet | None = None
    berwald: np.ndarray | None = None  # point values only


_DEPENDS = {
    "metric": (),
    "cartan": ("metric",),
    "spray": ("metric",),
    "connection": ("spray",),
    "christoffel": ("connection",),
    "curvature": ("christoffel",),
    "berwald": ("connection",),
}


def _closure(want) -> set:
    out = set()
    todo = list(want)
    while todo:
        w = todo.pop()
        if w not in _DEPENDS:
            raise ValueError(f"unknown stage {w!r}")
        if w not in out:
            out.add(w)
            todo.extend(_DEPENDS[w])
    return out


def evaluate(x, y, params: ModelParams, want=("berwald",), order: int | None = None) -> Chain:
    """Run the jet chain at (x, y) for the stages in ``want`` (plus prerequisites).

    ``order`` defaults to the minimum the stages need; larger orders only add
    headroom.  Raises :class:`~monofinsler.jets.JetTruncationError` if the
    requested order is too small.
    """
    if isinstance(want, str):
        want = (want,)
    want = _closure(want)
    need = max(REQUIRED_ORDER[w] for w in want)
    if order is None:
        order = need
    if order < need:
        raise jets.JetTruncationError(f"stages {sorted(want)} need jet order >= {need}, got {order}")

    ctx = JetContext(6, order)
    F = F2_jet(x, y, params, ctx)
    ch = Chain(F2=F)
    dFy = grad(F, Y_AXES)  # order n-1
    hess = grad(dFy, Y_AXES)
    ch.g = 0.25 * (hess + hess.transpose(1, 0))  # order n-2, exactly symmetric
    ch.g_inv, ch.det = inverse3(ch.g)
    if "cartan" in want:
        ch.cartan = 0.25 * third_y_derivatives(F)
    if "spray" not in want:
        return ch

    # G^i = 1/4 g^{il} (d2F/dx^k dy^l y^k - dF/dx^l)
    yv = jets.stack([jets.jet_var(3 + k, y[k], ctx) for k in range(3)], axis=-1)
    mixed = grad(dFy, X_AXES)  # [l, k], order n-2
    dFx = grad(F, X_AXES)  # [l], order n-1
    W = einsum("lk,k->l", mixed, yv) - dFx
    ch.G = 0.25 * einsum("il,l->i", ch.g_inv, W)
    if "connection" not in want:
        return ch
    ch.N = grad(ch.G, Y_AXES)  # [i, j] = dG^i/dy^j, order n-3

    if "christoffel" in want:
        dg = horizontal(ch.g, ch.N)  # [a, b, s] = delta_s g_ab
        # T[s, j, k] = (delta_k g_sj + delta_j g_ks) - delta_s g_jk, symmetric in (j, k)
        T = (dg + dg.transpose(1, 2, 0)) - dg.transpose(2, 0, 1)
        ch.christoffel = 0.5 * einsum("is,sjk->ijk", ch.g_inv, T)
    if "curvature" in want:
        Gam = ch.christoffel
        dGam = horizontal(Gam, ch.N)  # [i, j, m, s] = delta_s Gamma^i_jm
        P = einsum("ihk,hjl->ijkl", Gam, Gam)
        ch.curvature = (dGam.transpose(0, 1, 3, 2) - dGam) + (P - P.transpose(0, 1, 3, 2))
    if "berwald" in want:
        ch.berwald = third_y_derivatives(ch.G)  # [i, j, k, l] = d3 G^i / dy^j dy^k dy^l
    return ch


def berwald_reduced(x, y, params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Berwald tensor and g^{-1} from jets in (x^k, y) one base direction at a time.

    G needs F only to first order in x, so each base direction gets its own
    four-variable jet and everything after that lives in the three fiber
    variables.  Much cheaper than the full chain; the two routes are
    cross-checked in the tests.
    """
    _check_base(x[0], x[1])
    _check_fiber(y[1])
    ctx = JetContext(4, REQUIRED_ORDER["berwald"])
    yv = [jets.jet_var(1 + k, y[k], ctx) for k in range(3)]
    fiber = (1, 2, 3)
    dFx, mixed = [], []
    Fy = None
    for k in range(3):
        xs = [jets.jet_const(v, ctx) for v in x]
        xs[k] = jets.jet_var(0, x[k], ctx)
        positions = (0 if k == 0 else None, 0 if k == 1 else None)
        F = fundamental_F2(xs, yv, params, coefficient_jets(x, params, ctx, positions))
        if Fy is None:
            Fy = jets.restrict(F, fiber)
        d = F.deriv(0)
        dFx.append(jets.restrict(d, fiber).truncate(3))
        mixed.append(jets.stack([jets.restrict(d.deriv(1 + l), fiber) for l in range(3)], axis=-1))
    dFy = grad(Fy, (0, 1, 2))
    hess = grad(dFy, (0, 1, 2))
    g = 0.25 * (hess + hess.transpose(1, 0))
    g_inv, _ = inverse3(g)
    ctx3 = g.ctx
    y3 = jets.stack([jets.jet_var(k, y[k], ctx3) for k in range(3)], axis=-1)
    M = jets.stack(mixed, axis=-1)  # [l, k] = d2F / dy^l dx^k
    W = einsum("lk,k->l", M, y3) - jets.stack(dFx, axis=-1)
    G = 0.25 * einsum("il,l->i", g_inv, W)
    return third_y_derivatives(G, offset=0), values(g_inv)


def values(j):
    if j is None or isinstance(j, np.ndarray):
        return j
    return j.c[..., 0].copy()


def ricci_trace(g_inv: np.ndarray, T: np.ndarray) -> np.ndarray:
    """g^{ij} T^k_{ikj} on point values (batch axes allowed)."""
    ric = np.einsum("...kikj->...ij", T)
    return np.einsum("...ij,...ij->...", g_inv, ric)
