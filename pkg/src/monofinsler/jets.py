"""Truncated multivariate Taylor arithmetic ("jets").

A :class:`Jet` stores the Taylor coefficients ``f_alpha = d^alpha f / alpha!``
of a function of ``nvars`` variables at one expansion point, for every
multi-index with ``|alpha| <= order``.  Coefficients live in a dense array
whose last axis runs over multi-indices in graded order, so truncating to a
lower order is a prefix slice.  Leading axes are free: a jet with
``c.shape == (3, 3, n)`` is a 3x3 matrix of jets, and arithmetic broadcasts
over those axes like numpy does.

Differentiating a jet of order ``n`` gives a jet of order ``n - 1``; binary
operations on jets of different orders truncate to the lower one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Sequence

import numpy as np

#: ``|b_0|`` below this raises :class:`JetPoleError` in division.
POLE_TOLERANCE = 1e-300
_EXP_MAX = 709.78


class JetError(ArithmeticError):
    pass


class JetPoleError(JetError, ZeroDivisionError):
    """Division by a jet whose constant term vanishes."""

    def __init__(self, name: str, value):
        self.name = name
        self.value = value
        super().__init__(f"pole: denominator {name} = {value!r}")


class JetDomainError(JetError, ValueError):
    pass


class JetTruncationError(JetError, ValueError):
    pass


class JetOverflowError(JetError, OverflowError):
    pass


def _ncoef(nvars: int, order: int) -> int:
    return math.comb(nvars + order, order)


@lru_cache(maxsize=None)
def _multi_indices(nvars: int, order: int) -> np.ndarray:
    rows = []
    for d in range(order + 1):
        for combo in combinations_with_replacement(range(nvars), d):
            a = [0] * nvars
            for v in combo:
                a[v] += 1
            rows.append(a)
    return np.array(rows, dtype=np.int64).reshape(-1, nvars)


class _Tables:
    """Index tables for one (nvars, order) pair."""

    def __init__(self, nvars: int, order: int):
        alphas = _multi_indices(nvars, order)
        self.alphas = alphas
        self.degree = alphas.sum(axis=1)
        self.lookup = {tuple(a): i for i, a in enumerate(alphas.tolist())}
        self.factorial = np.array(
            [math.prod(math.factorial(k) for k in a) for a in alphas.tolist()], dtype=float
        )
        self._mul = None
        self._deriv = {}

    @property
    def mul(self):
        if self._mul is None:
            ii, jj, kk = [], [], []
            alist = self.alphas.tolist()
            order = int(self.degree[-1]) if len(alist) else 0
            for i, a in enumerate(alist):
                da = self.degree[i]
                for j, b in enumerate(alist):
                    if da + self.degree[j] > order:
                        # degrees are sorted, nothing later fits either
                        break
                    ii.append(i)
                    jj.append(j)
                    kk.append(self.lookup[tuple(x + y for x, y in zip(a, b))])
            ii, jj, kk = (np.array(v, dtype=np.int64) for v in (ii, jj, kk))
            perm = np.argsort(kk, kind="stable")
            ii, jj, kk = ii[perm], jj[perm], kk[perm]
            starts = np.flatnonzero(np.r_[True, kk[1:] != kk[:-1]])
            self._mul = (ii, jj, starts)
        return self._mul

    def deriv(self, var: int):
        """(source index, factor) producing d/dx_var as an order-1 lower jet."""
        if var not in self._deriv:
            nv = self.alphas.shape[1]
            order = int(self.degree[-1])
            lower = _multi_indices(nv, order - 1)
            src = np.empty(len(lower), dtype=np.int64)
            fac = np.empty(len(lower))
            for n, a in enumerate(lower.tolist()):
                a[var] += 1
                src[n] = self.lookup[tuple(a)]
                fac[n] = a[var]
            self._deriv[var] = (src, fac)
        return self._deriv[var]


@lru_cache(maxsize=None)
def _tables(nvars: int, order: int) -> _Tables:
    return _Tables(nvars, order)


@dataclass(frozen=True)
class JetContext:
    """Number of variables and total truncation degree."""

    nvars: int = 6
    max_order: int = 6

    def __post_init__(self):
        if self.nvars < 1:
            raise ValueError("nvars must be positive")
        if self.max_order < 0:
            raise ValueError("max_order must be non-negative")

    @property
    def ncoef(self) -> int:
        return _ncoef(self.nvars, self.max_order)

    @property
    def tables(self) -> _Tables:
        return _tables(self.nvars, self.max_order)

    def lowered(self, order: int) -> "JetContext":
        return JetContext(self.nvars, order)

    def index(self, alpha: Sequence[int]) -> int:
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != self.nvars:
            raise ValueError(f"multi-index {alpha} has wrong length for {self.nvars} variables")
        if sum(alpha) > self.max_order:
            raise JetTruncationError(
                f"|alpha| = {sum(alpha)} exceeds truncation order {self.max_order}"
            )
        return self.tables.lookup[alpha]


def _shape_of(x) -> tuple:
    return np.shape(x)


class Jet:
    """Truncated Taylor expansion, possibly tensor-valued (leading axes)."""

    __slots__ = ("ctx", "c")
    __array_priority__ = 100.0

    def __init__(self, ctx: JetContext, coeffs):
        c = np.asarray(coeffs, dtype=float)
        if c.shape[-1:] != (ctx.ncoef,):
            raise ValueError(f"expected trailing axis of length {ctx.ncoef}, got shape {c.shape}")
        self.ctx = ctx
        self.c = c

    # -- structure -----------------------------------------------------
    @property
    def order(self) -> int:
        return self.ctx.max_order

    @property
    def shape(self) -> tuple:
        return self.c.shape[:-1]

    @property
    def value(self):
        v = self.c[..., 0]
        return float(v) if v.ndim == 0 else v.copy()

    def __getitem__(self, key) -> "Jet":
        if not isinstance(key, tuple):
            key = (key,)
        if any(k is Ellipsis for k in key):
            return Jet(self.ctx, self.c[key + (slice(None),)])
        return Jet(self.ctx, self.c[key + (Ellipsis, slice(None))])

    def __repr__(self) -> str:
        return f"Jet(nvars={self.ctx.nvars}, order={self.order}, shape={self.shape}, value={self.value!r})"

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise JetTruncationError(f"cannot raise order {self.order} to {order}")
        if order == self.order:
            return self
        ctx = self.ctx.lowered(order)
        return Jet(ctx, self.c[..., : ctx.ncoef])

    def sum(self, axis) -> "Jet":
        """Sum over tensor axes (axis numbers refer to :attr:`shape`)."""
        axes = (axis,) if isinstance(axis, int) else tuple(axis)
        nd = len(self.shape)
        axes = tuple(a % nd for a in axes)
        return Jet(self.ctx, self.c.sum(axis=axes))

    def swap(self, a: int, b: int) -> "Jet":
        nd = len(self.shape)
        return Jet(self.ctx, np.swapaxes(self.c, a % nd, b % nd))

    def transpose(self, *perm: int) -> "Jet":
        nd = len(self.shape)
        lead = nd - len(perm)
        axes = list(range(lead)) + [lead + p for p in perm] + [nd]
        return Jet(self.ctx, np.transpose(self.c, axes))

    def expand(self, axis: int) -> "Jet":
        """Insert a length-1 tensor axis (like ``np.expand_dims``)."""
        nd = len(self.shape)
        return Jet(self.ctx, np.expand_dims(self.c, axis % (nd + 1)))

    # -- arithmetic ----------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.ctx.nvars != self.ctx.nvars:
                raise ValueError("jets over different variable sets")
            order = min(self.order, other.order)
            return self.truncate(order), other.truncate(order)
        return self, None

    def __add__(self, other) -> "Jet":
        a, b = self._coerce(other)
        if b is not None:
            return Jet(a.ctx, a.c + b.c)
        return _add_scalar(a, other)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet":
        a, b = self._coerce(other)
        if b is not None:
            return Jet(a.ctx, a.c - b.c)
        return _add_scalar(a, -np.asarray(other, dtype=float))

    def __rsub__(self, other) -> "Jet":
        return _add_scalar(-self, other)

    def __neg__(self) -> "Jet":
        return Jet(self.ctx, -self.c)

    def __pos__(self) -> "Jet":
        return self

    def __mul__(self, other) -> "Jet":
        a, b = self._coerce(other)
        if b is not None:
            return _mul(a, b)
        s = np.asarray(other, dtype=float)
        return Jet(a.ctx, a.c * s[..., None])

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet":
        if isinstance(other, Jet):
            return div(self, other)
        s = np.asarray(other, dtype=float)
        return Jet(self.ctx, self.c / s[..., None])

    def __rtruediv__(self, other) -> "Jet":
        return reciprocal(self) * other

    def __pow__(self, n: int) -> "Jet":
        if not isinstance(n, (int, np.integer)) or n < 0:
            raise TypeError("only non-negative integer powers are supported")
        result = jet_const(np.ones(self.shape), self.ctx)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- calculus ------------------------------------------------------
    def deriv(self, var: int) -> "Jet":
        """Partial derivative in variable ``var``; the result has order - 1."""
        if not 0 <= var < self.ctx.nvars:
            raise IndexError(f"variable index {var} out of range")
        if self.order == 0:
            raise JetTruncationError("cannot differentiate an order-0 jet")
        src, fac = self.ctx.tables.deriv(var)
        return Jet(self.ctx.lowered(self.order - 1), self.c[..., src] * fac)

    def partial(self, alpha: Sequence[int]):
        return extract_partial(self, alpha)


def _add_scalar(a: Jet, s) -> Jet:
    s = np.asarray(s, dtype=float)
    shape = np.broadcast_shapes(a.shape, s.shape)
    c = np.broadcast_to(a.c, shape + (a.ctx.ncoef,)).copy()
    c[..., 0] += s
    return Jet(a.ctx, c)


def _mul(a: Jet, b: Jet) -> Jet:
    ii, jj, starts = a.ctx.tables.mul
    prod = a.c[..., ii] * b.c[..., jj]
    return Jet(a.ctx, np.add.reduceat(prod, starts, axis=-1))


# -- constructors -------------------------------------------------------------

def jet_const(value, ctx: JetContext) -> Jet:
    v = np.asarray(value, dtype=float)
    c = np.zeros(v.shape + (ctx.ncoef,))
    c[..., 0] = v
    return Jet(ctx, c)


def jet_var(index: int, value, ctx: JetContext) -> Jet:
    """The coordinate function ``x_index`` expanded at ``value``."""
    if not 0 <= index < ctx.nvars:
        raise IndexError(f"variable index {index} out of range 0..{ctx.nvars - 1}")
    j = jet_const(value, ctx)
    if ctx.max_order >= 1:
        alpha = [0] * ctx.nvars
        alpha[index] = 1
        j.c[..., ctx.index(alpha)] = 1.0
    return j


def jet_vars(values: Sequence, ctx: JetContext) -> list[Jet]:
    return [jet_var(i, v, ctx) for i, v in enumerate(values)]


def stack(jets: Sequence[Jet], axis: int = 0) -> Jet:
    order = min(j.order for j in jets)
    jets = [j.truncate(order) for j in jets]
    shapes = [j.shape for j in jets]
    nd = max(len(s) for s in shapes)
    if axis < 0:
        axis += nd + 1
    full = np.broadcast_shapes(*shapes)
    arrs = [np.broadcast_to(j.c, full + (j.ctx.ncoef,)) for j in jets]
    return Jet(jets[0].ctx, np.stack(arrs, axis=axis))


def einsum(spec: str, a: Jet, b: Jet) -> Jet:
    """Two-operand contraction over trailing tensor axes, e.g. ``"is,sjk->ijk"``.

    Leading axes not named in ``spec`` (batch axes) broadcast.
    """
    lhs, out = spec.replace(" ", "").split("->")
    sa, sb = lhs.split(",")
    letters = list(dict.fromkeys(out + sa + sb))

    def align(j: Jet, s: str) -> Jet:
        # put named axes in the order of `letters`, inserting length-1 axes
        j = j.transpose(*[s.index(ch) for ch in sorted(s, key=letters.index)])
        c = j.c
        nlead = c.ndim - 1 - len(s)
        shape = list(c.shape[:nlead])
        present = sorted(s, key=letters.index)
        dims = dict(zip(present, c.shape[nlead:-1]))
        shape += [dims.get(ch, 1) for ch in letters]
        return Jet(j.ctx, c.reshape(shape + [c.shape[-1]]))

    prod = align(a, sa) * align(b, sb)
    summed = [letters.index(ch) - len(letters) for ch in letters if ch not in out]
    if summed:
        prod = prod.sum(tuple(summed))
    kept = [ch for ch in letters if ch in out]
    return prod.transpose(*[kept.index(ch) for ch in out])


@lru_cache(maxsize=None)
def _restrict_index(nvars: int, order: int, keep: tuple) -> np.ndarray:
    full = _tables(nvars, order).lookup
    sub = _multi_indices(len(keep), order)
    idx = np.empty(len(sub), dtype=np.int64)
    for n, b in enumerate(sub.tolist()):
        a = [0] * nvars
        for v, e in zip(keep, b):
            a[v] = e
        idx[n] = full[tuple(a)]
    return idx


def restrict(a: Jet, keep: Sequence[int]) -> Jet:
    """The jet as a function of the variables ``keep`` only, others held at the base point."""
    keep = tuple(int(k) for k in keep)
    idx = _restrict_index(a.ctx.nvars, a.order, keep)
    return Jet(JetContext(len(keep), a.order), a.c[..., idx])


def embed(a: Jet, variables: Sequence[int], ctx: JetContext) -> Jet:
    """Inverse of :func:`restrict`: a jet in fewer variables as a jet of ``ctx``.

    ``variables[i]`` is the position in ``ctx`` of the i-th variable of ``a``.
    """
    variables = tuple(int(v) for v in variables)
    if len(variables) != a.ctx.nvars:
        raise ValueError("one target position per variable of the jet is needed")
    if a.order < ctx.max_order:
        raise JetTruncationError(f"cannot embed an order-{a.order} jet into order {ctx.max_order}")
    a = a.truncate(ctx.max_order)
    idx = _restrict_index(ctx.nvars, ctx.max_order, variables)
    c = np.zeros(a.shape + (ctx.ncoef,))
    c[..., idx] = a.c
    return Jet(ctx, c)


def extract_partial(a: Jet, alpha: Sequence[int]):
    """``d^alpha a`` at the expansion point (``alpha! * a_alpha``)."""
    i = a.ctx.index(alpha)
    v = a.c[..., i] * a.ctx.tables.factorial[i]
    return float(v) if np.ndim(v) == 0 else v


def coefficient(a: Jet, alpha: Sequence[int]):
    v = a.c[..., a.ctx.index(alpha)]
    return float(v) if np.ndim(v) == 0 else v


# -- elementary functions ---------------------------------------------------

def compose(a: Jet, taylor: Sequence) -> Jet:
    """Apply a univariate function given by its Taylor coefficients at ``a_0``.

    ``taylor[k]`` is ``f^(k)(a_0) / k!`` (scalar or array broadcasting against
    ``a.shape``); terms beyond ``a.order`` are ignored.
    """
    n = a.order
    h = Jet(a.ctx, a.c.copy())
    h.c[..., 0] = 0.0
    k_max = min(n, len(taylor) - 1)
    result = jet_const(np.broadcast_to(np.asarray(taylor[k_max], float), a.shape), a.ctx)
    for k in range(k_max - 1, -1, -1):
        result = result * h + taylor[k]
    return result


def reciprocal(b: Jet, name: str = "denominator") -> Jet:
    b0 = b.c[..., 0]
    if np.any(np.abs(b0) < POLE_TOLERANCE):
        bad = b0[np.abs(b0) < POLE_TOLERANCE] if np.ndim(b0) else b0
        raise JetPoleError(name, float(np.ravel(bad)[0]))
    inv = 1.0 / b0
    taylor = [inv]
    for _ in range(b.order):
        taylor.append(-taylor[-1] * inv)
    return compose(b, taylor)


def div(a: Jet, b: Jet, name: str = "denominator") -> Jet:
    """``a / b``; raises :class:`JetPoleError` naming ``name`` if ``b_0`` vanishes."""
    return a * reciprocal(b, name)


def exp(a: Jet) -> Jet:
    a0 = a.c[..., 0]
    if np.any(a0 > _EXP_MAX):
        raise JetOverflowError(f"exp overflow: exponent {float(np.max(a0))!r}")
    e = np.exp(a0)
    taylor = [e / math.factorial(k) for k in range(a.order + 1)]
    return compose(a, taylor)


def ei_taylor(u0, order: int) -> list:
    """Taylor coefficients of Ei at ``u0 > 0`` up to ``order``."""
    from .special import exp_integral_ei

    u0 = np.asarray(u0, dtype=float)
    if np.any(u0 <= 0):
        raise JetDomainError(f"Ei requires a positive argument, got {u0!r}")
    ei0 = np.vectorize(exp_integral_ei, otypes=[float])(u0) if u0.ndim else exp_integral_ei(float(u0))
    # Taylor coefficients of e^u / u at u0: e^{u0}/u0 * sum_{i+m=j} (1/i!) (-1/u0)^m
    scale = np.exp(u0) / u0
    f = []
    for j in range(order):
        s = sum((1.0 / math.factorial(i)) * (-1.0 / u0) ** (j - i) for i in range(j + 1))
        f.append(scale * s)
    return [ei0] + [f[k - 1] / k for k in range(1, order + 1)]


def ei(a: Jet) -> Jet:
    """Exponential integral Ei composed with ``a`` (requires ``a_0 > 0``)."""
    return compose(a, ei_taylor(a.c[..., 0], a.order))


def jet_arith(a: Jet, b: Jet, op: str) -> Jet:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return div(a, b)
    raise ValueError(f"unknown operation {op!r}")
