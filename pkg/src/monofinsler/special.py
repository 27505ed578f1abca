"""Exponential integral Ei for positive real arguments."""
from __future__ import annotations

import math

import numpy as np

EULER_GAMMA = 0.57721566490153286061
_SERIES_LIMIT = 40.0


class EiDomainError(ValueError):
    pass


def _ei_series(u: float) -> float:
    term = 1.0
    terms = []
    k = 1
    while True:
        term *= u / k
        t = term / k
        terms.append(t)
        if t < 1e-17 * abs(sum(terms)) + 1e-300:
            break
        k += 1
    return math.fsum([EULER_GAMMA, math.log(u)] + terms)


def _ei_asymptotic(u: float) -> float:
    # e^u/u * sum k!/u^k, truncated before the terms start growing
    terms = [1.0]
    term = 1.0
    k = 1
    while True:
        nxt = term * k / u
        if nxt >= term or nxt < 1e-18:
            if nxt < term:
                terms.append(nxt)
            break
        term = nxt
        terms.append(term)
        k += 1
    return math.exp(u) / u * math.fsum(terms)


def exp_integral_ei(u):
    """Ei(u) for u > 0.

    Power series about 0 for ``u <= 40``, asymptotic expansion above.
    Accepts scalars or arrays.
    """
    if np.ndim(u):
        arr = np.asarray(u, dtype=float)
        return np.vectorize(exp_integral_ei, otypes=[float])(arr)
    u = float(u)
    if not u > 0:
        raise EiDomainError(f"Ei(u) requires u > 0, got {u!r}")
    if u <= _SERIES_LIMIT:
        return _ei_series(u)
    return _ei_asymptotic(u)
