from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import SAMPLE_PARAMS, SAMPLE_X, SAMPLE_Y, random_cases, rel, riemann_oracle
from monofinsler import geometry as G
from monofinsler.geometry import chain
from monofinsler.jets import JetTruncationError
from monofinsler.model import FiberPoleError, ModelDomainError, ModelParams, coefficients, delta2_value

CASES = random_cases(21, 12, "physical") + random_cases(22, 12, "frozen")


# -- metric ------------------------------------------------------------------------

def test_quadratic_metric_when_A_vanishes():
    p = ModelParams.frozen(0.0, 1.7, 2.0)
    x = (0.01, 0.3, 0.0)
    md = G.metric_tensor(x, (0.2, 0.5, 0.1), p)
    assert np.allclose(md.g, np.diag([1.7, -1.0, -0.09]), rtol=1e-15, atol=0)


def test_sample_point_signature():
    for path in (G.AD, G.CLOSED_FORM):
        md = G.metric_tensor(SAMPLE_X, SAMPLE_Y, SAMPLE_PARAMS, path)
        assert md.signature == ("+", "+", "-")
        assert md.delta1 > 0 and md.delta2 > 0 and md.delta3 < 0


@pytest.mark.parametrize("x, y, p", CASES)
def test_metric_properties(x, y, p):
    md = G.metric_tensor(x, y, p)
    assert np.array_equal(md.g, md.g.T)
    assert np.allclose(md.g @ md.g_inv, np.eye(3), rtol=0, atol=1e-10)
    C = p.C
    assert md.delta3 / md.delta2 == pytest.approx(-(C / 2) * x[1] ** 2, rel=1e-10)
    assert md.delta3 == pytest.approx(np.linalg.det(md.g), rel=1e-10)
    # closed-form minors
    cf = G.metric_tensor(x, y, p, G.CLOSED_FORM)
    assert cf.delta2 == pytest.approx(md.delta2, rel=1e-9, abs=1e-9 * abs(md.g[0, 0] * md.g[1, 1]))


def test_metric_rejects_fiber_pole_and_bad_r():
    with pytest.raises(FiberPoleError, match="fiber pole: rdot = 0"):
        G.metric_tensor(SAMPLE_X, (0.001, 0.0, 0.0), SAMPLE_PARAMS)
    with pytest.raises(ModelDomainError):
        G.metric_tensor((0.01, -0.1, 0.0), SAMPLE_Y, SAMPLE_PARAMS)


def test_signature_degenerate_on_delta2_root():
    A, C = 2.0, 1.0
    p = ModelParams.frozen(A, 0.0, C)
    u = (2 * C / A) ** (1 / 3)  # root of (3A^2/4)u^4 - (3AC/2)u
    y = (u, 1.0, 0.0)
    assert abs(delta2_value(A, 0.0, C, u)) < 1e-14
    assert G.metric_tensor((0.0, 1.0, 0.0), y, p).signature == "degenerate"
    assert "Delta2" in G.pole_flags((0.0, 1.0, 0.0), y, p)


def test_unknown_path():
    with pytest.raises(ValueError):
        G.spray(SAMPLE_X, SAMPLE_Y, SAMPLE_PARAMS, "numeric")


# -- Cartan --------------------------------------------------------------------------

@pytest.mark.parametrize("x, y, p", CASES)
def test_cartan_properties(x, y, p):
    Cijk = G.cartan_tensor(x, y, p)
    for perm in ((1, 0, 2), (0, 2, 1), (2, 1, 0)):
        assert np.array_equal(Cijk, Cijk.transpose(perm))
    for idx in ((0, 0, 2), (0, 1, 2), (2, 2, 2), (1, 2, 2), (0, 2, 2), (1, 1, 2)):
        assert Cijk[idx] == 0.0
    contracted = np.einsum("ijk,k->ij", Cijk, y)
    scale = np.max(np.abs(Cijk)) * max(abs(v) for v in y)
    assert np.max(np.abs(contracted)) <= 1e-9 * scale


def test_cartan_vanishes_when_A_vanishes():
    p = ModelParams.frozen(0.0, 1.0, 2.0)
    assert not np.any(G.cartan_tensor((0.0, 0.4, 0.0), (0.3, 0.2, 0.1), p))
    assert not np.any(G.cartan_tensor((0.0, 0.4, 0.0), (0.3, 0.2, 0.1), p, G.CLOSED_FORM))


def test_cartan_C112_closed_form():
    p = ModelParams.frozen(3.0, 1.0, 2.0)
    xi, rd = 0.4, 0.8
    Cijk = G.cartan_tensor((0.0, 1.0, 0.0), (xi, rd, 0.0), p, G.CLOSED_FORM)
    assert Cijk[0, 0, 1] == pytest.approx(-1.5 * 3.0 * xi / rd**2, rel=1e-15)
    assert Cijk[0, 0, 1] == pytest.approx(G.cartan_tensor((0.0, 1.0, 0.0), (xi, rd, 0.0), p)[0, 0, 1], rel=1e-14)


# -- spray and connection ---------------------------------------------------------------

@pytest.mark.parametrize("path", [G.AD, G.CLOSED_FORM])
def test_G3_direct(path):
    Gs = G.spray((0.01, 0.5, 0.0), (0.3, 1.0, 2.0), SAMPLE_PARAMS, path)
    assert Gs[2] == pytest.approx(4.0, rel=1e-14)


@settings(max_examples=20, deadline=None)
@given(st.floats(-1e8, 1e8), st.floats(-2, 2), st.floats(1e-9, 1e-6), st.floats(0.01, 1.0), st.floats(1e-3, 1.0), st.floats(-0.1, 0.1))
def test_frozen_spray_vanishes_without_angular_motion(A, B, C, r, rd, xi):
    p = ModelParams.frozen(A, B, C)
    u = xi / rd
    if abs(delta2_value(A, B, C, u)) <= 1e-6 * (abs(0.75 * A * A * u**4) + abs(A * B * u**3) + abs(1.5 * A * C * u) + abs(0.5 * B * C)):
        return
    Gs = G.spray((0.01, r, 0.0), (xi, rd, 0.0), p)
    assert Gs[0] == 0.0 and Gs[1] == 0.0


@pytest.mark.parametrize("x, y, p", CASES[::3])
def test_spray_homogeneity(x, y, p):
    G1 = G.spray(x, y, p)
    G3 = G.spray(x, tuple(3 * v for v in y), p)
    assert G.relative_deviation(G3, 9 * G1) <= 1e-12


def test_N33_and_N32_direct():
    N = G.nonlinear_connection((0.01, 0.1, 0.0), (0.001, 0.01, 0.4), SAMPLE_PARAMS)
    assert N[2, 2] == pytest.approx(0.1, rel=1e-14)
    assert N[2, 1] == pytest.approx(4.0, rel=1e-14)


@pytest.mark.parametrize("x, y, p", CASES)
def test_connection_properties(x, y, p):
    for path in (G.AD, G.CLOSED_FORM):
        N = G.nonlinear_connection(x, y, p, path)
        assert N[2, 0] == 0.0
        assert N[2, 1] == pytest.approx(y[2] / x[1], rel=1e-14)
        assert N[2, 2] == pytest.approx(y[1] / x[1], rel=1e-14)
    N = G.nonlinear_connection(x, y, p)
    Gs = G.spray(x, y, p)
    assert G.relative_deviation(N @ np.asarray(y), 2 * Gs) <= 1e-9


def test_printed_forms_are_exposed_and_compared():
    b = G.geometry_bundle(SAMPLE_X, SAMPLE_Y, SAMPLE_PARAMS)
    assert set(b.printed_deviation) == {"spray", "connection"}
    # the printed connection components are not the y-derivatives of the spray
    assert b.printed_deviation["connection"] > 1e-3
    assert max(b.path_deviation.values()) <= 1e-8


# -- Christoffel and curvature ----------------------------------------------------------

@pytest.mark.parametrize("x, y, p", CASES[::2])
def test_christoffel_and_curvature_symmetries(x, y, p):
    b = G.geometry_bundle(x, y, p, with_closed_form=False)
    Gam, R, B = b.christoffel, b.hh_curv, b.berwald
    assert np.array_equal(Gam, Gam.transpose(0, 2, 1))
    assert np.array_equal(R, -R.transpose(0, 1, 3, 2))
    for k in range(3):
        assert not np.any(R[:, :, k, k])
    for perm in ((0, 2, 1, 3), (0, 1, 3, 2), (0, 3, 2, 1)):
        assert np.array_equal(B, B.transpose(perm))


def test_frozen_christoffel_matches_symbolic_transcription():
    import sympy as sp

    A, B, C = 2.0e3, 0.7, 3.0e-2
    x, y = (0.01, 0.4, 0.2), (0.05, 0.3, 0.0)
    p = ModelParams.frozen(A, B, C)
    # with phidot = 0 the connection only has N^3_3 = rdot/r, which meets no phidot-dependence
    # of g, so the horizontal derivatives reduce to partials of g(x) at fixed y
    t, r, ph = sp.symbols("t r phi")
    u = sp.nsimplify(y[0] / y[1])
    g = sp.Matrix([
        [3 * A * u + B, -sp.Rational(3, 2) * A * u**2, 0],
        [-sp.Rational(3, 2) * A * u**2, A * u**3 - sp.Rational(1, 2) * C, 0],
        [0, 0, -sp.Rational(1, 2) * C * r**2],
    ])
    Gam_o, R_o, _ = riemann_oracle(g, (t, r, ph), x)
    Gam = G.christoffel(x, y, p)
    assert rel(Gam, Gam_o) <= 1e-12
    block = Gam[:2, :2, :2]
    assert not np.any(block)
    assert Gam[2, 1, 2] == pytest.approx(1 / x[1], rel=1e-14)


def _riemannian_reduction(x, y, p):
    import sympy as sp

    t, r, ph = sp.symbols("t r phi")
    if p.mode == "frozen":
        B = sp.Float(p.frozen_B, 30)
    else:
        B = sp.Float(p.m * p.c**2, 30) + sp.Rational(4, 3) * sp.Float(p.p, 30) * r**5
    C = sp.Float(p.C, 30)
    return riemann_oracle([B, -C / 2, -C / 2 * r**2], (t, r, ph), x)


@pytest.mark.parametrize(
    "x, y, p",
    [
        ((0.01, 0.1, 0.0), (0.001, 0.01, 0.0), ModelParams(V=0.0)),
        ((0.02, 0.37, 1.0), (0.3, -0.2, 0.05), ModelParams(V=0.0)),
        ((0.0, 0.5, 0.0), (-0.01, 0.4, 0.002), ModelParams.frozen(0.0, 0.9, 4.23e-8)),
    ],
)
def test_riemannian_reduction(x, y, p):
    Gam_o, R_o, scalar_o = _riemannian_reduction(x, y, p)
    b = G.geometry_bundle(x, y, p, with_closed_form=False)
    assert not np.any(b.berwald)
    assert b.B_C == 0.0
    assert rel(b.christoffel, Gam_o) <= 1e-8
    if np.max(np.abs(R_o)) > 1e-12 * np.max(np.abs(Gam_o)) ** 2:
        assert rel(b.hh_curv, R_o) <= 1e-8
        assert b.R_C == pytest.approx(scalar_o, rel=1e-8)
    else:
        assert np.max(np.abs(b.hh_curv)) <= 1e-12 * np.max(np.abs(b.christoffel)) ** 2


# -- Berwald ------------------------------------------------------------------------

@pytest.mark.parametrize("x, y, p", CASES[::2])
def test_berwald_reduced_matches_full_chain(x, y, p):
    B, BC = G.berwald(x, y, p)
    Br, g_inv = chain.berwald_reduced(x, y, p)
    assert G.relative_deviation(Br, B) <= 1e-12
    assert float(chain.ricci_trace(g_inv, Br)) == pytest.approx(BC, rel=1e-10)


def test_berwald_zero_when_A_vanishes():
    p = ModelParams.frozen(0.0, 5.0, 0.3)
    B, BC = G.berwald((0.0, 0.2, 0.0), (0.3, 0.1, 0.7), p)
    assert not np.any(B) and BC == 0.0


# -- jet order --------------------------------------------------------------------------

def test_order_too_small_is_rejected():
    with pytest.raises(JetTruncationError):
        G.berwald(SAMPLE_X, SAMPLE_Y, SAMPLE_PARAMS, order=4)


@pytest.mark.parametrize("order", [6, 7])
def test_results_independent_of_extra_order(order):
    base = G.geometry_bundle(SAMPLE_X, (0.001, 0.01, 0.002), SAMPLE_PARAMS, with_closed_form=False)
    more = G.geometry_bundle(SAMPLE_X, (0.001, 0.01, 0.002), SAMPLE_PARAMS, order=order, with_closed_form=False)
    assert G.relative_deviation(more.hh_curv, base.hh_curv) <= 1e-12
    assert G.relative_deviation(more.berwald, base.berwald) <= 1e-12
    assert more.R_C == pytest.approx(base.R_C, rel=1e-12)


def test_order_from_environment(monkeypatch):
    monkeypatch.setenv(G.ORDER_ENV, "6")
    assert G.default_order() == 6
    monkeypatch.setenv(G.ORDER_ENV, "")
    assert G.default_order() is None


# -- batched evaluation -------------------------------------------------------------------

def test_evaluate_points_matches_bundle():
    rng = np.random.default_rng(3)
    n = 6
    x = (np.full(n, 0.01), rng.uniform(0.05, 0.5, n), np.zeros(n))
    y = (rng.uniform(1e-4, 1e-2, n), np.full(n, 0.01), rng.uniform(0, 1e-3, n))
    fields = ("F2", "Delta1", "Delta2", "signature", "G", "N", "R_C", "B_C")
    vals, flags = G.evaluate_points(x, y, SAMPLE_PARAMS, fields)
    for k in range(n):
        xk, yk = tuple(v[k] for v in x), tuple(v[k] for v in y)
        b = G.geometry_bundle(xk, yk, SAMPLE_PARAMS, with_closed_form=False)
        assert vals["F2"][k] == pytest.approx(b.F2, rel=1e-14)
        assert vals["Delta2"][k] == pytest.approx(b.metric.delta2, rel=1e-14)
        assert vals["signature"][k] == b.metric.signature
        assert G.relative_deviation(vals["N"][k], b.connection) <= 1e-13
        assert vals["R_C"][k] == pytest.approx(b.R_C, rel=1e-12)
        assert vals["B_C"][k] == pytest.approx(b.B_C, rel=1e-10)
        assert flags[k] == b.pole_flags


def test_evaluate_points_flags_exact_pole():
    A, C = 2.0, 1.0
    p = ModelParams.frozen(A, 0.0, C)
    u = (2 * C / A) ** (1 / 3)
    x = (np.zeros(3), np.ones(3), np.zeros(3))
    y = (np.array([0.5, u, 0.7]), np.ones(3), np.zeros(3))
    vals, flags = G.evaluate_points(x, y, p, ("F2", "Delta2", "signature", "B_C"))
    assert flags[1] == ["Delta2"] and flags[0] == [] and flags[2] == []
    assert vals["signature"][1] == "degenerate"
    assert np.isfinite(vals["B_C"][0]) and np.isfinite(vals["B_C"][2])


def test_evaluate_points_unknown_field():
    with pytest.raises(ValueError, match="unknown fields"):
        G.evaluate_points(([0.01], [0.1], [0.0]), ([0.001], [0.01], [0.0]), SAMPLE_PARAMS, ("Ricci",))


def test_relative_deviation_row_floor():
    a = np.array([[1.0, 1e-17], [0.0, 2.0]])
    b = np.array([[1.0, 0.0], [0.0, 2.0]])
    assert G.relative_deviation(a, b) <= 1e-4
    assert G.relative_deviation(a, b, row_floor=0.0) == 1.0


def test_coefficients_used_by_closed_form_are_consistent():
    c = coefficients(SAMPLE_X, SAMPLE_PARAMS)
    md = G.metric_tensor(SAMPLE_X, SAMPLE_Y, SAMPLE_PARAMS, G.CLOSED_FORM)
    u = SAMPLE_Y[0] / SAMPLE_Y[1]
    assert md.g[0, 0] == pytest.approx(3 * c.A * u + c.B, rel=1e-15)
