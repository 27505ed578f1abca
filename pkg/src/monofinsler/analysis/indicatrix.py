"""Samples of the indicatrix {y : F^2(x, y) = 1}.

Ray mode rescales sphere directions with F^2 > 0 by 1/sqrt(F^2), which is
exact because F^2 is 2-homogeneous in y.  Grid mode extracts the level set
from a box of F^2 values by marching cubes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..model import ModelParams, fundamental_F2

RAY = "ray"
GRID = "grid"
RESIDUAL_TOL = 1e-9


@dataclass
class IndicatrixSample:
    mode: str
    points: np.ndarray  # (n, 3) fiber vectors (xidot, rdot, phidot)
    residuals: np.ndarray  # F^2(point) - 1
    faces: np.ndarray | None = None  # (m, 3) vertex indices, grid mode only
    diagnostic: str = ""
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.points)


def _F2(x, Y, params) -> np.ndarray:
    return np.asarray(fundamental_F2(x, (Y[..., 0], Y[..., 1], Y[..., 2]), params), dtype=float)


def sphere_directions(resolution: int) -> np.ndarray:
    """Latitude/longitude unit vectors; the polar axis is the rdot direction.

    Longitudes are offset by half a step so no direction has rdot = 0 exactly
    except through the polar angle, and poles themselves are excluded.
    """
    n_lat = max(int(resolution), 2)
    n_lon = 2 * n_lat
    theta = (np.arange(n_lat) + 0.5) * np.pi / n_lat
    phi = (np.arange(n_lon) + 0.5) * 2 * np.pi / n_lon
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    # components ordered (xidot, rdot, phidot): rdot along the polar axis
    d = np.stack([np.sin(th) * np.cos(ph), np.cos(th), np.sin(th) * np.sin(ph)], axis=-1)
    return d.reshape(-1, 3)


def _ray(x, params, resolution: int) -> IndicatrixSample:
    d = sphere_directions(resolution)
    d = d[d[:, 1] != 0]
    F = _F2(x, d, params)
    keep = np.isfinite(F) & (F > 0)
    if not np.any(keep):
        return IndicatrixSample(
            RAY, np.empty((0, 3)), np.empty(0),
            diagnostic="no sampled direction has F^2 > 0",
        )
    y = d[keep] / np.sqrt(F[keep])[:, None]
    # one homogeneity correction removes the rounding left by the first scaling
    y = y / np.sqrt(_F2(x, y, params))[:, None]
    res = _F2(x, y, params) - 1.0
    ok = np.abs(res) <= RESIDUAL_TOL
    diag = ""
    if not np.all(ok):
        diag = f"dropped {int(np.sum(~ok))} points with |F^2 - 1| > {RESIDUAL_TOL:g}"
    return IndicatrixSample(
        RAY, y[ok], res[ok], diagnostic=diag,
        metadata={"directions": int(len(d)), "positive": int(np.sum(keep))},
    )


def _grid(x, params, resolution: int, box) -> IndicatrixSample:
    from skimage.measure import marching_cubes

    if box is None:
        ray = _ray(x, params, 32)
        if len(ray) == 0:
            return IndicatrixSample(
                GRID, np.empty((0, 3)), np.empty(0), np.empty((0, 3), dtype=int),
                diagnostic="no sampled direction has F^2 > 0",
            )
        half = 1.25 * np.percentile(np.abs(ray.points), 90, axis=0)
        half = np.where(half > 0, half, np.max(half))
        box = [(-h, h) for h in half]
    n = max(int(resolution), 8)
    if n % 2:
        n += 1  # even node count: a symmetric box then has no node at rdot = 0
    axes = [np.linspace(lo, hi, n) for lo, hi in box]
    X, Y, Z = np.meshgrid(*axes, indexing="ij")
    with np.errstate(divide="ignore", invalid="ignore"):
        vol = _F2(x, np.stack([X, Y, Z], axis=-1), params) - 1.0
    if not (np.nanmin(vol) < 0 < np.nanmax(vol)):
        return IndicatrixSample(
            GRID, np.empty((0, 3)), np.empty(0), np.empty((0, 3), dtype=int),
            diagnostic="F^2 - 1 does not change sign inside the box",
        )
    spacing = tuple(float(a[1] - a[0]) for a in axes)
    # the pole at rdot = 0 flips the sign of F^2 - 1 without a level crossing;
    # cubes touching the two node layers around it are skipped
    mask = np.abs(Y) > spacing[1]
    verts, faces, _, _ = marching_cubes(vol, level=0.0, spacing=spacing, mask=mask)
    verts = verts + np.array([a[0] for a in axes])
    res = _F2(x, verts, params) - 1.0
    return IndicatrixSample(
        GRID, verts, res, faces,
        diagnostic="cubes adjacent to rdot = 0 skipped",
        metadata={"box": [list(map(float, b)) for b in box], "resolution": n},
    )


def sample_indicatrix(
    x, params: ModelParams, mode: str = RAY, resolution: int | None = None, box=None
) -> IndicatrixSample:
    """Points (ray mode) or a triangle mesh (grid mode) of the unit indicatrix at ``x``."""
    if not x[1] > 0:
        raise ValueError(f"r must be positive, got {x[1]!r}")
    if mode == RAY:
        return _ray(x, params, resolution or 64)
    if mode == GRID:
        return _grid(x, params, resolution or 96, box)
    raise ValueError(f"mode must be 'ray' or 'grid', got {mode!r}")
