"""Finsler geometry of a compressed Langmuir monolayer.

Subpackages: :mod:`~monofinsler.jets` (truncated Taylor arithmetic),
:mod:`~monofinsler.model` (coefficients and F^2),
:mod:`~monofinsler.geometry` (metric through curvature) and
:mod:`~monofinsler.analysis` (scans, singularities, indicatrices).
"""
from __future__ import annotations

from .model import BasePoint, FiberVector, ModelParams

__version__ = "0.1.0"

__all__ = ["BasePoint", "FiberVector", "ModelParams", "__version__"]
