"""Scans, singularity detection, indicatrix sampling and the compressibility proxy."""
from __future__ import annotations

from .indicatrix import IndicatrixSample, sample_indicatrix, sphere_directions
from .kappa import KappaError, KappaResult, bc_profile, delta2_poles_in_r, kappa_integral
from .scan import (
    CROSSING,
    INVARIANTS,
    SWEEP_VARS,
    ScanResult,
    ScanRow,
    ScanSpec,
    ScanSpecError,
    params_dict,
    run_scan,
)
from .singularities import (
    DEFAULT_WINDOW,
    Classification,
    QuarticRoots,
    classify_indicatrix,
    find_singularities,
    quartic_root_oracle,
    type_from_count,
)

__all__ = [
    "CROSSING",
    "Classification",
    "DEFAULT_WINDOW",
    "INVARIANTS",
    "IndicatrixSample",
    "KappaError",
    "KappaResult",
    "QuarticRoots",
    "SWEEP_VARS",
    "ScanResult",
    "ScanRow",
    "ScanSpec",
    "ScanSpecError",
    "bc_profile",
    "classify_indicatrix",
    "delta2_poles_in_r",
    "find_singularities",
    "kappa_integral",
    "params_dict",
    "quartic_root_oracle",
    "run_scan",
    "sample_indicatrix",
    "sphere_directions",
    "type_from_count",
]
