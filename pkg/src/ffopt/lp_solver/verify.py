"""Independent feasibility check for mask solutions.

Only the problem geometry, the pupil values and the transforms module are
used here. The model's stored coefficient rows never enter.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from ..mask_lp import MaskProblem, darkhole_mask, f_names, pupil_mask
from ..transforms import dft_2d_direct
from .ipm import Solution

__all__ = ["FeasibilityReport", "VerificationError", "verify_mask_solution", "pupil_image"]

BINARY_TOL = 1e-3


class VerificationError(ValueError):
    pass


@dataclass(frozen=True)
class FeasibilityReport:
    max_contrast_violation: float
    max_bound_violation: float
    throughput: float
    binary_fraction: float
    fhat00: float

    def as_dict(self) -> dict:
        return {k: float(v) for k, v in self.__dict__.items()}


def pupil_image(p: MaskProblem, sol: Solution | Mapping[str, float]) -> np.ndarray:
    """Scatter pupil values onto the n x n quarter grid (zero outside the pupil)."""
    values = sol.values if isinstance(sol, Solution) else sol
    names = f_names(p)
    missing = [nm for nm in names if nm not in values]
    if missing:
        raise VerificationError(f"{len(missing)} pupil values missing, first {missing[0]!r}")
    F = np.zeros((p.n, p.n))
    F[pupil_mask(p)] = [float(values[nm]) for nm in names]
    if not np.all(np.isfinite(F)):
        raise VerificationError("pupil values must be finite")
    return F


def verify_mask_solution(p: MaskProblem, sol: Solution | Mapping[str, float]) -> FeasibilityReport:
    F = pupil_image(p, sol)
    f = F[pupil_mask(p)]
    fhat = dft_2d_direct(F, p.x_grid, p.x_grid, p.xi_grid).values
    peak = fhat[0, 0]
    dark = np.abs(fhat[darkhole_mask(p)])
    viol = float(np.max(dark - p.contrast * peak)) if dark.size else 0.0
    bound = float(max(0.0, np.max(-f, initial=0.0), np.max(f - 1.0, initial=0.0)))
    near = np.minimum(np.abs(f), np.abs(f - 1.0)) <= BINARY_TOL
    return FeasibilityReport(
        max_contrast_violation=viol,
        max_bound_violation=bound,
        throughput=float(f.sum() * p.dx * p.dx),
        binary_fraction=float(near.mean()) if f.size else 1.0,
        fhat00=float(peak),
    )
