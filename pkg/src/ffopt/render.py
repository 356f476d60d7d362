"""8-bit binary PGM output for masks and point-spread functions."""

from __future__ import annotations

import numpy as np

from .mask_lp import MaskProblem
from .transforms import SpectrumGrid, dft_2d_twostep

__all__ = ["pgm_bytes", "read_pgm", "orient", "mirror_quadrant", "mask_image", "psf_field", "log_stretch",
           "linear_stretch", "DEFAULT_FLOOR"]

DEFAULT_FLOOR = -10.0


def pgm_bytes(img: np.ndarray) -> bytes:
    img = np.asarray(img)
    if img.ndim != 2 or img.dtype != np.uint8:
        raise ValueError("expected a 2D uint8 array")
    h, w = img.shape
    return b"P5\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(img).tobytes()


def read_pgm(data: bytes) -> np.ndarray:
    parts = data.split(maxsplit=4)
    if parts[0] != b"P5" or int(parts[3]) != 255:
        raise ValueError("not an 8-bit P5 image")
    w, h = int(parts[1]), int(parts[2])
    return np.frombuffer(parts[4][: w * h], dtype=np.uint8).reshape(h, w)


def mirror_quadrant(Q: np.ndarray) -> np.ndarray:
    """Unfold a quarter-plane array Q[k, l] (x, y > 0) to the full plane.

    The result is indexed [row, col] with y decreasing down the rows and x
    increasing across the columns.
    """
    full_x = np.concatenate([Q[::-1], Q], axis=0)          # [x, y]
    full = np.concatenate([full_x[:, ::-1], full_x], axis=1)
    return full.T[::-1]


def _quantize(v: np.ndarray) -> np.ndarray:
    return np.rint(255.0 * np.clip(v, 0.0, 1.0)).astype(np.uint8)


def mask_image(F: np.ndarray) -> np.ndarray:
    """Full-plane 2n x 2n gray image of a quarter-plane transmission F."""
    return _quantize(mirror_quadrant(np.asarray(F, dtype=float)))


def psf_field(p: MaskProblem, F: np.ndarray, size: int) -> tuple[np.ndarray, SpectrumGrid]:
    """Normalized intensity (fhat / fhat(0,0))^2 on a size x size grid over [-rho1, rho1]^2.

    ``size`` must be odd so that the grid is centered on the origin. A zero
    peak (dark mask) gives an all-zero field.
    """
    if size < 1 or size % 2 == 0:
        raise ValueError(f"image size must be a positive odd integer, got {size}")
    s = size // 2
    grid = SpectrumGrid(s, "odd", p.rho1 / s) if s else SpectrumGrid(0, "odd", p.rho1)
    fhat = dft_2d_twostep(F, p.x_grid, p.x_grid, grid).values
    peak = fhat[s, s]
    field = (fhat / peak) ** 2 if peak != 0 else np.zeros_like(fhat)
    return field, grid


def log_stretch(field: np.ndarray, floor: float = DEFAULT_FLOOR) -> np.ndarray:
    if floor >= 0:
        raise ValueError("log floor must be negative")
    lv = np.log10(np.maximum(field, 10.0 ** floor))
    return _quantize((lv - floor) / -floor)


def linear_stretch(field: np.ndarray) -> np.ndarray:
    return _quantize(field)


def orient(field: np.ndarray) -> np.ndarray:
    """[xi, eta] array to image layout (eta up, xi right)."""
    return field.T[::-1]
