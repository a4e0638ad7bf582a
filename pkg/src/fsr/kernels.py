"""Defocus kernel construction.

Kernels are isotropic Gaussians truncated at a 3-sigma radius. Near the
frame border the lens vignettes and the kernel loses a cap: a straight
chord removes a fraction of the kernel radius on the side facing away
from the image center. Three shape classes cover the effect in three
radial rings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

FULL = "FULL"
CLIP_MID = "CLIP_MID"
CLIP_EDGE = "CLIP_EDGE"

CLIP_FRACTIONS = {FULL: 0.0, CLIP_MID: 0.10, CLIP_EDGE: 0.25}

# ring boundaries in normalized radial distance from the image center
RING_MID = 0.5
RING_EDGE = 0.8


@dataclass(frozen=True)
class KernelShape:
    """Vignetting class of a defocus kernel.

    @param shape_id: one of FULL, CLIP_MID, CLIP_EDGE.
    @param clip_fraction: fraction of the kernel radius removed by the chord.
    @param orientation: angle (radians) of the chord normal, which points
        toward the image center; the removed cap lies on the opposite side.
    """

    shape_id: str = FULL
    clip_fraction: float = 0.0
    orientation: float = 0.0

    def __post_init__(self):
        if self.shape_id not in CLIP_FRACTIONS:
            raise ValueError(f"unknown shape_id {self.shape_id!r}")
        if not 0.0 <= self.clip_fraction < 0.5:
            raise ValueError("clip_fraction must be in [0, 0.5)")
        if self.shape_id == FULL and self.clip_fraction != 0.0:
            raise ValueError("FULL shape cannot clip")

    @classmethod
    def from_id(cls, shape_id: str, orientation: float = 0.0) -> "KernelShape":
        return cls(shape_id, CLIP_FRACTIONS[shape_id], orientation)


def kernel_radius(sigma: float) -> int:
    """Integer support radius of a truncated Gaussian kernel."""
    if sigma <= 0:
        return 0
    return max(1, int(math.ceil(3.0 * sigma)))


@lru_cache(maxsize=4096)
def _kernel_cached(sigma: float, clip_fraction: float, orientation: float) -> np.ndarray:
    if sigma <= 0:
        return np.ones((1, 1))
    r = kernel_radius(sigma)
    yy, xx = np.mgrid[-r : r + 1, -r : r + 1].astype(np.float64)
    dist2 = xx * xx + yy * yy
    k = np.exp(-dist2 / (2.0 * sigma * sigma))
    k[dist2 > (3.0 * sigma) ** 2] = 0.0
    if clip_fraction > 0.0:
        # keep the half-space whose inward normal points toward the center;
        # the cap beyond the chord on the outward side is vignetted away
        nx, ny = math.cos(orientation), math.sin(orientation)
        cut = (1.0 - clip_fraction) * 3.0 * sigma
        k[(xx * nx + yy * ny) < -cut] = 0.0
    s = k.sum()
    if s <= 0:
        raise ValueError(f"kernel degenerated to zero mass (sigma={sigma})")
    k /= s
    k.setflags(write=False)
    return k


def gaussian_kernel(sigma: float, shape: KernelShape | None = None) -> np.ndarray:
    """Unit-mass defocus kernel for blur level `sigma` (pixels).

    sigma=0 yields a 1x1 impulse. The returned array is cached and
    read-only; copy before mutating.
    """
    if shape is None or shape.clip_fraction == 0.0:
        return _kernel_cached(float(sigma), 0.0, 0.0)
    return _kernel_cached(float(sigma), float(shape.clip_fraction), float(shape.orientation))


def shape_for_position(x: float, y: float, width: int, height: int) -> KernelShape:
    """Vignetting shape class for a pixel position in the frame.

    The normalized radial distance rho (0 at center, 1 at the corner)
    selects the ring; the orientation points from the pixel toward the
    image center.
    """
    cx = (width - 1) / 2.0
    cy = (height - 1) / 2.0
    dx = cx - x
    dy = cy - y
    half_diag = math.hypot(cx, cy)
    rho = math.hypot(dx, dy) / half_diag if half_diag > 0 else 0.0
    orientation = math.atan2(dy, dx) if (dx, dy) != (0.0, 0.0) else 0.0
    if rho < RING_MID:
        return KernelShape(FULL, 0.0, 0.0)
    if rho < RING_EDGE:
        return KernelShape(CLIP_MID, CLIP_FRACTIONS[CLIP_MID], orientation)
    return KernelShape(CLIP_EDGE, CLIP_FRACTIONS[CLIP_EDGE], orientation)
