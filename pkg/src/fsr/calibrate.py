"""Defocus kernel calibration by blur-and-compare over equifocal patches.

Each focus label contributes one flat, texture-bearing rectangle well away
from depth edges. Blurring the in-focus composite over that rectangle with
candidate kernels and scoring L1 against every other slice recovers the
per-slice-pair blur size and clip shape. Labels without a usable rectangle
inherit interpolated entries.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage, signal
from scipy.optimize import isotonic_regression

from .errors import CalibrationImpossible
from .images import to_gray
from .kernels import (
    CLIP_EDGE,
    CLIP_FRACTIONS,
    CLIP_MID,
    FULL,
    KernelShape,
    gaussian_kernel,
    kernel_radius,
)
from .stack import FocalStack

EDGE_ERODE = 3  # px stripped from label borders before rectangle search
MIN_RECT = 16  # smallest usable rectangle side
SIGMA_STEP = 0.5
SHAPE_ORDER = (FULL, CLIP_MID, CLIP_EDGE)  # FULL first: tie-break order


def sigma_cap(slice_distance: int) -> float:
    """Largest candidate blur for a pair of slices this far apart."""
    return 3.0 * abs(slice_distance) + 2.0


@dataclass(frozen=True)
class EquifocalRegion:
    """Axis-aligned rectangle of pixels sharing one focus label.

    Bounds are half-open: rows [y0, y1), columns [x0, x1).
    """

    label: int
    y0: int
    x0: int
    y1: int
    x1: int

    @property
    def height(self) -> int:
        return self.y1 - self.y0

    @property
    def width(self) -> int:
        return self.x1 - self.x0

    def center(self) -> tuple:
        return ((self.y0 + self.y1 - 1) / 2.0, (self.x0 + self.x1 - 1) / 2.0)

    def orientation(self, image_height: int, image_width: int) -> float:
        """Direction from the rectangle center toward the image center."""
        ry, rx = self.center()
        cy, cx = (image_height - 1) / 2.0, (image_width - 1) / 2.0
        return math.atan2(cy - ry, cx - rx)


def _largest_rectangle(mask: np.ndarray) -> tuple:
    """(area, (y0, x0, y1, x1)) of the largest all-true rectangle."""
    h, w = mask.shape
    heights = np.zeros(w, dtype=np.int64)
    best = (0, (0, 0, 0, 0))
    for y in range(h):
        heights = np.where(mask[y], heights + 1, 0)
        stack = []  # (start column, height), heights increasing
        for x in range(w + 1):
            cur = heights[x] if x < w else 0
            start = x
            while stack and stack[-1][1] >= cur:
                sx, sh = stack.pop()
                area = sh * (x - sx)
                if area > best[0]:
                    best = (area, (y - sh + 1, sx, y + 1, x))
                start = sx
            if cur > 0:
                stack.append((start, cur))
    return best


def equifocal_regions(labels: np.ndarray, k: int) -> list:
    """Largest usable rectangle per focus label, depth-edge band removed.

    Labels whose eroded mask holds no rectangle of at least MIN_RECT^2 are
    simply absent from the result.
    """
    labels = np.asarray(labels)
    out = []
    structure = np.ones((3, 3), dtype=bool)
    for lab in range(k):
        mask = labels == lab
        if not mask.any():
            continue
        eroded = ndimage.binary_erosion(mask, structure=structure, iterations=EDGE_ERODE)
        if not eroded.any():
            continue
        area, (y0, x0, y1, x1) = _largest_rectangle(eroded)
        if y1 - y0 >= MIN_RECT and x1 - x0 >= MIN_RECT:
            out.append(EquifocalRegion(lab, y0, x0, y1, x1))
    return out


def _padded_window(gray: np.ndarray, region: EquifocalRegion, pad: int) -> tuple:
    """Crop rect plus support margin, replicating past the frame border.

    Returns the window and the rect's slice within it.
    """
    h, w = gray.shape
    y0, y1 = region.y0 - pad, region.y1 + pad
    x0, x1 = region.x0 - pad, region.x1 + pad
    cy0, cy1 = max(0, y0), min(h, y1)
    cx0, cx1 = max(0, x0), min(w, x1)
    win = np.pad(
        gray[cy0:cy1, cx0:cx1],
        ((cy0 - y0, y1 - cy1), (cx0 - x0, x1 - cx1)),
        mode="edge",
    )
    inner = np.s_[region.y0 - y0 : region.y1 - y0, region.x0 - x0 : region.x1 - x0]
    return win, inner


def calibrate_pair(
    stack: FocalStack,
    f_i: np.ndarray,
    region: EquifocalRegion,
    target_slice: int,
) -> tuple:
    """Best (sigma, KernelShape) mapping the sharp patch onto a slice.

    Exhaustive search over the half-pixel sigma grid and the three clip
    shapes (clipping oriented toward the image center); L1 on grayscale.
    Ties go to the smaller sigma, then the unclipped shape.
    """
    if target_slice == region.label:
        return 0.0, KernelShape.from_id(FULL)

    theta = region.orientation(stack.height, stack.width)
    shapes = [KernelShape.from_id(FULL)] + [
        KernelShape.from_id(sid, theta) for sid in SHAPE_ORDER[1:]
    ]
    cap = sigma_cap(target_slice - region.label)
    sigmas = np.arange(SIGMA_STEP, cap + 1e-9, SIGMA_STEP)

    gray_sharp = to_gray(f_i)
    target = to_gray(stack.slices[target_slice])[
        region.y0 : region.y1, region.x0 : region.x1
    ]

    best = (np.inf, 0.0, shapes[0])
    for sigma in sigmas:
        pad = kernel_radius(float(sigma))
        win, inner = _padded_window(gray_sharp, region, pad)
        for shape in shapes:
            kern = gaussian_kernel(float(sigma), shape)
            blurred = signal.fftconvolve(win, kern, mode="same")[inner]
            d = float(np.abs(blurred - target).sum())
            if d < best[0] - 1e-12:
                best = (d, float(sigma), shape)
    return best[1], best[2]


@dataclass(frozen=True)
class KernelTable:
    """Directional per-slice-pair blur sizes and clip shapes.

    Entry [i, j] maps intensity in focus at slice i onto slice j. The
    stored shape carries no orientation; rendering orients clips per
    pixel position.
    """

    sigma: np.ndarray = field(repr=False)
    shape_ids: np.ndarray = field(repr=False)

    def __post_init__(self):
        s = np.asarray(self.sigma, dtype=np.float64)
        ids = np.asarray(self.shape_ids, dtype="<U9")
        if s.ndim != 2 or s.shape[0] != s.shape[1] or s.shape != ids.shape:
            raise ValueError(f"table shapes {s.shape} / {ids.shape} must be square and equal")
        if (s < 0).any():
            raise ValueError("blur sizes must be non-negative")
        if np.diag(s).any():
            raise ValueError("diagonal blur must be zero")
        if not np.isin(ids, list(CLIP_FRACTIONS)).all():
            raise ValueError("unknown shape id in table")
        object.__setattr__(self, "sigma", s)
        object.__setattr__(self, "shape_ids", ids)

    @property
    def k(self) -> int:
        return self.sigma.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, KernelTable):
            return NotImplemented
        return np.array_equal(self.sigma, other.sigma) and np.array_equal(
            self.shape_ids, other.shape_ids
        )

    def entry(self, i: int, j: int) -> tuple:
        """(sigma, shape id) for intensity from slice i viewed at slice j."""
        return float(self.sigma[i, j]), str(self.shape_ids[i, j])

    def rows_monotone(self) -> bool:
        """Blur never shrinks as the target moves away from the diagonal."""
        for i in range(self.k):
            right = self.sigma[i, i:]
            left = self.sigma[i, : i + 1][::-1]
            if (np.diff(right) < -1e-12).any() or (np.diff(left) < -1e-12).any():
                return False
        return True

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "sigma": self.sigma.tolist(),
            "shape": [
                [
                    {"shape_id": str(sid), "clip_fraction": CLIP_FRACTIONS[str(sid)]}
                    for sid in row
                ]
                for row in self.shape_ids
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "KernelTable":
        k = int(data["k"])
        sigma = np.asarray(data["sigma"], dtype=np.float64)
        ids = np.asarray(
            [[cell["shape_id"] for cell in row] for row in data["shape"]], dtype="<U9"
        )
        if sigma.shape != (k, k):
            raise ValueError(f"sigma shape {sigma.shape} != ({k}, {k})")
        return cls(sigma=sigma, shape_ids=ids)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)

    @classmethod
    def load(cls, path) -> "KernelTable":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def _monotone_away_from_diagonal(sigma: np.ndarray) -> np.ndarray:
    out = sigma.copy()
    k = out.shape[0]
    for i in range(k):
        if i + 1 < k:
            out[i, i:] = isotonic_regression(out[i, i:], increasing=True).x
        if i > 0:
            out[i, : i + 1] = isotonic_regression(out[i, : i + 1], increasing=False).x
        out[i, i] = 0.0
    return np.maximum(out, 0.0)


def build_pi(stack: FocalStack, labels: np.ndarray, f_i: np.ndarray) -> KernelTable:
    """Calibrate every ordered slice pair into a KernelTable.

    Rows for labels with a usable rectangle come from blur-and-compare;
    the rest are linearly interpolated along the slice axis (clamped at
    the ends). Rows are then isotonically corrected so blur never shrinks
    with slice distance.
    """
    k = stack.k
    regions = {r.label: r for r in equifocal_regions(labels, k)}
    if not regions:
        raise CalibrationImpossible("no focus label offers a usable flat rectangle")

    sigma = np.zeros((k, k), dtype=np.float64)
    shape_ids = np.full((k, k), FULL, dtype="<U9")
    rows = sorted(regions)
    for i in rows:
        for j in range(k):
            if j == i:
                continue
            sigma[i, j], shp = calibrate_pair(stack, f_i, regions[i], j)
            shape_ids[i, j] = shp.shape_id

    missing = [i for i in range(k) if i not in regions]
    if missing:
        row_idx = np.asarray(rows, dtype=np.float64)
        for j in range(k):
            sigma[missing, j] = np.interp(missing, row_idx, sigma[rows, j])
        # shapes are categorical: copy from the nearest calibrated row
        for i in missing:
            nearest = min(rows, key=lambda r: (abs(r - i), r))
            shape_ids[i] = shape_ids[nearest]
        sigma[np.arange(k), np.arange(k)] = 0.0
        shape_ids[np.arange(k), np.arange(k)] = FULL

    return KernelTable(sigma=_monotone_away_from_diagonal(sigma), shape_ids=shape_ids)
