"""In-focus map, dual-focus layer, and bokeh detection."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import cv2
import numpy as np
from scipy import ndimage, signal

from .costvolume import COST_EPS, CostVolume, composite_from_labels
from .images import to_gray
from .stack import FocalStack

T_GRAD = 20.0  # Sobel magnitude gate, 8-bit intensity scale
T_BOKEH = 0.9  # saturation threshold in normalized intensity
SECONDARY_FLOOR = 0.25  # secondary peak must reach this fraction of the primary
SCALE_MIN, SCALE_MAX = 1.0, 100.0
NO_DUAL = -1


@dataclass(frozen=True)
class FocusMap:
    """Per-pixel best-focus slice index and the composite built from it.

    @param index: H x W slice labels.
    @param image: H x W x 3 in-focus composite, bit-copied from the slices.
    """

    index: np.ndarray = field(repr=False)
    image: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class DualFocusLayer:
    """Secondary focus peaks near depth edges.

    @param index: H x W secondary slice labels, NO_DUAL where absent.
    @param image: H x W x 3 intensities from the secondary slice; zeros off
        the support.
    """

    index: np.ndarray = field(repr=False)
    image: np.ndarray = field(repr=False)

    @property
    def support(self) -> np.ndarray:
        return self.index != NO_DUAL

    @property
    def count(self) -> int:
        return int(self.support.sum())


@dataclass(frozen=True)
class BokehLayer:
    """Saturated-in-every-slice pixels and their radiance multipliers.

    @param scale: H x W float32; 0 off the support, in [1, 100] on it,
        quantized to 1/256 steps.
    @param focus_slices: detection metadata (component id -> sharpest
        slice); not serialized, excluded from equality.
    """

    scale: np.ndarray = field(repr=False)
    focus_slices: dict = field(default_factory=dict, compare=False)

    @property
    def mask(self) -> np.ndarray:
        return self.scale > 0

    @property
    def count(self) -> int:
        return int(self.mask.sum())


def extract_focus_map(cv: CostVolume, stack: FocalStack) -> FocusMap:
    """Argmin cost per pixel (ties to the smaller slice index)."""
    index = np.argmin(cv.costs, axis=0).astype(np.int32)
    return FocusMap(index=index, image=composite_from_labels(stack, index))


def gradient_gate(image: np.ndarray, t_grad: float = T_GRAD) -> np.ndarray:
    """True where the 8-bit Sobel gradient magnitude exceeds the gate."""
    gray8 = to_gray(image).astype(np.float64) * 255.0
    gx = cv2.Sobel(gray8, cv2.CV_64F, 1, 0, ksize=3)
    gy = cv2.Sobel(gray8, cv2.CV_64F, 0, 1, ksize=3)
    return np.hypot(gx, gy) > t_grad


def detect_dual_focus(
    cv: CostVolume,
    focusmap: FocusMap,
    stack: FocalStack,
    w: int,
    t_grad: float = T_GRAD,
) -> DualFocusLayer:
    """Strongest secondary peak of the focus vector, onset-gated.

    The focus vector is the reciprocal of the filtered cost. A slice is a
    peak when it is the maximum of its +/-w window; the secondary peak must
    sit farther than w slices from the primary, reach a fraction of its
    height, and lie on a strong gradient of the in-focus composite.
    """
    fvec = 1.0 / (np.asarray(cv.costs, dtype=np.float64) + COST_EPS)
    k, h, width = fvec.shape
    primary = focusmap.index

    peak_val = ndimage.maximum_filter1d(fvec, size=2 * w + 1, axis=0, mode="nearest")
    is_peak = fvec >= peak_val - 1e-15

    lab = np.arange(k)[:, None, None]
    far_from_primary = np.abs(lab - primary[None, :, :]) > w
    candidates = np.where(is_peak & far_from_primary, fvec, -np.inf)
    secondary = np.argmax(candidates, axis=0).astype(np.int32)
    sec_val = np.take_along_axis(candidates, secondary[None], axis=0)[0]

    prim_val = np.take_along_axis(fvec, primary[None].astype(np.int64), axis=0)[0]
    ok = (
        np.isfinite(sec_val)
        & (sec_val >= SECONDARY_FLOOR * prim_val)
        & gradient_gate(focusmap.image, t_grad)
        & (secondary != primary)
    )

    index = np.where(ok, secondary, np.int32(NO_DUAL)).astype(np.int32)
    image = np.zeros_like(focusmap.image)
    if ok.any():
        full = composite_from_labels(stack, np.maximum(index, 0))
        image[ok] = full[ok]
    return DualFocusLayer(index=index, image=image)


def saturation_mask(stack: FocalStack, t_bokeh: float = T_BOKEH) -> np.ndarray:
    """Pixels whose max channel exceeds the threshold in every slice."""
    m = np.ones((stack.height, stack.width), dtype=bool)
    for s in stack.slices:
        m &= s.max(axis=2) > t_bokeh
    return m


def _pillbox(radius: float) -> np.ndarray:
    r = max(1, int(math.ceil(radius)))
    yy, xx = np.mgrid[-r : r + 1, -r : r + 1]
    k = (np.hypot(yy, xx) <= radius).astype(np.float64)
    return k / k.sum()


def detect_bokeh(
    stack: FocalStack,
    sigma_table: np.ndarray,
    t_bokeh: float = T_BOKEH,
) -> BokehLayer:
    """Find saturated components and recover their clipped radiance scale.

    @param sigma_table: k x k calibrated blur sigmas between slice pairs.
    Each component's sharpest slice anchors the fit: a pillbox of the
    calibrated radius redistributes s * (observed intensity) and the s
    minimizing the L1 error over the largest observed disc wins.
    """
    b = saturation_mask(stack, t_bokeh)
    scale = np.zeros((stack.height, stack.width), dtype=np.float32)
    if not b.any():
        return BokehLayer(scale=scale)

    sat_per_slice = [s.max(axis=2) > t_bokeh for s in stack.slices]
    labels, n_comp = ndimage.label(b)
    focus_slices = {}
    for comp in range(1, n_comp + 1):
        comp_mask = labels == comp
        ys, xs = np.nonzero(comp_mask)
        pad = int(3 * sigma_table.max() + 8)
        y0, y1 = max(0, ys.min() - pad), min(stack.height, ys.max() + pad + 1)
        x0, x1 = max(0, xs.min() - pad), min(stack.width, xs.max() + pad + 1)
        win = np.s_[y0:y1, x0:x1]

        areas = [int(sat[win].sum()) for sat in sat_per_slice]
        l0 = int(np.argmin(areas))
        l1 = int(np.argmax(areas))
        focus_slices[comp] = l0
        if l0 == l1:
            scale[comp_mask] = 1.0
            continue

        src = stack.slices[l0].max(axis=2)[win] * sat_per_slice[l0][win]
        observed = stack.slices[l1].max(axis=2)[win]
        largest_disc = sat_per_slice[l1][win]
        kernel = _pillbox(math.sqrt(2.0) * float(sigma_table[l0, l1]))
        spread = signal.fftconvolve(src, kernel, mode="same")

        def disc_error(s):
            model = np.clip(spread * s, 0.0, 1.0)
            return float(np.abs(model - observed)[largest_disc].sum())

        best_s, best_err = SCALE_MIN, np.inf
        for s in np.arange(SCALE_MIN, SCALE_MAX + 0.5, 0.5):
            err = disc_error(s)
            if err < best_err - 1e-12:
                best_err, best_s = err, s
        for s in np.arange(max(SCALE_MIN, best_s - 0.5), min(SCALE_MAX, best_s + 0.5) + 0.05, 0.1):
            err = disc_error(s)
            if err < best_err - 1e-12:
                best_err, best_s = err, s
        # fixed-point 8.8 so the serialized value reproduces this exactly
        scale[comp_mask] = np.float32(round(best_s * 256.0) / 256.0)
    return BokehLayer(scale=scale, focus_slices=focus_slices)
