"""Focus measure registry and focus volume evaluation.

Each measure maps a grayscale slice and a support size to a non-negative
per-pixel sharpness response. Responses are averaged over three support
sizes; borders use replicated padding. Scaling is irrelevant downstream
(consensus uses argmax, clustering and the data cost normalize per
pixel), so window means are used instead of sums.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .errors import UnknownMeasure
from .images import to_gray
from .stack import FocalStack

SUPPORT_SIZES = (3, 7, 11)


def _box(img: np.ndarray, w: int) -> np.ndarray:
    return ndimage.uniform_filter(img, size=w, mode="nearest")


def _gradients(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    gy, gx = np.gradient(g)
    return gx, gy


def lap1(g: np.ndarray, w: int) -> np.ndarray:
    """Energy of the Laplacian."""
    lap = ndimage.laplace(g, mode="nearest")
    return _box(lap * lap, w)


def lap2(g: np.ndarray, w: int) -> np.ndarray:
    """Modified Laplacian: |second difference in x| + |in y|."""
    kx = np.array([[-1.0, 2.0, -1.0]])
    ml = np.abs(ndimage.convolve(g, kx, mode="nearest")) + np.abs(
        ndimage.convolve(g, kx.T, mode="nearest")
    )
    return _box(ml, w)


def ten(g: np.ndarray, w: int) -> np.ndarray:
    """Tenengrad: Sobel gradient energy."""
    gx = ndimage.sobel(g, axis=1, mode="nearest")
    gy = ndimage.sobel(g, axis=0, mode="nearest")
    return _box(gx * gx + gy * gy, w)


def gra1(g: np.ndarray, w: int) -> np.ndarray:
    """Gaussian-derivative gradient energy, scale tied to the support."""
    s = max(0.5, w / 6.0)
    gx = ndimage.gaussian_filter(g, s, order=(0, 1), mode="nearest")
    gy = ndimage.gaussian_filter(g, s, order=(1, 0), mode="nearest")
    return gx * gx + gy * gy


def gra5(g: np.ndarray, w: int) -> np.ndarray:
    """Squared forward-difference gradient."""
    dx = np.zeros_like(g)
    dy = np.zeros_like(g)
    dx[:, :-1] = g[:, 1:] - g[:, :-1]
    dy[:-1, :] = g[1:, :] - g[:-1, :]
    return _box(dx * dx + dy * dy, w)


def sta1(g: np.ndarray, w: int) -> np.ndarray:
    """Local gray-level variance."""
    m = _box(g, w)
    return np.maximum(_box(g * g, w) - m * m, 0.0)


def sta3(g: np.ndarray, w: int) -> np.ndarray:
    """Variance normalized by the local mean."""
    m = _box(g, w)
    var = np.maximum(_box(g * g, w) - m * m, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = var / m
    return np.nan_to_num(out, nan=0.0, posinf=0.0, neginf=0.0)


def mis8(g: np.ndarray, w: int) -> np.ndarray:
    """Autocorrelation contrast (Vollath F4), windowed."""
    s1 = np.concatenate([g[:, 1:], g[:, -1:]], axis=1)
    s2 = np.concatenate([g[:, 2:], g[:, -1:], g[:, -1:]], axis=1)
    return np.maximum(_box(g * s1 - g * s2, w), 0.0)


def wav1(g: np.ndarray, w: int) -> np.ndarray:
    """First-level Haar detail energy."""
    lo = np.array([0.5, 0.5])
    hi = np.array([0.5, -0.5])

    def sep(row, col):
        t = ndimage.convolve1d(g, row, axis=1, mode="nearest")
        return ndimage.convolve1d(t, col, axis=0, mode="nearest")

    detail = np.abs(sep(hi, lo)) + np.abs(sep(lo, hi)) + np.abs(sep(hi, hi))
    return _box(detail, w)


def hfn(g: np.ndarray, w: int) -> np.ndarray:
    """Frobenius norm of the Hessian."""
    kxx = np.array([[1.0, -2.0, 1.0]])
    kxy = 0.25 * np.array([[1.0, 0.0, -1.0], [0.0, 0.0, 0.0], [-1.0, 0.0, 1.0]])
    gxx = ndimage.convolve(g, kxx, mode="nearest")
    gyy = ndimage.convolve(g, kxx.T, mode="nearest")
    gxy = ndimage.convolve(g, kxy, mode="nearest")
    return _box(np.sqrt(gxx * gxx + 2.0 * gxy * gxy + gyy * gyy), w)


def dst(g: np.ndarray, w: int) -> np.ndarray:
    """Determinant of the local structure tensor."""
    gx, gy = _gradients(g)
    jxx = _box(gx * gx, w)
    jyy = _box(gy * gy, w)
    jxy = _box(gx * gy, w)
    return np.maximum(jxx * jyy - jxy * jxy, 0.0)


def rdf(g: np.ndarray, w: int) -> np.ndarray:
    """Ring difference: |center mean - surrounding ring mean| at the support scale."""
    inner = max(1, w // 3)
    if inner % 2 == 0:
        inner += 1
    center = _box(g, inner)
    outer_sum = _box(g, w) * (w * w)
    ring = (outer_sum - center * (inner * inner)) / (w * w - inner * inner)
    return np.abs(center - ring)


REGISTRY = {
    "LAP1": lap1,
    "LAP2": lap2,
    "TEN": ten,
    "GRA1": gra1,
    "GRA5": gra5,
    "STA1": sta1,
    "STA3": sta3,
    "MIS8": mis8,
    "WAV1": wav1,
    "HFN": hfn,
    "DST": dst,
    "RDF": rdf,
}


def measure_names() -> list:
    return sorted(REGISTRY)


def evaluate_measure(gray: np.ndarray, name: str) -> np.ndarray:
    """Support-averaged response of one measure on one grayscale slice."""
    if name not in REGISTRY:
        raise UnknownMeasure(f"no focus measure named {name!r}")
    fn = REGISTRY[name]
    acc = None
    for w in SUPPORT_SIZES:
        r = fn(gray.astype(np.float64), w)
        acc = r if acc is None else acc + r
    out = acc / len(SUPPORT_SIZES)
    return np.maximum(np.nan_to_num(out, nan=0.0, posinf=0.0, neginf=0.0), 0.0)


def focus_volume(stack: FocalStack, measure: str) -> np.ndarray:
    """k x H x W non-negative focus responses of one registered measure."""
    if measure not in REGISTRY:
        raise UnknownMeasure(f"no focus measure named {measure!r}")
    vol = np.stack(
        [evaluate_measure(to_gray(s), measure) for s in stack.slices], axis=0
    )
    return vol.astype(np.float32)
