"""Edge-preserving guided filter.

Window means use exact clipped-window pixel counts (cumulative-sum box
filter), so border behavior matches the per-window definition that the
tests enforce brute-force. Gray and color guidance are both supported;
color guidance inverts the full 3x3 covariance per pixel.
"""

from __future__ import annotations

import numpy as np

DEFAULT_RADIUS = 8
DEFAULT_EPS = 1e-4


def _axis_sum(img: np.ndarray, r: int, axis: int) -> np.ndarray:
    n = img.shape[axis]
    c = np.zeros((n + 1,) + img.shape[1:] if axis == 0 else img.shape[:1] + (n + 1,))
    np.cumsum(img, axis=axis, out=c[1:] if axis == 0 else c[:, 1:])
    hi = np.minimum(np.arange(n) + r + 1, n)
    lo = np.maximum(np.arange(n) - r, 0)
    if axis == 0:
        return c[hi] - c[lo]
    return c[:, hi] - c[:, lo]


def box_sum(img: np.ndarray, r: int) -> np.ndarray:
    """Sum over a (2r+1)^2 window clipped at the image border."""
    return _axis_sum(_axis_sum(np.asarray(img, dtype=np.float64), r, 0), r, 1)


def guided_filter(
    guidance: np.ndarray,
    src: np.ndarray,
    radius: int = DEFAULT_RADIUS,
    eps: float = DEFAULT_EPS,
) -> np.ndarray:
    """Filter `src` steered by edges of `guidance` (HxW or HxWx3)."""
    g = np.asarray(guidance, dtype=np.float64)
    p = np.asarray(src, dtype=np.float64)
    if g.ndim == 2:
        return _guided_gray(g, p, radius, eps)
    return _guided_color(g, p, radius, eps)


def _guided_gray(g, p, r, eps):
    n = box_sum(np.ones_like(p), r)
    mean_g = box_sum(g, r) / n
    mean_p = box_sum(p, r) / n
    var_g = box_sum(g * g, r) / n - mean_g * mean_g
    cov_gp = box_sum(g * p, r) / n - mean_g * mean_p
    a = cov_gp / (var_g + eps)
    b = mean_p - a * mean_g
    return (box_sum(a, r) / n) * g + box_sum(b, r) / n


def _guided_color(g, p, r, eps):
    n = box_sum(np.ones(g.shape[:2]), r)
    means = [box_sum(g[:, :, c], r) / n for c in range(3)]
    mean_p = box_sum(p, r) / n

    cov_gp = [box_sum(g[:, :, c] * p, r) / n - means[c] * mean_p for c in range(3)]

    sigma = np.empty(g.shape[:2] + (3, 3))
    for i in range(3):
        for j in range(i, 3):
            v = box_sum(g[:, :, i] * g[:, :, j], r) / n - means[i] * means[j]
            sigma[:, :, i, j] = v
            sigma[:, :, j, i] = v
    sigma += eps * np.eye(3)

    rhs = np.stack(cov_gp, axis=-1)[..., None]
    a = np.linalg.solve(sigma, rhs)[..., 0]
    b = mean_p - sum(a[:, :, c] * means[c] for c in range(3))
    out = box_sum(b, r) / n
    for c in range(3):
        out += (box_sum(a[:, :, c], r) / n) * g[:, :, c]
    return out
