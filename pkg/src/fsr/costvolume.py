"""Cost volume construction and edge-aware filtering."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .guidedfilter import DEFAULT_EPS, DEFAULT_RADIUS, guided_filter
from .stack import FocalStack

COST_EPS = 1e-12


@dataclass(frozen=True)
class CostVolume:
    """Per-slice selection costs plus the guidance image steering the filter.

    @param costs: k x H x W non-negative, lower is better focus.
    @param guidance: H x W x 3 composite assembled from each pixel's
        best-response slice.
    """

    costs: np.ndarray = field(repr=False)
    guidance: np.ndarray = field(repr=False)


def build_cost_volume(response: np.ndarray, stack: FocalStack) -> CostVolume:
    """Reciprocal of the composite focus response, with argmax guidance."""
    resp = np.asarray(response, dtype=np.float64)
    costs = 1.0 / (resp + COST_EPS)
    best = np.argmax(resp, axis=0)
    guidance = composite_from_labels(stack, best)
    return CostVolume(costs=costs, guidance=guidance)


def composite_from_labels(stack: FocalStack, labels: np.ndarray) -> np.ndarray:
    """Per-pixel copy from the slice each label selects; no resampling."""
    h, w = labels.shape
    vol = np.stack(stack.slices, axis=0)
    return vol[labels, np.arange(h)[:, None], np.arange(w)[None, :], :]


def filter_cost_volume(
    cv: CostVolume, radius: int = DEFAULT_RADIUS, eps: float = DEFAULT_EPS
) -> CostVolume:
    """Guided-filter every cost slice; output stays non-negative."""
    filtered = np.stack(
        [guided_filter(cv.guidance, c, radius, eps) for c in cv.costs], axis=0
    )
    return CostVolume(costs=np.maximum(filtered, 0.0), guidance=cv.guidance)
