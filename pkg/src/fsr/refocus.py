"""Rendering novel focus configurations from the compact representation.

Every pixel distributes its stored intensity through a defocus kernel
chosen by the target focus configuration; a binary occlusion coefficient
decides which target pixels may receive it. Accumulated energy is
divided by accumulated kernel weight, so kernels need only unit mass.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import backend
from .errors import EmptyTargets, InvalidTargets, NonContiguousExtended
from .focusmaps import NO_DUAL, FocusMap
from .geometry import CameraGeometry
from .kernels import (
    CLIP_EDGE,
    CLIP_MID,
    FULL,
    RING_EDGE,
    RING_MID,
    KernelShape,
    gaussian_kernel,
)
from .representation import Representation

MODES = ("single", "all-in-focus", "extended", "npr")
T_BETA_FRAC = 0.30
WEIGHT_FLOOR = 1e-8
ORIENTATION_BINS = 16

_RING_SHAPE = (FULL, CLIP_MID, CLIP_EDGE)


@dataclass(frozen=True)
class RefocusTargets:
    """Focus configuration: the slice labels rendered sharp.

    @param labels: sorted, duplicate-free slice indices.
    @param mode: one of single, all-in-focus, extended, npr.
    """

    labels: tuple
    mode: str

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown refocus mode {self.mode!r}")
        if not self.labels:
            raise EmptyTargets("target label set is empty")

    def __contains__(self, label) -> bool:
        return int(label) in self.labels


def _resolve_k(source) -> int:
    if isinstance(source, (int, np.integer)):
        return int(source)
    if isinstance(source, Representation):
        return source.k
    if isinstance(source, FocusMap):
        return int(source.index.max()) + 1
    raise TypeError("expected a slice count, FocusMap, or Representation")


def make_targets(mode: str, params: dict, focusmap) -> RefocusTargets:
    """Build a target label set for a refocus mode.

    single wants params["label"]; extended wants an inclusive
    params["range"] pair or an explicit contiguous params["labels"];
    npr wants any non-empty params["labels"]; all-in-focus selects
    every slice label. `focusmap` may be a Representation, a FocusMap,
    or the slice count itself.
    """
    k = _resolve_k(focusmap)
    if mode == "single":
        labels = [int(params["label"])]
    elif mode == "all-in-focus":
        labels = list(range(k))
    elif mode in ("extended", "npr"):
        if mode == "extended" and "range" in params:
            lo, hi = (int(v) for v in params["range"])
            labels = list(range(lo, hi + 1))
        else:
            labels = sorted({int(v) for v in params["labels"]})
    else:
        raise ValueError(f"unknown refocus mode {mode!r}")
    if not labels:
        raise EmptyTargets(f"mode {mode!r} selected no slices")
    labels = sorted(set(labels))
    if labels[0] < 0 or labels[-1] >= k:
        raise InvalidTargets(f"labels {labels} outside [0, {k})")
    if mode == "extended" and labels != list(range(labels[0], labels[-1] + 1)):
        raise NonContiguousExtended(f"extended labels {labels} have holes")
    return RefocusTargets(tuple(labels), mode)


def nearest_limiting_label(label: int, targets: RefocusTargets) -> int:
    """Closest target label to `label`; ties go to the smaller label."""
    return min(targets.labels, key=lambda t: (abs(t - label), t))


@dataclass
class Accumulator:
    """Energy and kernel-weight rasters for one rendering pass."""

    energy: np.ndarray
    weight: np.ndarray

    @classmethod
    def zeros(cls, height: int, width: int) -> "Accumulator":
        return cls(
            energy=np.zeros((height, width, 3), dtype=np.float64),
            weight=np.zeros((height, width), dtype=np.float64),
        )

    def merge(self, other: "Accumulator") -> None:
        self.energy += other.energy
        self.weight += other.weight

    def resolve(self, floor: float = WEIGHT_FLOOR) -> np.ndarray:
        """Energy / weight, inpainting starved pixels, clamped to [0,1]."""
        good = self.weight >= floor
        out = np.zeros_like(self.energy)
        np.divide(self.energy, self.weight[:, :, None], out=out, where=good[:, :, None])
        if not good.all() and good.any():
            iy, ix = ndimage.distance_transform_edt(
                ~good, return_distances=False, return_indices=True
            )
            bad = ~good
            out[bad] = out[iy[bad], ix[bad]]
        return np.clip(out, 0.0, 1.0)


@dataclass(frozen=True)
class OcclusionContext:
    """Everything the occlusion coefficient needs.

    @param labels: H x W primary focus labels I.
    @param geometry: lens constants for the margin geometry.
    @param k: slice count.
    @param t_beta: label-difference gate; occlusion handling only engages
        for source labels more than t_beta behind the target.
    """

    labels: np.ndarray = field(repr=False)
    geometry: CameraGeometry
    k: int
    t_beta: int

    def __post_init__(self):
        if self.t_beta < 1:
            raise ValueError("t_beta must be at least 1")

    @classmethod
    def from_representation(cls, rep: Representation) -> "OcclusionContext":
        frac = float(rep.thresholds.get("t_beta_frac", T_BETA_FRAC))
        return cls(
            labels=rep.focusmap.index,
            geometry=rep.geometry,
            k=rep.k,
            t_beta=max(1, int(round(frac * rep.k))),
        )


def _margin_gain(l_target: int, l_source: int, r_q: float, ctx: OcclusionContext) -> float:
    """Ratio R_margin / d for a background source over a foreground target.

    The unoccluded margin grows linearly with the source-to-target pixel
    distance, so blocking is decided by whether this gain reaches 1.
    """
    g = ctx.geometry
    d_f = g.label_depth(l_target, ctx.k)
    d_b = g.label_depth(l_source, ctx.k)
    if d_b <= d_f:
        return math.inf
    return (r_q / g.aperture_radius_px()) * (d_f / (d_b - d_f)) * (d_b / g.focal_length_mm)


def occlusion_coeff(
    p,
    q,
    ctx: OcclusionContext,
    r_q: float,
    source_label: int | None = None,
    dual: bool = False,
) -> float:
    """Binary occlusion coefficient for distributing q's intensity onto p.

    @param p: receiving pixel (y, x).
    @param q: source pixel (y, x).
    @param r_q: kernel radius (3 sigma) of q's defocus at the target.
    @param source_label: label whose intensity q distributes; defaults to
        the primary label I(q).
    @param dual: True when q distributes its hidden dual intensity, which
        flips the margin sign and blocks every pixel but q itself.
    """
    l_q = int(ctx.labels[q]) if source_label is None else int(source_label)
    l_p = int(ctx.labels[p])
    if l_q - l_p <= ctx.t_beta:
        return 1.0
    if math.hypot(p[0] - q[0], p[1] - q[1]) == 0.0:
        return 1.0
    if dual:
        return 0.0
    return 1.0 if _margin_gain(l_p, l_q, r_q, ctx) >= 1.0 else 0.0


def distribute(
    q,
    intensity,
    sigma: float,
    shape: KernelShape,
    ctx: OcclusionContext,
    acc: Accumulator,
    source_label: int | None = None,
    dual: bool = False,
) -> Accumulator:
    """Spread one pixel's intensity through its defocus kernel.

    Reference implementation: one kernel tap at a time, each gated by the
    occlusion coefficient. sigma=0 degenerates to a unit impulse at q.
    """
    kern = gaussian_kernel(sigma, shape)
    r = kern.shape[0] // 2
    h, w = acc.weight.shape
    val = np.broadcast_to(np.asarray(intensity, dtype=np.float64), (3,))
    r_q = 3.0 * sigma
    for dy in range(kern.shape[0]):
        ty = q[0] + dy - r
        if ty < 0 or ty >= h:
            continue
        for dx in range(kern.shape[1]):
            tx = q[1] + dx - r
            if tx < 0 or tx >= w:
                continue
            kv = kern[dy, dx]
            if kv == 0.0:
                continue
            beta = occlusion_coeff(
                (ty, tx), q, ctx, r_q, source_label=source_label, dual=dual
            )
            if beta == 0.0:
                continue
            acc.energy[ty, tx] += beta * kv * val
            acc.weight[ty, tx] += beta * kv
    return acc


def _beta_lut(l_source: int, r_q: float, ctx: OcclusionContext, dual: bool) -> np.ndarray:
    """Occlusion coefficient per receiving label for one source label."""
    lut = np.ones(ctx.k, dtype=np.float64)
    for l_t in range(ctx.k):
        if l_source - l_t <= ctx.t_beta:
            continue
        if dual or _margin_gain(l_t, l_source, r_q, ctx) < 1.0:
            lut[l_t] = 0.0
    return lut


def _position_bins(height: int, width: int):
    """Vignetting ring id and quantized center-facing orientation bin."""
    cy = (height - 1) / 2.0
    cx = (width - 1) / 2.0
    yy, xx = np.mgrid[0:height, 0:width]
    dy = cy - yy
    dx = cx - xx
    half_diag = math.hypot(cx, cy)
    rho = np.hypot(dy, dx) / half_diag if half_diag > 0 else np.zeros((height, width))
    ring = np.where(rho < RING_MID, 0, np.where(rho < RING_EDGE, 1, 2))
    step = 2.0 * math.pi / ORIENTATION_BINS
    obin = np.round(np.arctan2(dy, dx) / step).astype(np.int64) % ORIENTATION_BINS
    obin[ring == 0] = 0
    return ring, obin


def _sigma_per_label(rep: Representation, targets: RefocusTargets) -> np.ndarray:
    sig = np.zeros(rep.k, dtype=np.float64)
    for l in range(rep.k):
        if l not in targets:
            sig[l] = rep.kernels.sigma[l, nearest_limiting_label(l, targets)]
    return sig


def _feather(allowed: np.ndarray) -> np.ndarray:
    """One-pixel soft transition at blocking boundaries."""
    return ndimage.uniform_filter(allowed, size=3, mode="nearest")


def _emit_group(job, acc: Accumulator) -> None:
    ys, xs, vals, kern, allowed = job
    backend.splat_group(ys, xs, vals, kern, allowed, acc.energy, acc.weight)
    # a pixel never occludes itself: restore the central tap where the
    # allowance mask blocked or feathered it
    centre = kern[kern.shape[0] // 2, kern.shape[1] // 2]
    local = allowed[ys, xs]
    hole = local < 1.0
    if hole.any():
        top_up = centre * (1.0 - local[hole])
        np.add.at(acc.energy, (ys[hole], xs[hole]), vals[hole] * top_up[:, None])
        np.add.at(acc.weight, (ys[hole], xs[hole]), top_up)


def _deposit_impulses(mask: np.ndarray, img: np.ndarray, acc: Accumulator) -> None:
    acc.energy[mask] += img[mask]
    acc.weight[mask] += 1.0


def _source_jobs(
    sel: np.ndarray,
    img: np.ndarray,
    sigma: float,
    allowed: np.ndarray,
    ring: np.ndarray,
    obin: np.ndarray,
):
    """Split one label's source pixels into shared-kernel splat jobs."""
    step = 2.0 * math.pi / ORIENTATION_BINS
    for r in np.unique(ring[sel]):
        shape = None
        if r > 0:
            in_ring = sel & (ring == r)
            bins = np.unique(obin[in_ring])
        else:
            in_ring = sel & (ring == 0)
            bins = [0]
        for b in bins:
            part = in_ring if r == 0 else in_ring & (obin == b)
            ys, xs = np.nonzero(part)
            if ys.size == 0:
                continue
            if r > 0:
                shape = KernelShape.from_id(_RING_SHAPE[r], float(b) * step)
            kern = np.ascontiguousarray(gaussian_kernel(sigma, shape))
            yield ys.astype(np.int64), xs.astype(np.int64), img[ys, xs], kern, allowed


def refocus(
    rep: Representation,
    targets: RefocusTargets,
    use_beta: bool = True,
    use_dual: bool = True,
    use_bokeh: bool = True,
    threads: int | None = None,
    _label_order=None,
) -> np.ndarray:
    """Render the scene focused at the target labels.

    Target-label pixels keep their sharp intensity; every other pixel
    spreads its intensity with the calibrated blur toward the nearest
    target label, gated by occlusion. Returns an H x W x 3 float image
    in [0, 1].

    @param use_beta: apply occlusion gating (False renders every beta=1).
    @param use_dual: let dual-focus pixels distribute their hidden layer.
    @param use_bokeh: scale saturated-light intensities before spreading.
    @param threads: shard count; defaults to the FSR_THREADS variable.
    """
    bad = [l for l in targets.labels if not 0 <= l < rep.k]
    if bad:
        raise InvalidTargets(f"labels {bad} outside [0, {rep.k})")
    if threads is None:
        threads = max(1, int(os.environ.get("FSR_THREADS", "1")))

    labels_img = rep.focusmap.index
    h, w = labels_img.shape
    ctx = OcclusionContext.from_representation(rep)
    sigma_for = _sigma_per_label(rep, targets)
    ring, obin = _position_bins(h, w)
    ones = np.ones((h, w), dtype=np.float64)

    img = np.array(rep.focusmap.image, dtype=np.float64)
    dimg = np.array(rep.dual.image, dtype=np.float64)
    if use_bokeh and rep.bokeh.count:
        boost = rep.bokeh.scale[rep.bokeh.mask].astype(np.float64)[:, None]
        img[rep.bokeh.mask] *= boost
        dimg[rep.bokeh.mask] *= boost

    acc = Accumulator.zeros(h, w)
    jobs = []

    def plan(sel, source_img, l_eff, dual):
        sigma = sigma_for[l_eff]
        if sigma == 0.0:
            _deposit_impulses(sel, source_img, acc)
            return
        if use_beta:
            lut = _beta_lut(l_eff, 3.0 * sigma, ctx, dual)
            allowed = ones if lut.min() == 1.0 else _feather(lut[labels_img])
        else:
            allowed = ones
        jobs.extend(_source_jobs(sel, source_img, sigma, allowed, ring, obin))

    order = np.unique(labels_img) if _label_order is None else np.asarray(_label_order)
    for l in order:
        plan(labels_img == l, img, int(l), dual=False)

    if use_dual and rep.dual.count:
        active = rep.dual.support & ~np.isin(labels_img, targets.labels)
        for l_d in np.unique(rep.dual.index[active]):
            plan(active & (rep.dual.index == l_d), dimg, int(l_d), dual=True)

    if threads <= 1 or len(jobs) <= 1:
        for job in jobs:
            _emit_group(job, acc)
    else:
        shards = [Accumulator.zeros(h, w) for _ in range(min(threads, len(jobs)))]

        def run(i):
            for job in jobs[i :: len(shards)]:
                _emit_group(job, shards[i])

        with ThreadPoolExecutor(max_workers=len(shards)) as pool:
            list(pool.map(run, range(len(shards))))
        for shard in shards:
            acc.merge(shard)

    return acc.resolve()


def render_container(path, spec: dict) -> np.ndarray:
    """Render a serialized representation with a target spec record.

    The record carries "mode" plus its mode parameters, and optionally
    "use_beta" / "use_dual" / "use_bokeh" flags.
    """
    from .representation import deserialize

    rep = deserialize(path)
    targets = make_targets(spec["mode"], spec, rep)
    return refocus(
        rep,
        targets,
        use_beta=bool(spec.get("use_beta", True)),
        use_dual=bool(spec.get("use_dual", True)),
        use_bokeh=bool(spec.get("use_bokeh", True)),
        threads=spec.get("threads"),
    )
