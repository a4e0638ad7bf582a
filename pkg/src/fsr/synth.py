"""Synthetic focal stack rendering with exact ground truth.

Scenes are fronto-parallel textured layers at known depths. Each slice
blurs every layer by a scheduled sigma and composites back-to-front with
occlusion-aware matting: a blurred foreground alpha gates the background
contribution, so defocused background never leaks across an in-focus
silhouette. The renderer is deliberately self-contained (its own kernels,
plain FFT convolution) so it can serve as an oracle for the rest of the
package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage, signal

from .errors import DegenerateScene
from .geometry import CameraGeometry
from .stack import FocalStack


@dataclass(frozen=True)
class SceneLayer:
    """One fronto-parallel layer.

    @param texture: HxWx3 float linear-light texture, defined everywhere.
    @param mask: HxW bool visibility mask; None means full coverage
        (only sensible for the farthest layer).
    """

    texture: np.ndarray = field(repr=False)
    mask: np.ndarray | None = field(default=None, repr=False)


@dataclass(frozen=True)
class SyntheticScene:
    """Layered scene plus its blur schedule.

    @param layers: ordered near to far; the last layer must cover the frame.
    @param k: number of slices to render.
    @param sigma_table: k x n_layers blur sigmas; sigma_table[i, j] is the
        blur of layer j in slice i. Each column must have a unique minimum
        (the layer's focus slice).
    @param clip_fraction / clip_orientation: optional frame-wide vignetting
        chord applied to every kernel (fixed orientation, radians).
    """

    layers: list
    k: int
    sigma_table: np.ndarray | None
    geometry: CameraGeometry = CameraGeometry()
    clip_fraction: float = 0.0
    clip_orientation: float = 0.0

    def __post_init__(self):
        if self.sigma_table is None:
            if len(self.layers) == 1 and self.k > 1:
                raise DegenerateScene("single layer with k>1 needs a sigma schedule")
            raise ValueError("sigma_table is required")
        t = np.asarray(self.sigma_table, dtype=np.float64)
        if t.shape != (self.k, len(self.layers)):
            raise ValueError(f"sigma_table shape {t.shape} != ({self.k}, {len(self.layers)})")
        if (t < 0).any():
            raise ValueError("sigma_table must be non-negative")
        for j in range(t.shape[1]):
            col = t[:, j]
            if (col == col.min()).sum() != 1:
                raise ValueError(f"layer {j} lacks a unique sharpest slice")

    @property
    def focus_slices(self) -> list:
        """Per-layer slice index of sharpest focus."""
        t = np.asarray(self.sigma_table)
        return [int(np.argmin(t[:, j])) for j in range(t.shape[1])]


@dataclass(frozen=True)
class GroundTruth:
    """Oracle record accompanying a rendered stack.

    @param labels: HxW per-pixel focus slice of the visible layer.
    @param dual: HxW hidden/adjacent focus slice near depth edges, -1 where
        no dual layer applies.
    @param sigma_table: the scene's blur schedule.
    @param visible: HxW index of the visible (topmost) layer.
    @param layer_focus: focus slice per layer.
    @param depth_edges: HxW bool mask of visible silhouette pixels.
    """

    labels: np.ndarray = field(repr=False)
    dual: np.ndarray = field(repr=False)
    sigma_table: np.ndarray = field(repr=False)
    visible: np.ndarray = field(repr=False)
    layer_focus: list = field(default_factory=list)
    depth_edges: np.ndarray = field(default=None, repr=False)


def _synth_kernel(sigma: float, clip_fraction: float = 0.0, orientation: float = 0.0) -> np.ndarray:
    """Unit-mass Gaussian truncated at 3 sigma, optionally chord-clipped."""
    if sigma <= 0:
        return np.ones((1, 1))
    r = max(1, int(math.ceil(3.0 * sigma)))
    yy, xx = np.mgrid[-r : r + 1, -r : r + 1].astype(np.float64)
    d2 = xx * xx + yy * yy
    k = np.exp(-d2 / (2.0 * sigma * sigma))
    k[d2 > (3.0 * sigma) ** 2] = 0.0
    if clip_fraction > 0.0:
        nx, ny = math.cos(orientation), math.sin(orientation)
        k[(xx * nx + yy * ny) < -(1.0 - clip_fraction) * 3.0 * sigma] = 0.0
    return k / k.sum()


def _blur(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Replicate-padded convolution; accepts HxW or HxWx3."""
    if kernel.shape == (1, 1):
        return img.astype(np.float64, copy=True) * kernel[0, 0]
    r = kernel.shape[0] // 2
    if img.ndim == 2:
        padded = np.pad(img.astype(np.float64), r, mode="edge")
        out = signal.fftconvolve(padded, kernel, mode="same")
        return out[r:-r, r:-r]
    chans = [_blur(img[:, :, c], kernel) for c in range(img.shape[2])]
    return np.stack(chans, axis=2)


def synth_stack(scene: SyntheticScene) -> tuple[FocalStack, GroundTruth]:
    """Render a focal stack from a layered scene; returns it with ground truth."""
    n = len(scene.layers)
    h, w = scene.layers[0].texture.shape[:2]
    masks = []
    for idx, layer in enumerate(scene.layers):
        if layer.mask is None:
            masks.append(np.ones((h, w), dtype=np.float64))
        else:
            masks.append(layer.mask.astype(np.float64))
    if not np.all(masks[-1] == 1.0):
        raise ValueError("farthest layer must cover the full frame")

    slices = []
    table = np.asarray(scene.sigma_table, dtype=np.float64)
    for i in range(scene.k):
        out = None
        for j in reversed(range(n)):
            kern = _synth_kernel(table[i, j], scene.clip_fraction, scene.clip_orientation)
            color = _blur(scene.layers[j].texture * masks[j][:, :, None], kern)
            if out is None:
                out = color  # farthest layer, full coverage
                continue
            alpha = np.clip(_blur(masks[j], kern), 0.0, 1.0)
            out = color + (1.0 - alpha[:, :, None]) * out
        slices.append(np.clip(out, 0.0, 1.0).astype(np.float32))

    stack = FocalStack(slices, scene.geometry, aligned=True)
    return stack, _ground_truth(scene, masks)


def _ground_truth(scene: SyntheticScene, masks: list) -> GroundTruth:
    n = len(scene.layers)
    h, w = masks[0].shape
    focus = scene.focus_slices
    table = np.asarray(scene.sigma_table, dtype=np.float64)

    visible = np.full((h, w), n - 1, dtype=np.int32)
    for j in reversed(range(n - 1)):
        visible[masks[j] > 0.5] = j
    labels = np.take(np.asarray(focus, dtype=np.int32), visible)

    dual = np.full((h, w), -1, dtype=np.int32)
    edges_all = np.zeros((h, w), dtype=bool)
    for j in range(n - 1):
        m = masks[j] > 0.5
        if not m.any() or m.all():
            continue
        inner = m & ~ndimage.binary_erosion(m, border_value=True)
        edge = inner & (visible == j)  # silhouette actually visible
        edges_all |= edge
        if not edge.any():
            continue
        radius = 3.0 * float(table[:, j].max())
        dist = ndimage.distance_transform_edt(~edge)
        band = dist <= radius
        # behind the occluder: what this layer hides
        beneath = np.full((h, w), n - 1, dtype=np.int32)
        for jj in reversed(range(n - 1)):
            if jj == j:
                continue
            beneath[masks[jj] > 0.5] = jj
        inside = band & (visible == j)
        dual[inside] = np.take(np.asarray(focus, dtype=np.int32), beneath[inside])
        # in front of deeper content: the occluder's blur covers these
        outside = band & (visible > j)
        dual[outside] = focus[j]
    return GroundTruth(
        labels=labels,
        dual=dual,
        sigma_table=table,
        visible=visible,
        layer_focus=list(focus),
        depth_edges=edges_all,
    )


def noise_texture(
    h: int,
    w: int,
    rng: np.random.Generator,
    lo: float = 0.15,
    hi: float = 0.85,
    smooth: float = 1.5,
    tint: tuple | None = None,
) -> np.ndarray:
    """Band-limited random texture in [lo, hi], optionally tinted per channel."""
    tex = rng.random((h, w, 3))
    tex = ndimage.gaussian_filter(tex, sigma=(smooth, smooth, 0))
    tex -= tex.min(axis=(0, 1), keepdims=True)
    peak = tex.max(axis=(0, 1), keepdims=True)
    peak[peak == 0] = 1.0
    tex = lo + (hi - lo) * tex / peak
    if tint is not None:
        tex = tex * np.asarray(tint, dtype=np.float64)[None, None, :]
    return tex.astype(np.float32)


def ramp_sigma_table(k: int, focus_slices: list, rate: float = 0.5) -> np.ndarray:
    """Blur schedule growing linearly with slice distance from each focus slice."""
    table = np.zeros((k, len(focus_slices)), dtype=np.float64)
    for j, f in enumerate(focus_slices):
        table[:, j] = rate * np.abs(np.arange(k) - f)
    return table


def geometry_for_focus(focus_slices: list, k: int, geometry: CameraGeometry) -> list:
    """Metric depths implied by each layer's focus slice."""
    return [geometry.label_depth(f, k) for f in focus_slices]


def three_plane_scene(
    seed: int = 0,
    size: int = 256,
    k: int = 10,
    rate: float = 0.5,
    geometry: CameraGeometry | None = None,
) -> SyntheticScene:
    """Two shaped foreground planes over a full background plane."""
    rng = np.random.default_rng(seed)
    h = w = size
    focus = [0, k // 2, k - 1]
    geo = geometry or CameraGeometry()

    yy, xx = np.mgrid[0:h, 0:w]
    cx0 = w * (0.30 + 0.08 * rng.random())
    cy0 = h * (0.35 + 0.10 * rng.random())
    r0 = size * (0.14 + 0.04 * rng.random())
    near_mask = (xx - cx0) ** 2 + (yy - cy0) ** 2 <= r0**2

    x0 = int(w * (0.55 + 0.05 * rng.random()))
    y0 = int(h * (0.45 + 0.05 * rng.random()))
    mid_mask = np.zeros((h, w), dtype=bool)
    mid_mask[y0 : y0 + int(h * 0.38), x0 : x0 + int(w * 0.30)] = True
    mid_mask &= ~near_mask

    layers = [
        SceneLayer(noise_texture(h, w, rng), near_mask),
        SceneLayer(noise_texture(h, w, rng), mid_mask),
        SceneLayer(noise_texture(h, w, rng), None),
    ]
    return SyntheticScene(layers, k, ramp_sigma_table(k, focus, rate), geo)


def two_plane_scene(
    seed: int = 1,
    size: int = 256,
    k: int = 10,
    rate: float = 1.0,
    stripes: int = 3,
) -> SyntheticScene:
    """Red striped foreground over a green background.

    The geometry uses a fine pixel pitch so the occlusion margin blocks
    background-to-foreground spill at near-focus render targets.
    """
    rng = np.random.default_rng(seed)
    h = w = size
    focus = [2, k - 2]
    geo = CameraGeometry(pixel_pitch_mm=0.0015)

    mask = np.zeros((h, w), dtype=bool)
    period = w // (2 * stripes)
    for s in range(stripes):
        x0 = period * (2 * s + 1) - period // 2
        mask[:, x0 : x0 + period] = True

    red = noise_texture(h, w, rng, lo=0.35, hi=0.95, tint=(1.0, 0.18, 0.18))
    green = noise_texture(h, w, rng, lo=0.35, hi=0.95, tint=(0.18, 1.0, 0.18))
    layers = [SceneLayer(red, mask), SceneLayer(green, None)]
    return SyntheticScene(layers, k, ramp_sigma_table(k, focus, rate), geo)


def bokeh_scene(seed: int = 2, size: int = 256, k: int = 10, radiance: float = 5.0) -> SyntheticScene:
    """Single dark textured plane with saturated point lights.

    Light discs carry radiance beyond the sensor range; slices clip them,
    so the true scale is only recoverable from the defocused disc growth.
    The blur ramp tops out at sigma 3 so the lights stay clipped in every
    slice (the defocused center must still exceed the sensor range).
    """
    rng = np.random.default_rng(seed)
    h = w = size
    tex = noise_texture(h, w, rng, lo=0.05, hi=0.30)
    yy, xx = np.mgrid[0:h, 0:w]
    for cx, cy in ((0.3, 0.3), (0.7, 0.55), (0.45, 0.75)):
        disc = (xx - w * cx) ** 2 + (yy - h * cy) ** 2 <= 3.0**2
        tex[disc] = radiance
    focus = [k // 2]
    rate = 3.0 / max(k - 1 - k // 2, k // 2)
    return SyntheticScene([SceneLayer(tex, None)], k, ramp_sigma_table(k, focus, rate=rate))


def vignette_scene(
    seed: int = 3,
    size: int = 256,
    k: int = 6,
    clip_fraction: float = 0.25,
    clip_orientation: float = 0.0,
) -> SyntheticScene:
    """Single plane rendered with chord-clipped kernels frame-wide.

    Models the vignetting seen by a region near the frame border whose
    direction toward the image center is `clip_orientation`.
    """
    rng = np.random.default_rng(seed)
    tex = noise_texture(size, size, rng)
    focus = [k // 2]
    return SyntheticScene(
        [SceneLayer(tex, None)],
        k,
        ramp_sigma_table(k, focus, rate=0.8),
        clip_fraction=clip_fraction,
        clip_orientation=clip_orientation,
    )
