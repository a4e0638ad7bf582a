"""Focal stack container, loading, and slice registration."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import cv2
import numpy as np
from scipy import optimize

from .errors import AlignmentDiverged, BadManifest, DimensionMismatch, MissingSlices
from .geometry import CameraGeometry
from .images import decode_to_linear, rescale_to_budget, to_gray, write_png16

MANIFEST_NAME = "stack.json"
IMAGE_SUFFIXES = {".png", ".ppm"}


@dataclass(frozen=True)
class FocalStack:
    """Ordered focal slices, nearest focus first.

    @param slices: k float32 HxWx3 rasters, linear light, values in [0,1].
    @param geometry: camera constants shared by all slices.
    @param aligned: True once slices are registered to a common frame.
    """

    slices: list = field(repr=False)
    geometry: CameraGeometry
    aligned: bool = False

    def __post_init__(self):
        if len(self.slices) < 2:
            raise MissingSlices(f"focal stack needs >= 2 slices, got {len(self.slices)}")
        h, w = self.slices[0].shape[:2]
        for i, s in enumerate(self.slices):
            if s.shape[:2] != (h, w) or s.ndim != 3 or s.shape[2] != 3:
                raise DimensionMismatch(
                    f"slice {i} has shape {s.shape}, expected ({h}, {w}, 3)"
                )

    @property
    def k(self) -> int:
        return len(self.slices)

    @property
    def height(self) -> int:
        return self.slices[0].shape[0]

    @property
    def width(self) -> int:
        return self.slices[0].shape[1]


def _read_manifest(directory: Path) -> dict:
    path = directory / MANIFEST_NAME
    if not path.exists():
        return {}
    try:
        manifest = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise BadManifest(f"unreadable manifest {path}: {exc}") from exc
    if not isinstance(manifest, dict):
        raise BadManifest(f"manifest {path} must be a JSON object")
    return manifest


def load_stack(directory: str | Path, manifest: dict | None = None) -> FocalStack:
    """Load a focal stack from a directory of image files.

    A `stack.json` manifest supplies slice order, camera geometry, and the
    stored gamma; all fields have documented defaults. Slices larger than
    ~1.2 Mpixels are downscaled, preserving aspect ratio.
    """
    directory = Path(directory)
    if manifest is None:
        manifest = _read_manifest(directory)

    names = manifest.get("slices")
    if names is None:
        names = sorted(
            p.name for p in directory.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES
        )
    elif not isinstance(names, list) or not all(isinstance(n, str) for n in names):
        raise BadManifest("manifest field 'slices' must be a list of filenames")

    missing = [n for n in names if not (directory / n).exists()]
    if missing:
        raise MissingSlices(f"manifest references missing files: {missing}")
    if len(names) < 2:
        raise MissingSlices(f"found {len(names)} slice images in {directory}, need >= 2")

    gamma = manifest.get("gamma", 2.2)
    if gamma != "linear" and not isinstance(gamma, (int, float)):
        raise BadManifest("manifest field 'gamma' must be a number or \"linear\"")
    geo_dict = manifest.get("geometry", {})
    if not isinstance(geo_dict, dict):
        raise BadManifest("manifest field 'geometry' must be an object")
    try:
        geometry = CameraGeometry.from_dict(geo_dict)
    except (TypeError, ValueError) as exc:
        raise BadManifest(f"invalid geometry: {exc}") from exc

    slices = []
    for n in names:
        img = decode_to_linear(directory / n, gamma=gamma)
        if slices and img.shape != slices[0].shape:
            raise DimensionMismatch(
                f"slice {n} decodes to {img.shape[:2]}, expected {slices[0].shape[:2]}"
            )
        slices.append(img)
    slices = [rescale_to_budget(s) for s in slices]
    return FocalStack(slices, geometry, aligned=bool(manifest.get("aligned", False)))


def save_stack(stack: FocalStack, directory: str | Path, gamma: float | str = "linear") -> Path:
    """Write a stack as 16-bit PNG slices plus a manifest; returns the directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    names = []
    for i, s in enumerate(stack.slices):
        name = f"slice_{i:02d}.png"
        out = s if gamma == "linear" else np.power(s, 1.0 / float(gamma))
        write_png16(directory / name, out)
        names.append(name)
    manifest = {
        "slices": names,
        "geometry": stack.geometry.to_dict(),
        "gamma": gamma,
        "aligned": stack.aligned,
    }
    (directory / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return directory


def _warp_similarity(img: np.ndarray, scale: float, tx: float, ty: float) -> np.ndarray:
    h, w = img.shape[:2]
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    m = np.array(
        [[scale, 0.0, tx + (1.0 - scale) * cx], [0.0, scale, ty + (1.0 - scale) * cy]],
        dtype=np.float64,
    )
    return cv2.warpAffine(
        img, m, (w, h), flags=cv2.INTER_LINEAR, borderMode=cv2.BORDER_REPLICATE
    )


def _ncc(a: np.ndarray, b: np.ndarray) -> float:
    # central crop sidesteps border pixels disturbed by warping
    h, w = a.shape
    mh, mw = max(1, h // 10), max(1, w // 10)
    av = a[mh : h - mh, mw : w - mw].ravel()
    bv = b[mh : h - mh, mw : w - mw].ravel()
    av = av - av.mean()
    bv = bv - bv.mean()
    denom = float(np.linalg.norm(av) * np.linalg.norm(bv))
    if denom == 0:
        return 0.0
    return float(np.dot(av, bv) / denom)


def _fit_similarity(moving: np.ndarray, ref: np.ndarray) -> tuple[float, float, float]:
    """Estimate (scale, tx, ty) maximizing correlation of moving against ref."""
    levels = []
    m, r = moving, ref
    while min(m.shape) >= 64:
        levels.append((m, r))
        m = cv2.resize(m, (m.shape[1] // 2, m.shape[0] // 2), interpolation=cv2.INTER_AREA)
        r = cv2.resize(r, (r.shape[1] // 2, r.shape[0] // 2), interpolation=cv2.INTER_AREA)
    if not levels:
        levels.append((moving, ref))

    params = np.array([1.0, 0.0, 0.0])
    for level, (m, r) in enumerate(reversed(levels)):
        factor = 2.0 ** (len(levels) - 1 - level)

        def cost(p, m=m, r=r):
            return -_ncc(_warp_similarity(m, p[0], p[1], p[2]), r)

        if level == 0:
            # seed with a coarse translation grid before local refinement
            best = (cost(params), params.copy())
            for ty in range(-6, 7, 2):
                for tx in range(-6, 7, 2):
                    p = np.array([1.0, float(tx), float(ty)])
                    c = cost(p)
                    if c < best[0]:
                        best = (c, p)
            params = best[1]
        res = optimize.minimize(
            cost,
            params,
            method="Powell",
            options={"xtol": 1e-4 / factor, "ftol": 1e-7, "maxiter": 200},
        )
        params = res.x
        if level < len(levels) - 1:
            params = np.array([params[0], params[1] * 2.0, params[2] * 2.0])
    return float(params[0]), float(params[1]), float(params[2])


def align_stack(stack: FocalStack) -> FocalStack:
    """Register every slice to the middle slice with a scale+translation warp.

    Correlation against the reference never decreases: a slice whose best
    warp fails to improve it is kept untouched and a warning is emitted.
    """
    ref_idx = stack.k // 2
    ref_gray = to_gray(stack.slices[ref_idx])
    out = []
    for i, s in enumerate(stack.slices):
        if i == ref_idx:
            out.append(s)
            continue
        gray = to_gray(s)
        before = _ncc(gray, ref_gray)
        scale, tx, ty = _fit_similarity(gray, ref_gray)
        if abs(scale - 1.0) < 1e-4 and abs(tx) < 0.02 and abs(ty) < 0.02:
            out.append(s)  # identity warp, skip the resampling
            continue
        warped = _warp_similarity(s, scale, tx, ty)
        after = _ncc(to_gray(warped), ref_gray)
        if after < before:
            warnings.warn(
                AlignmentDiverged(f"slice {i}: correlation {before:.4f} -> {after:.4f}, kept original")
            )
            out.append(s)
        else:
            out.append(np.clip(warped, 0.0, 1.0).astype(np.float32))
    return replace(stack, slices=out, aligned=True)
