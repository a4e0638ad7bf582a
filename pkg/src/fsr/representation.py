"""Compact on-disk form of the focal-stack analysis.

A container directory holds two dense rasters (label map, in-focus
composite) plus run-length files for the thin dual-focus and bokeh
layers, the kernel table, and a manifest with geometry, thresholds, and
per-file checksums. Encoding is byte-deterministic so identical inputs
produce identical containers.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .calibrate import KernelTable
from .errors import CorruptContainer, VersionMismatch
from .focusmaps import NO_DUAL, BokehLayer, DualFocusLayer, FocusMap
from .geometry import CameraGeometry
from .images import decode_png16, decode_png16_indices, encode_png16, encode_png16_indices

FORMAT_VERSION = "fsr/1"
SCALE_FIX = 256.0  # bokeh scale fixed point: 8.8

DEFAULT_THRESHOLDS = {
    "w_frac": 0.10,
    "t_grad": 20.0,
    "t_bokeh": 0.9,
    "t_beta_frac": 0.30,
}

MANIFEST = "manifest.json"
PAYLOAD_FILES = ("I.png", "F_I.png", "Id.rle", "F_Id.rle", "B.rle", "pi.json")


@dataclass(frozen=True)
class Representation:
    """Everything needed to refocus without the original stack.

    Image intensities must sit on the 16-bit grid (multiples of 1/65535);
    the codec is then an exact identity.
    """

    focusmap: FocusMap
    dual: DualFocusLayer
    bokeh: BokehLayer
    kernels: KernelTable
    geometry: CameraGeometry
    k: int
    thresholds: dict = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))

    @property
    def height(self) -> int:
        return self.focusmap.index.shape[0]

    @property
    def width(self) -> int:
        return self.focusmap.index.shape[1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Representation):
            return NotImplemented
        return (
            self.k == other.k
            and self.thresholds == other.thresholds
            and self.geometry == other.geometry
            and self.kernels == other.kernels
            and np.array_equal(self.focusmap.index, other.focusmap.index)
            and np.array_equal(self.focusmap.image, other.focusmap.image)
            and np.array_equal(self.dual.index, other.dual.index)
            and np.array_equal(self.dual.image, other.dual.image)
            and np.array_equal(self.bokeh.scale, other.bokeh.scale)
        )


def _runs_of(mask: np.ndarray) -> list:
    """(start, length) runs of True in the flattened row-major mask."""
    idx = np.flatnonzero(mask.ravel())
    if idx.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(idx) > 1)
    starts = np.concatenate(([0], breaks + 1))
    ends = np.concatenate((breaks, [idx.size - 1]))
    return [(int(idx[s]), int(idx[e] - idx[s] + 1)) for s, e in zip(starts, ends)]


def _encode_rle(mask: np.ndarray, payload: np.ndarray) -> bytes:
    """Run table then payload values for the masked pixels, row-major.

    @param payload: per-pixel uint16 data, shape (n,) or (n, c) for the
        n True pixels of the mask in row-major order.
    """
    runs = _runs_of(mask)
    head = struct.pack("<I", len(runs))
    table = b"".join(struct.pack("<II", s, n) for s, n in runs)
    body = np.ascontiguousarray(payload, dtype="<u2").tobytes()
    return head + table + body


def _decode_rle(blob: bytes, shape: tuple, channels: int) -> tuple:
    """(mask, payload) back from _encode_rle bytes."""
    h, w = shape
    if len(blob) < 4:
        raise CorruptContainer("run-length file too short")
    (count,) = struct.unpack_from("<I", blob, 0)
    need = 4 + 8 * count
    if len(blob) < need:
        raise CorruptContainer("run table truncated")
    mask = np.zeros(h * w, dtype=bool)
    total = 0
    prev_end = -1
    for r in range(count):
        start, length = struct.unpack_from("<II", blob, 4 + 8 * r)
        if length == 0 or start <= prev_end or start + length > h * w:
            raise CorruptContainer(f"bad run ({start}, {length})")
        mask[start : start + length] = True
        prev_end = start + length - 1
        total += length
    body = blob[need:]
    expect = total * channels * 2
    if len(body) != expect:
        raise CorruptContainer(f"payload is {len(body)} bytes, expected {expect}")
    payload = np.frombuffer(body, dtype="<u2")
    if channels > 1:
        payload = payload.reshape(total, channels)
    return mask.reshape(h, w), payload


def _encode_dual(dual: DualFocusLayer) -> tuple:
    sup = dual.support
    order = sup  # row-major boolean fancy indexing preserves raster order
    labels = dual.index[order].astype("<u2")
    rgb = np.rint(dual.image[order] * 65535.0).astype("<u2")
    return _encode_rle(sup, labels), _encode_rle(sup, rgb)


def _encode_bokeh(bokeh: BokehLayer) -> bytes:
    sup = bokeh.mask
    fixed = np.rint(bokeh.scale[sup] * SCALE_FIX).astype("<u2")
    return _encode_rle(sup, fixed)


def _payload_bytes(rep: Representation) -> dict:
    id_blob, fid_blob = _encode_dual(rep.dual)
    return {
        "I.png": encode_png16_indices(rep.focusmap.index),
        "F_I.png": encode_png16(rep.focusmap.image),
        "Id.rle": id_blob,
        "F_Id.rle": fid_blob,
        "B.rle": _encode_bokeh(rep.bokeh),
        "pi.json": json.dumps(rep.kernels.to_dict(), indent=1, sort_keys=True).encode(),
    }


def serialize(rep: Representation, path) -> Path:
    """Write the container directory; returns its path."""
    report = validate(rep)
    if report:
        raise ValueError("refusing to serialize an invalid representation: " + report[0])
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    payload = _payload_bytes(rep)
    manifest = {
        "version": FORMAT_VERSION,
        "k": rep.k,
        "width": rep.width,
        "height": rep.height,
        "geometry": rep.geometry.to_dict(),
        "thresholds": rep.thresholds,
        "checksum": {name: hashlib.sha256(data).hexdigest() for name, data in payload.items()},
    }
    for name, data in payload.items():
        (root / name).write_bytes(data)
    (root / MANIFEST).write_text(json.dumps(manifest, indent=1, sort_keys=True))
    return root


def deserialize(path) -> Representation:
    """Read a container back; verifies version, checksums, and invariants."""
    root = Path(path)
    try:
        manifest = json.loads((root / MANIFEST).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CorruptContainer(f"unreadable manifest: {exc}") from exc
    version = manifest.get("version")
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"container is {version!r}, expected {FORMAT_VERSION!r}")

    blobs = {}
    for name in PAYLOAD_FILES:
        try:
            blobs[name] = (root / name).read_bytes()
        except OSError as exc:
            raise CorruptContainer(f"missing payload file {name}") from exc
        digest = hashlib.sha256(blobs[name]).hexdigest()
        if digest != manifest.get("checksum", {}).get(name):
            raise CorruptContainer(f"checksum mismatch for {name}")

    try:
        k = int(manifest["k"])
        h, w = int(manifest["height"]), int(manifest["width"])
        geometry = CameraGeometry.from_dict(manifest["geometry"])
        thresholds = dict(manifest["thresholds"])
        index = decode_png16_indices(blobs["I.png"])
        image = decode_png16(blobs["F_I.png"])
        kernels = KernelTable.from_dict(json.loads(blobs["pi.json"].decode()))
    except (KeyError, ValueError, TypeError) as exc:
        raise CorruptContainer(f"undecodable container field: {exc}") from exc

    if index.shape != (h, w) or image.shape != (h, w, 3):
        raise CorruptContainer("raster dimensions disagree with manifest")

    sup_id, labels = _decode_rle(blobs["Id.rle"], (h, w), 1)
    sup_fid, rgb = _decode_rle(blobs["F_Id.rle"], (h, w), 3)
    if not np.array_equal(sup_id, sup_fid):
        raise CorruptContainer("dual label and intensity supports differ")
    dual_index = np.full((h, w), NO_DUAL, dtype=np.int32)
    dual_index[sup_id] = labels.astype(np.int32)
    dual_image = np.zeros((h, w, 3), dtype=np.float64)
    dual_image[sup_id] = rgb.astype(np.float64) / 65535.0

    sup_b, fixed = _decode_rle(blobs["B.rle"], (h, w), 1)
    scale = np.zeros((h, w), dtype=np.float32)
    scale[sup_b] = fixed.astype(np.float32) / SCALE_FIX

    rep = Representation(
        focusmap=FocusMap(index=index.astype(np.int32), image=image),
        dual=DualFocusLayer(index=dual_index, image=dual_image),
        bokeh=BokehLayer(scale=scale),
        kernels=kernels,
        geometry=geometry,
        k=k,
        thresholds=thresholds,
    )
    report = validate(rep)
    if report:
        raise CorruptContainer("container violates invariants: " + "; ".join(report[:3]))
    return rep


def validate(rep: Representation) -> list:
    """Invariant violations as human-readable strings; empty means valid."""
    out = []
    h, w = rep.focusmap.index.shape
    if rep.focusmap.image.shape != (h, w, 3):
        out.append(f"in-focus composite shape {rep.focusmap.image.shape} != ({h}, {w}, 3)")
    if rep.dual.index.shape != (h, w):
        out.append(f"dual index shape {rep.dual.index.shape} != ({h}, {w})")
    if rep.dual.image.shape != (h, w, 3):
        out.append(f"dual image shape {rep.dual.image.shape} != ({h}, {w}, 3)")
    if rep.bokeh.scale.shape != (h, w):
        out.append(f"bokeh scale shape {rep.bokeh.scale.shape} != ({h}, {w})")

    idx = rep.focusmap.index
    if idx.min() < 0 or idx.max() >= rep.k:
        out.append("focus labels outside [0, k)")
    sup = rep.dual.support
    if sup.any():
        dl = rep.dual.index[sup]
        if dl.min() < 0 or dl.max() >= rep.k:
            out.append("dual labels outside [0, k)")
        same = sup & (rep.dual.index == rep.focusmap.index)
        if same.any():
            y, x = np.argwhere(same)[0]
            out.append(f"dual label equals primary at ({y}, {x})")
    off = ~sup
    if rep.dual.image[off].any():
        out.append("dual intensities nonzero off the support")

    if rep.kernels.k != rep.k:
        out.append(f"kernel table is {rep.kernels.k}x{rep.kernels.k}, stack has k={rep.k}")
    if (rep.kernels.sigma < 0).any() or np.diag(rep.kernels.sigma).any():
        out.append("kernel table blur sizes invalid")

    bm = rep.bokeh.mask
    if bm.any():
        vals = rep.bokeh.scale[bm]
        if vals.min() < 1.0 or vals.max() > 100.0:
            out.append("bokeh scales outside [1, 100]")
    return out
