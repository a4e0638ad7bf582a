import json

import numpy as np
import pytest

from fsr.errors import AlignmentDiverged, BadManifest, DimensionMismatch, MissingSlices
from fsr.geometry import CameraGeometry
from fsr.images import write_png16
from fsr.stack import FocalStack, _fit_similarity, _warp_similarity, align_stack, load_stack, save_stack
from fsr.synth import noise_texture


def demo_stack(k=3, size=64, seed=0):
    rng = np.random.default_rng(seed)
    slices = [noise_texture(size, size, rng) for _ in range(k)]
    return FocalStack(slices, CameraGeometry())


def test_stack_invariants():
    s = demo_stack()
    assert s.k == 3
    assert s.width == s.height == 64
    with pytest.raises(MissingSlices):
        FocalStack(s.slices[:1], CameraGeometry())
    bad = [s.slices[0], s.slices[1][:32]]
    with pytest.raises(DimensionMismatch):
        FocalStack(bad, CameraGeometry())


def test_save_load_round_trip(tmp_path):
    s = demo_stack()
    save_stack(s, tmp_path / "st")
    loaded = load_stack(tmp_path / "st")
    assert loaded.k == 3
    assert loaded.geometry == s.geometry
    for a, b in zip(loaded.slices, s.slices):
        assert np.allclose(a, b, atol=1.5e-5)  # one 16-bit quantization step


def test_load_without_manifest_sorts_files(tmp_path):
    rng = np.random.default_rng(1)
    for name in ("b.png", "a.png"):
        write_png16(tmp_path / name, noise_texture(16, 16, rng))
    st = load_stack(tmp_path, manifest={"gamma": "linear"})
    assert st.k == 2


def test_load_missing_slices(tmp_path):
    write_png16(tmp_path / "only.png", np.zeros((8, 8, 3)))
    with pytest.raises(MissingSlices):
        load_stack(tmp_path)
    with pytest.raises(MissingSlices):
        load_stack(tmp_path, manifest={"slices": ["only.png", "ghost.png"]})


def test_load_bad_manifest(tmp_path):
    (tmp_path / "stack.json").write_text("{broken")
    with pytest.raises(BadManifest):
        load_stack(tmp_path)


def test_load_bad_geometry(tmp_path):
    rng = np.random.default_rng(2)
    for i in range(2):
        write_png16(tmp_path / f"s{i}.png", noise_texture(8, 8, rng))
    (tmp_path / "stack.json").write_text(json.dumps({"geometry": {"A_mm": -1}}))
    with pytest.raises(BadManifest):
        load_stack(tmp_path)


def test_load_dimension_mismatch(tmp_path):
    rng = np.random.default_rng(3)
    write_png16(tmp_path / "s0.png", noise_texture(8, 8, rng))
    write_png16(tmp_path / "s1.png", noise_texture(9, 8, rng))
    with pytest.raises(DimensionMismatch):
        load_stack(tmp_path)


def test_fit_recovers_translation():
    rng = np.random.default_rng(4)
    ref = noise_texture(128, 128, rng, smooth=2.5)[:, :, 0]
    moved = _warp_similarity(ref, 1.0, 3.0, -2.0)
    scale, tx, ty = _fit_similarity(moved, ref)
    # warping by the recovered params must undo the injected (3, -2) shift
    assert abs(tx + 3.0) < 0.5
    assert abs(ty - 2.0) < 0.5
    assert abs(scale - 1.0) < 0.005


def test_fit_recovers_scale():
    rng = np.random.default_rng(5)
    ref = noise_texture(128, 128, rng, smooth=2.5)[:, :, 0]
    moved = _warp_similarity(ref, 1.02, 0.0, 0.0)
    scale, tx, ty = _fit_similarity(moved, ref)
    assert abs(scale * 1.02 - 1.0) < 0.005
    assert abs(tx) < 0.5 and abs(ty) < 0.5


def test_align_already_aligned_is_identity():
    rng = np.random.default_rng(6)
    base = noise_texture(96, 96, rng, smooth=2.0)
    s = FocalStack([base.copy() for _ in range(3)], CameraGeometry())
    out = align_stack(s)
    assert out.aligned
    for a, b in zip(out.slices, s.slices):
        assert np.allclose(a, b, atol=1e-6)


def test_align_fixes_shifted_slice():
    rng = np.random.default_rng(7)
    base = noise_texture(96, 96, rng, smooth=2.0)
    shifted = np.stack(
        [_warp_similarity(base[:, :, c], 1.0, 3.0, -2.0) for c in range(3)], axis=2
    )
    s = FocalStack([shifted.astype(np.float32), base, base.copy()], CameraGeometry())
    out = align_stack(s)
    core = np.s_[10:-10, 10:-10]
    err_before = np.abs(shifted - base)[core].mean()
    err_after = np.abs(out.slices[0] - base)[core].mean()
    assert err_after < 0.25 * err_before


def test_align_never_degrades(recwarn):
    # flat slices offer no alignment signal; output must stay untouched
    flat = np.full((64, 64, 3), 0.5, dtype=np.float32)
    s = FocalStack([flat.copy(), flat.copy(), flat.copy()], CameraGeometry())
    out = align_stack(s)
    for a in out.slices:
        assert np.allclose(a, flat)
    assert all(issubclass(w.category, (AlignmentDiverged, RuntimeWarning)) for w in recwarn.list)
