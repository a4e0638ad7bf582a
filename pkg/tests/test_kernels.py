import math

import numpy as np
import pytest

from fsr.kernels import (
    CLIP_EDGE,
    CLIP_FRACTIONS,
    CLIP_MID,
    FULL,
    KernelShape,
    gaussian_kernel,
    kernel_radius,
    shape_for_position,
)


def test_zero_sigma_is_impulse():
    k = gaussian_kernel(0.0)
    assert k.shape == (1, 1)
    assert k[0, 0] == 1.0


@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0, 3.5, 7.0])
def test_unit_mass(sigma):
    k = gaussian_kernel(sigma)
    assert abs(k.sum() - 1.0) < 1e-6


@pytest.mark.parametrize("shape_id", [CLIP_MID, CLIP_EDGE])
@pytest.mark.parametrize("orientation", [0.0, math.pi / 3, -2.0])
def test_clipped_unit_mass(shape_id, orientation):
    shape = KernelShape.from_id(shape_id, orientation)
    k = gaussian_kernel(2.0, shape)
    assert abs(k.sum() - 1.0) < 1e-6


def test_truncated_at_three_sigma():
    sigma = 2.0
    k = gaussian_kernel(sigma)
    r = k.shape[0] // 2
    yy, xx = np.mgrid[-r : r + 1, -r : r + 1]
    assert (k[np.hypot(yy, xx) > 3 * sigma + 1e-9] == 0).all()
    assert k[r, r] == k.max()


def test_chord_removes_outward_cap():
    # normal points toward +x (image center to the right): the removed cap
    # is on the -x side of the kernel
    sigma = 3.0
    shape = KernelShape.from_id(CLIP_EDGE, orientation=0.0)
    k = gaussian_kernel(sigma, shape)
    full = gaussian_kernel(sigma)
    r = k.shape[0] // 2
    cut = (1 - CLIP_FRACTIONS[CLIP_EDGE]) * 3 * sigma
    yy, xx = np.mgrid[-r : r + 1, -r : r + 1]
    assert (k[xx < -cut] == 0).all()
    # the +x side survives wherever the full kernel has support
    assert (k[(xx > 0) & (full > 0)] > 0).all()


def test_clip_reduces_support():
    full = gaussian_kernel(2.5)
    clipped = gaussian_kernel(2.5, KernelShape.from_id(CLIP_EDGE, 1.0))
    assert (clipped > 0).sum() < (full > 0).sum()


def test_kernel_radius():
    assert kernel_radius(0.0) == 0
    assert kernel_radius(1.0) == 3
    assert kernel_radius(2.5) == 8


def test_kernel_cache_returns_readonly():
    k = gaussian_kernel(1.5)
    with pytest.raises(ValueError):
        k[0, 0] = 5.0


def test_shape_rings():
    w = h = 101
    assert shape_for_position(50, 50, w, h).shape_id == FULL
    assert shape_for_position(0, 0, w, h).shape_id == CLIP_EDGE
    # halfway along one axis: rho = 50/(50*sqrt(2)) ~ 0.707 -> CLIP_MID
    assert shape_for_position(0, 50, w, h).shape_id == CLIP_MID


def test_corner_orientation_points_to_center():
    s = shape_for_position(0, 0, 101, 101)
    assert s.shape_id == CLIP_EDGE
    assert abs(s.orientation - math.pi / 4) < 1e-6
    s2 = shape_for_position(100, 100, 101, 101)
    assert abs(s2.orientation - (-3 * math.pi / 4)) < 1e-6


def test_full_shape_cannot_clip():
    with pytest.raises(ValueError):
        KernelShape(FULL, 0.2, 0.0)
    with pytest.raises(ValueError):
        KernelShape("PENTAGON", 0.0, 0.0)
