import numpy as np

from fsr.consensus import CompositeFocusMeasure, cfm_response
from fsr.costvolume import build_cost_volume, composite_from_labels, filter_cost_volume
from fsr.focusmaps import extract_focus_map
from fsr.geometry import CameraGeometry
from fsr.stack import FocalStack
from fsr.synth import noise_texture, synth_stack, three_plane_scene


def small_stack(k=3, size=12, seed=0):
    rng = np.random.default_rng(seed)
    return FocalStack([noise_texture(size, size, rng) for _ in range(k)], CameraGeometry())


def test_uniform_response_uniform_cost():
    st = small_stack()
    resp = np.ones((3, 12, 12))
    cv = build_cost_volume(resp, st)
    assert np.allclose(cv.costs, 1.0 / (1.0 + 1e-12))


def test_reciprocal_ordering():
    st = small_stack()
    resp = np.zeros((3, 12, 12))
    resp[1] = 2.0
    cv = build_cost_volume(resp, st)
    assert (np.argmin(cv.costs, axis=0) == 1).all()


def test_guidance_is_argmax_composite():
    st = small_stack(seed=1)
    rng = np.random.default_rng(2)
    resp = rng.random((3, 12, 12))
    cv = build_cost_volume(resp, st)
    best = np.argmax(resp, axis=0)
    expect = composite_from_labels(st, best)
    assert np.array_equal(cv.guidance, expect)


def test_filter_keeps_nonnegative_and_constant_fixed_point():
    st = small_stack(seed=3)
    resp = np.ones((3, 12, 12)) * 2.0
    cv = build_cost_volume(resp, st)
    out = filter_cost_volume(cv, radius=3)
    assert (out.costs >= 0).all()
    assert np.allclose(out.costs, cv.costs, atol=1e-6)


def test_filtering_heals_isolated_label_noise():
    scene = three_plane_scene(seed=5, size=96, k=6, rate=1.0)
    stack, gt = synth_stack(scene)
    cfm = CompositeFocusMeasure([("LAP1", 0.5), ("TEN", 0.5)])
    resp = cfm_response(stack, cfm)
    cv = build_cost_volume(resp, stack)

    rng = np.random.default_rng(6)
    clean_labels = extract_focus_map(filter_cost_volume(cv), stack).index
    n = 60
    ys = rng.integers(8, 88, n)
    xs = rng.integers(8, 88, n)
    costs = cv.costs.copy()
    wrong = (clean_labels[ys, xs] + 3) % 6
    costs[:, ys, xs] *= 10.0
    costs[wrong, ys, xs] /= 100.0  # isolated pixels now prefer a wrong slice
    noisy_cv = build_cost_volume(resp, stack)
    object.__setattr__(noisy_cv, "costs", costs)

    noisy_labels = np.argmin(costs, axis=0)
    filtered_labels = extract_focus_map(filter_cost_volume(noisy_cv), stack).index
    flipped = noisy_labels[ys, xs] != filtered_labels[ys, xs]
    healed = filtered_labels[ys, xs] == clean_labels[ys, xs]
    assert flipped.mean() >= 0.9
    assert healed.mean() >= 0.9
