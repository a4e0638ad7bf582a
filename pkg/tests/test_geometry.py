import pytest

from fsr.geometry import CameraGeometry


def test_defaults():
    g = CameraGeometry()
    assert g.aperture_mm == 5.0
    assert g.focal_length_mm == 30.0
    assert g.depth_near_mm == 300.0
    assert g.depth_far_mm == 5000.0


def test_label_depth_endpoints():
    g = CameraGeometry()
    assert g.label_depth(0, 10) == 300.0
    assert g.label_depth(9, 10) == 5000.0


def test_label_depth_linear_midpoint():
    g = CameraGeometry(depth_near_mm=100.0, depth_far_mm=300.0)
    assert g.label_depth(1, 3) == pytest.approx(200.0)


def test_invalid_geometry_rejected():
    with pytest.raises(ValueError):
        CameraGeometry(aperture_mm=0.0)
    with pytest.raises(ValueError):
        CameraGeometry(depth_near_mm=500.0, depth_far_mm=400.0)
    with pytest.raises(ValueError):
        CameraGeometry(focal_length_mm=-1.0)


def test_aperture_radius_px():
    g = CameraGeometry(aperture_mm=5.0, pixel_pitch_mm=0.005)
    assert g.aperture_radius_px() == pytest.approx(500.0)


def test_dict_round_trip():
    g = CameraGeometry(aperture_mm=8.0, pixel_pitch_mm=0.002)
    assert CameraGeometry.from_dict(g.to_dict()) == g


def test_from_dict_defaults_missing_fields():
    g = CameraGeometry.from_dict({"A_mm": 7.0})
    assert g.aperture_mm == 7.0
    assert g.focal_length_mm == 30.0
