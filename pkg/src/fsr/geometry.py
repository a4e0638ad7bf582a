"""Camera and scene geometry for the defocus model.

Slice indices are 0-based throughout the package. A label l in a k-slice
stack maps to a metric depth by linear interpolation between the nearest
and farthest focus positions.
"""

from __future__ import annotations

from dataclasses import dataclass

DEFAULT_APERTURE_MM = 5.0
DEFAULT_FOCAL_LENGTH_MM = 30.0
DEFAULT_DEPTH_NEAR_MM = 300.0
DEFAULT_DEPTH_FAR_MM = 5000.0
DEFAULT_PIXEL_PITCH_MM = 0.005


@dataclass(frozen=True)
class CameraGeometry:
    """Lens and sensor constants.

    @param aperture_mm: aperture diameter A in millimeters.
    @param focal_length_mm: focal length f in millimeters.
    @param depth_near_mm: metric depth of the nearest focus position.
    @param depth_far_mm: metric depth of the farthest focus position.
    @param pixel_pitch_mm: sensor pixel pitch in millimeters per pixel.
    """

    aperture_mm: float = DEFAULT_APERTURE_MM
    focal_length_mm: float = DEFAULT_FOCAL_LENGTH_MM
    depth_near_mm: float = DEFAULT_DEPTH_NEAR_MM
    depth_far_mm: float = DEFAULT_DEPTH_FAR_MM
    pixel_pitch_mm: float = DEFAULT_PIXEL_PITCH_MM

    def __post_init__(self):
        if self.aperture_mm <= 0:
            raise ValueError("aperture_mm must be positive")
        if self.focal_length_mm <= 0:
            raise ValueError("focal_length_mm must be positive")
        if not 0 < self.depth_near_mm < self.depth_far_mm:
            raise ValueError("need 0 < depth_near_mm < depth_far_mm")
        if self.pixel_pitch_mm <= 0:
            raise ValueError("pixel_pitch_mm must be positive")

    def label_depth(self, label: float, k: int) -> float:
        """Metric depth (mm) of focus label `label` in a k-slice stack."""
        if k < 2:
            raise ValueError("need k >= 2 slices")
        t = label / (k - 1)
        return self.depth_near_mm + (self.depth_far_mm - self.depth_near_mm) * t

    def aperture_radius_px(self) -> float:
        """Aperture radius A/2 expressed in pixel units."""
        return 0.5 * self.aperture_mm / self.pixel_pitch_mm

    def to_dict(self) -> dict:
        return {
            "A_mm": self.aperture_mm,
            "f_mm": self.focal_length_mm,
            "depth_near_mm": self.depth_near_mm,
            "depth_far_mm": self.depth_far_mm,
            "pixel_pitch_mm": self.pixel_pitch_mm,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CameraGeometry":
        return cls(
            aperture_mm=float(d.get("A_mm", DEFAULT_APERTURE_MM)),
            focal_length_mm=float(d.get("f_mm", DEFAULT_FOCAL_LENGTH_MM)),
            depth_near_mm=float(d.get("depth_near_mm", DEFAULT_DEPTH_NEAR_MM)),
            depth_far_mm=float(d.get("depth_far_mm", DEFAULT_DEPTH_FAR_MM)),
            pixel_pitch_mm=float(d.get("pixel_pitch_mm", DEFAULT_PIXEL_PITCH_MM)),
        )
