"""Synthetic forward camera and detector.

Projects the target vessel into a pinhole image plane (bounding-box level, no
rendering) and corrupts the ideal detection with configurable pixel jitter,
depth noise, and dropouts. Stands in for a real stereo camera plus neural
detector at runtime.

Pixel x grows to the right. Relative bearing is nautical: positive toward
starboard (clockwise from the bow), so a target to starboard lands right of
the image centre column.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import VesselState, wrap_angle

MIN_BOX_PX = 1.0     # apparent extent floor, px
MIN_DEPTH_M = 0.1    # depth measurement floor, m


@dataclass(frozen=True)
class CameraModel:
    image_width: int = 1280
    image_height: int = 720
    hfov: float = math.pi / 2   # rad, horizontal field of view
    max_range: float = 60.0     # m, beyond which nothing is detected

    @property
    def focal_px(self) -> float:
        return (self.image_width / 2.0) / math.tan(self.hfov / 2.0)

    def validate(self) -> None:
        if self.image_width <= 0 or self.image_height <= 0:
            raise ValueError("camera.image_width/image_height: must be > 0")
        if not 0.0 < self.hfov < math.pi:
            raise ValueError(f"camera.hfov: must be in (0, pi), got {self.hfov}")
        if not (math.isfinite(self.max_range) and self.max_range > 0.0):
            raise ValueError(f"camera.max_range: must be finite and > 0, got {self.max_range}")
        if not math.isfinite(self.focal_px):
            raise ValueError("camera: focal length is not finite")


@dataclass(frozen=True)
class TargetState:
    """Pose and apparent dimensions of the tracked vessel."""

    x: float = 0.0
    y: float = 0.0
    beam: float = 0.6                # m, physical width seen by the camera
    height_above_water: float = 0.4  # m, freeboard seen by the camera

    def validate(self) -> None:
        if not (math.isfinite(self.beam) and self.beam > 0.0):
            raise ValueError(f"target.beam: must be finite and > 0, got {self.beam}")
        if not (math.isfinite(self.height_above_water) and self.height_above_water > 0.0):
            raise ValueError("target.height_above_water: must be finite and > 0")
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError("target.x/y: must be finite")


@dataclass(frozen=True)
class Detection:
    """One bounding box, the controller's only sensory input."""

    center_x: float
    center_y: float
    box_w: float
    box_h: float
    confidence: float
    depth: float


@dataclass(frozen=True)
class DetectorConfig:
    pixel_noise_sigma: float = 0.0  # px, applied to centre and extent
    dropout_prob: float = 0.0       # probability of a missed detection
    depth_noise_sigma: float = 0.0  # m
    min_confidence: float = 0.5     # emitted confidences lie in [min_confidence, 1]

    def validate(self) -> None:
        if self.pixel_noise_sigma < 0.0 or self.depth_noise_sigma < 0.0:
            raise ValueError("detector: noise sigmas must be >= 0")
        if not 0.0 <= self.dropout_prob <= 1.0:
            raise ValueError(f"detector.dropout_prob: must be in [0, 1], got {self.dropout_prob}")
        if not 0.0 <= self.min_confidence <= 1.0:
            raise ValueError(f"detector.min_confidence: must be in [0, 1], got {self.min_confidence}")


def relative_bearing(vessel: VesselState, target: TargetState) -> float:
    """Bearing from the vessel's bow to the target, positive to starboard."""
    return wrap_angle(vessel.heading - math.atan2(target.y - vessel.y,
                                                  target.x - vessel.x))


def project_target(cam: CameraModel, vessel: VesselState,
                   target: TargetState) -> Detection | None:
    """Ideal pinhole projection of the target; None when out of frustum/range."""
    dx = target.x - vessel.x
    dy = target.y - vessel.y
    rng = math.hypot(dx, dy)
    if rng == 0.0 or rng > cam.max_range:
        return None
    bearing = wrap_angle(vessel.heading - math.atan2(dy, dx))
    if abs(bearing) >= cam.hfov / 2.0:
        return None
    f = cam.focal_px
    return Detection(
        center_x=cam.image_width / 2.0 + f * math.tan(bearing),
        center_y=cam.image_height / 2.0,
        box_w=max(f * target.beam / rng, MIN_BOX_PX),
        box_h=max(f * target.height_above_water / rng, MIN_BOX_PX),
        confidence=1.0,
        depth=rng,
    )


def simulate_detection(ideal: Detection, cfg: DetectorConfig,
                       rng: np.random.Generator,
                       cam: CameraModel) -> Detection | None:
    """Corrupt an ideal detection; None on dropout.

    Draw order is fixed (dropout, 4 centre/extent jitters, depth, confidence)
    so one seed always yields one detection sequence.
    """
    if rng.random() < cfg.dropout_prob:
        return None
    s = cfg.pixel_noise_sigma
    cx = ideal.center_x + rng.normal(0.0, s)
    cy = ideal.center_y + rng.normal(0.0, s)
    bw = ideal.box_w + rng.normal(0.0, s)
    bh = ideal.box_h + rng.normal(0.0, s)
    depth = ideal.depth + rng.normal(0.0, cfg.depth_noise_sigma)
    conf = rng.uniform(cfg.min_confidence, 1.0)
    return Detection(
        center_x=min(max(cx, 0.0), float(cam.image_width)),
        center_y=min(max(cy, 0.0), float(cam.image_height)),
        box_w=max(bw, MIN_BOX_PX),
        box_h=max(bh, MIN_BOX_PX),
        confidence=conf,
        depth=max(depth, MIN_DEPTH_M),
    )


def measure_depth(vessel: VesselState, target: TargetState,
                  cfg: DetectorConfig, rng: np.random.Generator) -> float:
    """Euclidean range plus Gaussian noise, floored at MIN_DEPTH_M."""
    true_range = math.hypot(target.x - vessel.x, target.y - vessel.y)
    return max(true_range + rng.normal(0.0, cfg.depth_noise_sigma), MIN_DEPTH_M)
