"""Scenario files: complete, seeded descriptions of one simulation run.

A scenario is a JSON document (schema_version 1) grouping vessel parameters,
initial pose, target and its motion, camera/detector models, controller
configuration, disturbance spec, and the run seed. Angles are stored in
degrees in the files and converted to radians on load. Unknown fields are
ignored; violations are reported with their field path.

Named presets ship with the package; the MARINEX_PRESET_DIR environment
variable overrides the preset search path.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from .control import ControllerConfig, PidGains
from .dynamics import VesselParams, VesselState, wrap_angle
from .navigator import Mode
from .sensing import CameraModel, DetectorConfig, TargetState

SCHEMA_VERSION = 1

_PACKAGED_PRESET_DIR = Path(__file__).parent / "presets"
PRESET_DIR_ENV = "MARINEX_PRESET_DIR"


class ScenarioError(ValueError):
    """Scenario schema violation, message prefixed with the field path."""


MOTION_KINDS = ("static", "constant-velocity", "waypoint-loop")


@dataclass(frozen=True)
class TargetMotion:
    kind: str = "static"
    velocity: tuple[float, float] = (0.0, 0.0)       # constant-velocity m/s
    waypoints: tuple[tuple[float, float], ...] = ()  # waypoint-loop corners
    speed: float = 0.0                               # waypoint-loop m/s

    def validate(self) -> None:
        if self.kind not in MOTION_KINDS:
            raise ScenarioError(
                f"target.motion.kind: expected one of {MOTION_KINDS}, got {self.kind!r}")
        if self.kind == "waypoint-loop":
            if len(self.waypoints) < 2:
                raise ScenarioError("target.motion.waypoints: need at least 2 points")
            if not self.speed > 0.0:
                raise ScenarioError("target.motion.speed: must be > 0 for waypoint-loop")


class TargetTrack:
    """Deterministic kinematics driver for the target vessel."""

    def __init__(self, initial: TargetState, motion: TargetMotion):
        self.target = initial
        self.motion = motion
        self._wp_index = 0

    def advance(self, dt: float) -> TargetState:
        m = self.motion
        if m.kind == "static":
            return self.target
        if m.kind == "constant-velocity":
            self.target = replace(self.target,
                                  x=self.target.x + m.velocity[0] * dt,
                                  y=self.target.y + m.velocity[1] * dt)
            return self.target
        # waypoint loop: head for the current corner, switch when reached
        wx, wy = m.waypoints[self._wp_index]
        dx, dy = wx - self.target.x, wy - self.target.y
        dist = math.hypot(dx, dy)
        travel = m.speed * dt
        if dist <= travel:
            self._wp_index = (self._wp_index + 1) % len(m.waypoints)
            self.target = replace(self.target, x=wx, y=wy)
        else:
            self.target = replace(self.target,
                                  x=self.target.x + travel * dx / dist,
                                  y=self.target.y + travel * dy / dist)
        return self.target


@dataclass(frozen=True)
class DisturbanceSpec:
    """Constant wind, sinusoidal wave forcing, and per-tick Gaussian gusts."""

    wind_fx: float = 0.0                   # N, world frame
    wind_fy: float = 0.0
    wave_amplitude: float = 0.0            # N, along wave_direction
    wave_period: float = 4.0               # s
    wave_direction: float = 0.0            # rad, world frame
    wave_yaw_moment_amplitude: float = 0.0  # N*m, in phase with the wave
    gust_sigma: float = 0.0                # N, per-tick Gaussian on both axes

    def validate(self) -> None:
        if self.wave_amplitude < 0.0 or self.wave_yaw_moment_amplitude < 0.0:
            raise ScenarioError("disturbance: wave amplitudes must be >= 0")
        if self.gust_sigma < 0.0:
            raise ScenarioError("disturbance.gust_sigma: must be >= 0")
        if (self.wave_amplitude > 0.0 or self.wave_yaw_moment_amplitude > 0.0) \
                and not self.wave_period > 0.0:
            raise ScenarioError("disturbance.wave_period: must be > 0 when waves are active")


@dataclass(frozen=True)
class Scenario:
    name: str
    seed: int
    duration: float
    dt: float = 0.02
    vessel: VesselParams = VesselParams()
    initial_state: VesselState = VesselState()
    target: TargetState = TargetState(x=30.0, y=0.0)
    target_motion: TargetMotion = TargetMotion()
    camera: CameraModel = CameraModel()
    detector: DetectorConfig = DetectorConfig()
    controller: ControllerConfig = ControllerConfig()
    gains: PidGains = PidGains()
    integral_limit: float = 200.0
    output_limit: float = 40.0
    lost_timeout: float = 2.0
    search_differential: float = 5.0
    disturbance: DisturbanceSpec = DisturbanceSpec()
    initial_mode: Mode = Mode.AUTO

    @property
    def total_ticks(self) -> int:
        """Number of integration steps; the run emits total_ticks + 1 records."""
        return round(self.duration / self.dt)

    def validate(self) -> None:
        if not self.name:
            raise ScenarioError("name: must be a non-empty string")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ScenarioError(f"seed: must be a non-negative integer, got {self.seed!r}")
        if not (math.isfinite(self.duration) and self.duration >= 0.0):
            raise ScenarioError(f"duration: must be finite and >= 0, got {self.duration}")
        if not 0.0 < self.dt <= 0.1:
            raise ScenarioError(f"dt: must be in (0, 0.1] s, got {self.dt}")
        ticks = self.duration / self.dt
        if abs(ticks - round(ticks)) > 1e-6:
            raise ScenarioError(
                f"duration: {self.duration} s is not an integer number of {self.dt} s ticks")
        try:
            self.vessel.validate()
            self.target.validate()
            self.camera.validate()
            self.detector.validate()
            self.controller.validate()
            self.gains.validate()
        except ValueError as exc:
            raise ScenarioError(str(exc)) from exc
        self.target_motion.validate()
        self.disturbance.validate()
        if not self.initial_state.is_finite():
            raise ScenarioError("initial_state: all fields must be finite")
        if self.controller.desired_px > self.camera.image_width:
            raise ScenarioError(
                f"controller.desired_px: {self.controller.desired_px} exceeds image width "
                f"{self.camera.image_width}")
        if self.controller.cruise_thrust > self.vessel.max_thrust_forward:
            raise ScenarioError(
                f"controller.cruise_thrust: {self.controller.cruise_thrust} exceeds "
                f"max_thrust_forward {self.vessel.max_thrust_forward}")
        if not self.integral_limit > 0.0 or not self.output_limit > 0.0:
            raise ScenarioError("controller: integral_limit and output_limit must be > 0")
        if not self.lost_timeout > 0.0:
            raise ScenarioError(f"navigator.lost_timeout: must be > 0, got {self.lost_timeout}")
        if self.search_differential < 0.0:
            raise ScenarioError("navigator.search_differential: must be >= 0")


# --- JSON (de)serialization --------------------------------------------------

def _num(d: dict, key: str, path: str, default=None) -> float:
    v = d.get(key, default)
    if v is None:
        raise ScenarioError(f"{path}.{key}: missing required field")
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(f"{path}.{key}: expected a number, got {v!r}")
    return float(v)


def _section(d: dict, key: str) -> dict:
    v = d.get(key, {})
    if not isinstance(v, dict):
        raise ScenarioError(f"{key}: expected an object, got {v!r}")
    return v


def _motion_from_dict(d: dict) -> TargetMotion:
    kind = d.get("kind", "static")
    velocity = d.get("velocity", [0.0, 0.0])
    waypoints = d.get("waypoints", [])
    try:
        vel = (float(velocity[0]), float(velocity[1]))
        wps = tuple((float(p[0]), float(p[1])) for p in waypoints)
    except (TypeError, ValueError, IndexError) as exc:
        raise ScenarioError(f"target.motion: malformed velocity or waypoints ({exc})") from exc
    return TargetMotion(kind=kind, velocity=vel, waypoints=wps,
                        speed=_num(d, "speed", "target.motion", 0.0))


def scenario_from_dict(doc: dict) -> Scenario:
    """Parse and validate a scenario document. Unknown fields are ignored."""
    if not isinstance(doc, dict):
        raise ScenarioError(f"scenario: expected an object, got {type(doc).__name__}")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"schema_version: unsupported version {version!r}")
    name = doc.get("name")
    if not isinstance(name, str) or not name:
        raise ScenarioError("name: must be a non-empty string")
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ScenarioError(f"seed: must be an integer, got {seed!r}")

    v = _section(doc, "vessel")
    vessel = VesselParams(
        mass=_num(v, "mass", "vessel", 25.0),
        yaw_inertia=_num(v, "yaw_inertia", "vessel", 3.0),
        hull_separation=_num(v, "hull_separation", "vessel", 0.6),
        drag_surge=_num(v, "drag_surge", "vessel", 23.39),
        drag_sway=_num(v, "drag_sway", "vessel", 60.0),
        drag_yaw=_num(v, "drag_yaw", "vessel", 8.0),
        max_thrust_forward=_num(v, "max_thrust_forward", "vessel", 49.52),
        max_thrust_reverse=_num(v, "max_thrust_reverse", "vessel", 40.0),
        payload_mass=_num(v, "payload_mass", "vessel", 0.0),
    )
    s = _section(doc, "initial_state")
    initial = VesselState(
        x=_num(s, "x", "initial_state", 0.0),
        y=_num(s, "y", "initial_state", 0.0),
        heading=wrap_angle(math.radians(_num(s, "heading_deg", "initial_state", 0.0))),
        surge=_num(s, "surge", "initial_state", 0.0),
        sway=_num(s, "sway", "initial_state", 0.0),
        yaw_rate=_num(s, "yaw_rate", "initial_state", 0.0),
    )
    t = _section(doc, "target")
    target = TargetState(
        x=_num(t, "x", "target"),
        y=_num(t, "y", "target"),
        beam=_num(t, "beam", "target", 0.6),
        height_above_water=_num(t, "height_above_water", "target", 0.4),
    )
    motion = _motion_from_dict(_section(t, "motion"))
    c = _section(doc, "camera")
    camera = CameraModel(
        image_width=int(_num(c, "image_width", "camera", 1280)),
        image_height=int(_num(c, "image_height", "camera", 720)),
        hfov=math.radians(_num(c, "hfov_deg", "camera", 90.0)),
        max_range=_num(c, "max_range", "camera", 60.0),
    )
    det = _section(doc, "detector")
    detector = DetectorConfig(
        pixel_noise_sigma=_num(det, "pixel_noise_sigma", "detector", 0.0),
        dropout_prob=_num(det, "dropout_prob", "detector", 0.0),
        depth_noise_sigma=_num(det, "depth_noise_sigma", "detector", 0.0),
        min_confidence=_num(det, "min_confidence", "detector", 0.5),
    )
    ctl = _section(doc, "controller")
    controller = ControllerConfig(
        desired_px=_num(ctl, "desired_px", "controller", camera.image_width / 2.0),
        cruise_thrust=_num(ctl, "cruise_thrust", "controller", 20.0),
        stop_depth_threshold=_num(ctl, "stop_depth_threshold", "controller", 3.0),
        speed_cap=_num(ctl, "speed_cap", "controller", 2.0),
    )
    g = _section(ctl, "gains")
    gains = PidGains(
        kp=_num(g, "kp", "controller.gains", 0.15),
        ki=_num(g, "ki", "controller.gains", 0.01),
        kd=_num(g, "kd", "controller.gains", 0.05),
    )
    nav = _section(doc, "navigator")
    d = _section(doc, "disturbance")
    disturbance = DisturbanceSpec(
        wind_fx=_num(d, "wind_fx", "disturbance", 0.0),
        wind_fy=_num(d, "wind_fy", "disturbance", 0.0),
        wave_amplitude=_num(d, "wave_amplitude", "disturbance", 0.0),
        wave_period=_num(d, "wave_period", "disturbance", 4.0),
        wave_direction=math.radians(_num(d, "wave_direction_deg", "disturbance", 0.0)),
        wave_yaw_moment_amplitude=_num(d, "wave_yaw_moment_amplitude", "disturbance", 0.0),
        gust_sigma=_num(d, "gust_sigma", "disturbance", 0.0),
    )
    mode_name = doc.get("initial_mode", "AUTO")
    try:
        mode = Mode(mode_name)
    except ValueError:
        raise ScenarioError(f"initial_mode: expected TELEOP or AUTO, got {mode_name!r}") from None

    scenario = Scenario(
        name=name,
        seed=seed,
        duration=_num(doc, "duration", "scenario"),
        dt=_num(doc, "dt", "scenario", 0.02),
        vessel=vessel,
        initial_state=initial,
        target=target,
        target_motion=motion,
        camera=camera,
        detector=detector,
        controller=controller,
        gains=gains,
        integral_limit=_num(ctl, "integral_limit", "controller", 200.0),
        output_limit=_num(ctl, "output_limit", "controller", 40.0),
        lost_timeout=_num(nav, "lost_timeout", "navigator", 2.0),
        search_differential=_num(nav, "search_differential", "navigator", 5.0),
        disturbance=disturbance,
        initial_mode=mode,
    )
    scenario.validate()
    return scenario


def scenario_to_dict(sc: Scenario) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "name": sc.name,
        "seed": sc.seed,
        "duration": sc.duration,
        "dt": sc.dt,
        "vessel": asdict(sc.vessel),
        "initial_state": {
            "x": sc.initial_state.x,
            "y": sc.initial_state.y,
            "heading_deg": math.degrees(sc.initial_state.heading),
            "surge": sc.initial_state.surge,
            "sway": sc.initial_state.sway,
            "yaw_rate": sc.initial_state.yaw_rate,
        },
        "target": {
            "x": sc.target.x,
            "y": sc.target.y,
            "beam": sc.target.beam,
            "height_above_water": sc.target.height_above_water,
            "motion": {
                "kind": sc.target_motion.kind,
                "velocity": list(sc.target_motion.velocity),
                "waypoints": [list(p) for p in sc.target_motion.waypoints],
                "speed": sc.target_motion.speed,
            },
        },
        "camera": {
            "image_width": sc.camera.image_width,
            "image_height": sc.camera.image_height,
            "hfov_deg": math.degrees(sc.camera.hfov),
            "max_range": sc.camera.max_range,
        },
        "detector": asdict(sc.detector),
        "controller": {
            "desired_px": sc.controller.desired_px,
            "cruise_thrust": sc.controller.cruise_thrust,
            "stop_depth_threshold": sc.controller.stop_depth_threshold,
            "speed_cap": sc.controller.speed_cap,
            "gains": asdict(sc.gains),
            "integral_limit": sc.integral_limit,
            "output_limit": sc.output_limit,
        },
        "navigator": {
            "lost_timeout": sc.lost_timeout,
            "search_differential": sc.search_differential,
        },
        "disturbance": {
            "wind_fx": sc.disturbance.wind_fx,
            "wind_fy": sc.disturbance.wind_fy,
            "wave_amplitude": sc.disturbance.wave_amplitude,
            "wave_period": sc.disturbance.wave_period,
            "wave_direction_deg": math.degrees(sc.disturbance.wave_direction),
            "wave_yaw_moment_amplitude": sc.disturbance.wave_yaw_moment_amplitude,
            "gust_sigma": sc.disturbance.gust_sigma,
        },
        "initial_mode": sc.initial_mode.value,
    }


def load_scenario(path: str | Path) -> Scenario:
    p = Path(path)
    try:
        doc = json.loads(p.read_text())
    except FileNotFoundError:
        raise ScenarioError(f"scenario file not found: {p}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{p}: invalid JSON ({exc})") from exc
    return scenario_from_dict(doc)


def save_scenario(sc: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(sc), indent=2) + "\n")


def preset_dir() -> Path:
    override = os.environ.get(PRESET_DIR_ENV)
    return Path(override) if override else _PACKAGED_PRESET_DIR


def list_presets() -> list[str]:
    d = preset_dir()
    if not d.is_dir():
        return []
    return sorted(p.stem for p in d.glob("*.json"))


def load_preset(name: str) -> Scenario:
    path = preset_dir() / f"{name}.json"
    if not path.is_file():
        known = ", ".join(list_presets()) or "<none>"
        raise ScenarioError(f"unknown preset {name!r} (available: {known})")
    return load_scenario(path)
