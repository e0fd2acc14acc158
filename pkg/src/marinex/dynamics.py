"""Planar 3-DOF (surge, sway, yaw) rigid-body model of a twin-thruster catamaran.

Body frame: x forward (surge), y to port (sway), yaw positive counter-clockwise.
World frame: x east, y north, heading measured CCW from east, wrapped to (-pi, pi].

Forces are quadratic-drag damped and the only actuation is the left/right
thruster pair, so the model is fully described by eight scalar parameters.
Integration is fixed-step RK4; identical inputs give bitwise identical output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

KGF_TO_N = 9.80665          # 1 kgf in newtons
KNOT = 0.5144444444444445   # 1 knot in m/s


@dataclass(frozen=True)
class VesselParams:
    """Physical parameters of the catamaran.

    Units: mass kg, yaw_inertia kg*m^2, hull_separation m, quadratic drag
    coefficients N*s^2/m^2 (N*m*s^2/rad^2 for yaw), thrust limits N.
    """

    mass: float = 25.0
    yaw_inertia: float = 3.0
    hull_separation: float = 0.6       # lateral distance between thruster lines
    drag_surge: float = 23.39          # calibrated: full thrust tops out at 4 kn
    drag_sway: float = 60.0
    drag_yaw: float = 8.0
    max_thrust_forward: float = 49.52  # 5.05 kgf per thruster
    max_thrust_reverse: float = 40.0
    payload_mass: float = 0.0          # optional cargo, simply added to mass

    @property
    def total_mass(self) -> float:
        return self.mass + self.payload_mass

    def validate(self) -> None:
        """Raise ValueError if any parameter is outside its admissible range."""
        for name in ("mass", "yaw_inertia", "hull_separation", "drag_surge",
                     "drag_sway", "drag_yaw", "max_thrust_forward",
                     "max_thrust_reverse"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0.0:
                raise ValueError(f"vessel.{name}: must be finite and > 0, got {v}")
        if not math.isfinite(self.payload_mass) or self.payload_mass < 0.0:
            raise ValueError(
                f"vessel.payload_mass: must be finite and >= 0, got {self.payload_mass}")
        if not math.isfinite(steady_state_speed(self)):
            raise ValueError("vessel: steady-state speed is not finite")


@dataclass(frozen=True)
class VesselState:
    """Planar pose plus body-frame velocities."""

    x: float = 0.0         # m, world east
    y: float = 0.0         # m, world north
    heading: float = 0.0   # rad, CCW from east, in (-pi, pi]
    surge: float = 0.0     # m/s, body forward
    sway: float = 0.0      # m/s, body lateral (port positive)
    yaw_rate: float = 0.0  # rad/s

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in
                   (self.x, self.y, self.heading, self.surge, self.sway, self.yaw_rate))


@dataclass(frozen=True)
class ThrustCommand:
    """Left/right thruster forces in newtons, the sole actuation channel."""

    left: float = 0.0
    right: float = 0.0


def wrap_angle(angle: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    a = math.remainder(angle, math.tau)
    return math.pi if a <= -math.pi else a


def clamp_thrust(cmd: ThrustCommand, params: VesselParams) -> ThrustCommand:
    """Clamp each thruster into [-max_thrust_reverse, +max_thrust_forward]."""
    lo, hi = -params.max_thrust_reverse, params.max_thrust_forward
    return ThrustCommand(
        left=min(max(cmd.left, lo), hi),
        right=min(max(cmd.right, lo), hi),
    )


def thrust_to_wrench(cmd: ThrustCommand, params: VesselParams) -> tuple[float, float]:
    """Differential-drive geometry: total surge force and yaw moment.

    Returns (surge_force N, yaw_moment N*m). Positive moment is CCW, produced
    by the right thruster pushing harder than the left.
    """
    surge_force = cmd.left + cmd.right
    yaw_moment = (cmd.right - cmd.left) * params.hull_separation / 2.0
    return surge_force, yaw_moment


def steady_state_speed(params: VesselParams) -> float:
    """Analytic terminal surge speed under full symmetric forward thrust.

    At equilibrium 2*max_thrust_forward = drag_surge * v^2.
    """
    if not params.drag_surge > 0.0:
        raise ValueError(f"drag_surge must be > 0, got {params.drag_surge}")
    return math.sqrt(2.0 * params.max_thrust_forward / params.drag_surge)


def _derivatives(
    y: tuple[float, float, float, float, float, float],
    surge_force: float,
    yaw_moment: float,
    fx: float,
    fy: float,
    mz: float,
    params: VesselParams,
) -> tuple[float, float, float, float, float, float]:
    # y = (x, y, heading, surge, sway, yaw_rate); (fx, fy) world frame
    _, _, psi, u, v, r = y
    c, s = math.cos(psi), math.sin(psi)
    fbx = c * fx + s * fy    # world -> body
    fby = -s * fx + c * fy
    m = params.total_mass
    du = (surge_force - params.drag_surge * u * abs(u) + fbx) / m
    dv = (-params.drag_sway * v * abs(v) + fby) / m
    dr = (yaw_moment - params.drag_yaw * r * abs(r) + mz) / params.yaw_inertia
    dx = c * u - s * v       # body -> world
    dy = s * u + c * v
    return dx, dy, r, du, dv, dr


def step(
    state: VesselState,
    cmd: ThrustCommand,
    disturbance: tuple[float, float, float],
    dt: float,
    params: VesselParams,
) -> VesselState:
    """Advance the vessel one RK4 step of length dt.

    `cmd` is assumed already clamped. `disturbance` is (force_x, force_y,
    moment) with the forces in the world frame; they are rotated into the body
    frame at each integrator stage.
    """
    if not (0.0 < dt <= 0.1):
        raise ValueError(f"dt must be in (0, 0.1] s, got {dt}")
    fx, fy, mz = disturbance
    if not state.is_finite():
        raise ValueError("step: non-finite vessel state")
    if not all(math.isfinite(v) for v in (cmd.left, cmd.right, fx, fy, mz)):
        raise ValueError("step: non-finite thrust or disturbance")

    surge_force, yaw_moment = thrust_to_wrench(cmd, params)
    y0 = (state.x, state.y, state.heading, state.surge, state.sway, state.yaw_rate)

    k1 = _derivatives(y0, surge_force, yaw_moment, fx, fy, mz, params)
    y1 = tuple(a + 0.5 * dt * b for a, b in zip(y0, k1))
    k2 = _derivatives(y1, surge_force, yaw_moment, fx, fy, mz, params)
    y2 = tuple(a + 0.5 * dt * b for a, b in zip(y0, k2))
    k3 = _derivatives(y2, surge_force, yaw_moment, fx, fy, mz, params)
    y3 = tuple(a + dt * b for a, b in zip(y0, k3))
    k4 = _derivatives(y3, surge_force, yaw_moment, fx, fy, mz, params)

    out = [a + dt / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
           for a, b1, b2, b3, b4 in zip(y0, k1, k2, k3, k4)]
    return VesselState(
        x=out[0], y=out[1], heading=wrap_angle(out[2]),
        surge=out[3], sway=out[4], yaw_rate=out[5],
    )
