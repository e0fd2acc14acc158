"""Pixel-error visual-servoing law.

The controller's sole input is the horizontal pixel position of the detected
target. A discrete PID maps the pixel error onto a thrust differential which
is mixed symmetrically about a cruise setpoint; a depth threshold decides
mission completion; a proportional governor keeps autonomous surge speed
under a configured cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .dynamics import ThrustCommand, VesselParams, clamp_thrust
from .sensing import Detection

GOVERNOR_BAND = 0.1  # fraction of speed_cap over which cruise thrust ramps to zero


@dataclass(frozen=True)
class PidGains:
    """Gains mapping pixel error to a thrust differential (N per px)."""

    kp: float = 0.15
    ki: float = 0.01
    kd: float = 0.05

    def validate(self) -> None:
        for name in ("kp", "ki", "kd"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0.0:
                raise ValueError(f"gains.{name}: must be finite and >= 0, got {v}")


@dataclass(frozen=True)
class PidState:
    """Value-type PID memory threaded through updates.

    prev_error is None until the first update so the derivative term starts
    suppressed. p_term/i_term/d_term hold the contributions of the most recent
    update, for telemetry.
    """

    integral: float = 0.0            # px*s accumulator
    prev_error: float | None = None  # px
    integral_limit: float = 200.0    # px*s
    output_limit: float = 40.0       # N
    p_term: float = 0.0
    i_term: float = 0.0
    d_term: float = 0.0

    def validate(self) -> None:
        if not self.integral_limit > 0.0 or not self.output_limit > 0.0:
            raise ValueError("pid: integral_limit and output_limit must be > 0")
        if abs(self.integral) > self.integral_limit:
            raise ValueError("pid: integral outside its limit")


def reset_pid(state: PidState) -> PidState:
    """Fresh accumulator and derivative memory, limits preserved."""
    return PidState(integral_limit=state.integral_limit,
                    output_limit=state.output_limit)


@dataclass(frozen=True)
class ControllerConfig:
    desired_px: float = 640.0         # target column the servo regulates to
    cruise_thrust: float = 20.0       # N per thruster while tracking
    stop_depth_threshold: float = 3.0  # m, mission-complete distance
    speed_cap: float = 2.0            # m/s, autonomous surge ceiling

    def validate(self) -> None:
        if not (math.isfinite(self.desired_px) and self.desired_px >= 0.0):
            raise ValueError(f"controller.desired_px: must be >= 0, got {self.desired_px}")
        if not (math.isfinite(self.cruise_thrust) and self.cruise_thrust > 0.0):
            raise ValueError("controller.cruise_thrust: must be > 0")
        if not (math.isfinite(self.stop_depth_threshold) and self.stop_depth_threshold > 0.0):
            raise ValueError("controller.stop_depth_threshold: must be > 0")
        if not (math.isfinite(self.speed_cap) and self.speed_cap > 0.0):
            raise ValueError("controller.speed_cap: must be > 0")


def heading_error(det: Detection, cfg: ControllerConfig) -> float:
    """Signed pixel error; positive means the target sits left of the desired column."""
    return cfg.desired_px - det.center_x


def pid_update(state: PidState, gains: PidGains, error: float,
               dt: float) -> tuple[float, PidState]:
    """One discrete PID step.

    Integral is accumulated first and clamped (anti-windup), the derivative
    acts on the error and is zero on the first update, and the summed output
    is clamped to +/- output_limit.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be > 0, got {dt}")
    il = state.integral_limit
    integral = min(max(state.integral + error * dt, -il), il)
    derivative = 0.0 if state.prev_error is None else (error - state.prev_error) / dt
    p = gains.kp * error
    i = gains.ki * integral
    d = gains.kd * derivative
    ol = state.output_limit
    u = min(max(p + i + d, -ol), ol)
    return u, replace(state, integral=integral, prev_error=error,
                      p_term=p, i_term=i, d_term=d)


def mix(u: float, cfg: ControllerConfig, params: VesselParams) -> ThrustCommand:
    """Split the steering output about the cruise setpoint and clamp.

    Positive u loads the right thruster, yawing the vessel to port (left).
    """
    return clamp_thrust(
        ThrustCommand(left=cfg.cruise_thrust - u / 2.0,
                      right=cfg.cruise_thrust + u / 2.0),
        params,
    )


def should_stop(depth: float, cfg: ControllerConfig) -> bool:
    """Mission complete once measured depth drops strictly below the threshold."""
    return depth < cfg.stop_depth_threshold


def governed_cruise(cfg: ControllerConfig, surge: float) -> float:
    """Proportional speed governor.

    Cruise thrust is scaled down linearly with the surge excess over
    speed_cap, hitting zero at (1 + GOVERNOR_BAND) * speed_cap, so sustained
    speed stays within a few percent of the cap while steering authority is
    untouched.
    """
    if surge <= cfg.speed_cap:
        return cfg.cruise_thrust
    scale = 1.0 - (surge - cfg.speed_cap) / (GOVERNOR_BAND * cfg.speed_cap)
    return cfg.cruise_thrust * max(scale, 0.0)
