"""Mission state machine tying sensing to control.

Two modes: TELEOP (operator thrust passed straight through) and AUTO. In AUTO
the mission walks SEARCH -> TRACK -> HOLD: spin-scan until a detection,
visual-servo toward the target, and stop for good once close enough. HOLD is
absorbing until an external reset or a mode cycle through TELEOP.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

from .control import (
    ControllerConfig,
    PidGains,
    PidState,
    governed_cruise,
    heading_error,
    mix,
    pid_update,
    reset_pid,
    should_stop,
)
from .dynamics import ThrustCommand, VesselParams, clamp_thrust
from .sensing import Detection

ZERO_THRUST = ThrustCommand(0.0, 0.0)


class Mode(str, Enum):
    TELEOP = "TELEOP"
    AUTO = "AUTO"


class AutoPhase(str, Enum):
    SEARCH = "SEARCH"
    TRACK = "TRACK"
    HOLD = "HOLD"


@dataclass(frozen=True)
class NavigatorState:
    mode: Mode = Mode.AUTO
    phase: AutoPhase = AutoPhase.SEARCH
    pid: PidState = PidState()
    ticks_since_detection: int = 0
    lost_timeout: float = 2.0         # s without a detection before SEARCH
    search_differential: float = 5.0  # N, counter-rotating spin-scan pair
    min_confidence: float = 0.0       # detections below this are treated as absent


def set_mode(nav: NavigatorState, mode: Mode) -> NavigatorState:
    """Switch modes. Entering AUTO restarts the mission from SEARCH with a
    fresh PID; entering TELEOP only freezes the autonomous machinery."""
    if mode == nav.mode:
        return nav
    if mode == Mode.AUTO:
        return replace(nav, mode=Mode.AUTO, phase=AutoPhase.SEARCH,
                       pid=reset_pid(nav.pid), ticks_since_detection=0)
    return replace(nav, mode=Mode.TELEOP)


def navigate(
    nav: NavigatorState,
    det: Detection | None,
    teleop_cmd: ThrustCommand | None,
    dt: float,
    controller: ControllerConfig,
    gains: PidGains,
    params: VesselParams,
    surge: float = 0.0,
) -> tuple[ThrustCommand, NavigatorState]:
    """One control tick: returns the thrust to apply and the successor state.

    `surge` is the measured forward speed, consumed only by the speed
    governor. Teleop commands are ignored in AUTO and detections never steer
    in TELEOP.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be > 0, got {dt}")

    if nav.mode == Mode.TELEOP:
        cmd = clamp_thrust(teleop_cmd if teleop_cmd is not None else ZERO_THRUST, params)
        return cmd, nav

    if nav.phase == AutoPhase.HOLD:
        return ZERO_THRUST, nav

    accepted = det is not None and det.confidence >= nav.min_confidence
    phase = nav.phase
    pid = nav.pid
    ticks = nav.ticks_since_detection

    if phase == AutoPhase.SEARCH:
        if not accepted:
            cmd = clamp_thrust(
                ThrustCommand(-nav.search_differential, nav.search_differential), params)
            return cmd, replace(nav, ticks_since_detection=ticks + 1)
        phase = AutoPhase.TRACK
        pid = reset_pid(pid)

    # TRACK
    if accepted:
        assert det is not None
        if should_stop(det.depth, controller):
            return ZERO_THRUST, replace(nav, phase=AutoPhase.HOLD, pid=pid,
                                        ticks_since_detection=0)
        error = heading_error(det, controller)
        u, pid = pid_update(pid, gains, error, dt)
        cfg = replace(controller, cruise_thrust=governed_cruise(controller, surge))
        cmd = mix(u, cfg, params)
        return cmd, replace(nav, phase=AutoPhase.TRACK, pid=pid,
                            ticks_since_detection=0)

    ticks += 1
    if ticks * dt > nav.lost_timeout:
        cmd = clamp_thrust(
            ThrustCommand(-nav.search_differential, nav.search_differential), params)
        return cmd, replace(nav, phase=AutoPhase.SEARCH, pid=pid,
                            ticks_since_detection=ticks)
    # detection gap within the timeout: hold course at governed cruise
    cfg = replace(controller, cruise_thrust=governed_cruise(controller, surge))
    cmd = mix(0.0, cfg, params)
    return cmd, replace(nav, pid=pid, ticks_since_detection=ticks)
