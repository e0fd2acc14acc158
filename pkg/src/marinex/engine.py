"""Deterministic closed-loop world.

SimLoop advances one scenario tick at a time (sense -> navigate -> record ->
integrate), which lets the headless runner and the live gateway share the
exact same stepping code: a gateway session with no clients and no commands
reproduces `run` byte for byte.

A run over duration D at step dt emits round(D/dt) + 1 records; record k is a
coherent snapshot of t = k*dt. The single seeded RNG is consumed in a fixed
order per tick (detection first, then gusts).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .control import PidGains, heading_error
from .dynamics import ThrustCommand, VesselState, step
from .navigator import AutoPhase, Mode, NavigatorState, navigate, set_mode
from .navigator import PidState
from .scenario import DisturbanceSpec, Scenario, TargetTrack
from .sensing import project_target, simulate_detection
from .telemetry import TelemetryRecord

SETTLE_BAND_PX = 10.0   # |pixel error| band defining "settled"
SETTLE_HOLD_S = 3.0     # band dwell time required to count as settled


def disturbance_force(spec: DisturbanceSpec, t: float,
                      rng: np.random.Generator) -> tuple[float, float, float]:
    """World-frame disturbance (fx, fy, yaw moment) at time t.

    Constant wind + sinusoidal wave force along wave_direction + an in-phase
    sinusoidal yaw moment + per-tick Gaussian gusts on both force axes. Two
    gust draws happen every call so RNG consumption is input-independent.
    """
    fx = spec.wind_fx
    fy = spec.wind_fy
    mz = 0.0
    if spec.wave_amplitude > 0.0 or spec.wave_yaw_moment_amplitude > 0.0:
        s = math.sin(math.tau * t / spec.wave_period)
        fx += spec.wave_amplitude * s * math.cos(spec.wave_direction)
        fy += spec.wave_amplitude * s * math.sin(spec.wave_direction)
        mz += spec.wave_yaw_moment_amplitude * s
    fx += rng.normal(0.0, spec.gust_sigma)
    fy += rng.normal(0.0, spec.gust_sigma)
    return fx, fy, mz


@dataclass(frozen=True)
class Metrics:
    """Scenario-level reductions of one telemetry sequence.

    Settling-sensitive fields are computed over the tracking portion of the
    run (records before HOLD entry); time_to_intercept is populated only when
    the run succeeded.
    """

    success: bool
    time_to_intercept: float | None
    settling_time: float | None
    rms_pixel_error_after_settling: float | None
    max_overshoot: float | None
    path_length: float

    def to_dict(self) -> dict:
        return {
            "success": self.success,
            "time_to_intercept": self.time_to_intercept,
            "settling_time": self.settling_time,
            "rms_pixel_error_after_settling": self.rms_pixel_error_after_settling,
            "max_overshoot": self.max_overshoot,
            "path_length": self.path_length,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Metrics":
        return cls(
            success=d["success"],
            time_to_intercept=d["time_to_intercept"],
            settling_time=d["settling_time"],
            rms_pixel_error_after_settling=d["rms_pixel_error_after_settling"],
            max_overshoot=d["max_overshoot"],
            path_length=d["path_length"],
        )


class SimLoop:
    """Incremental scenario world; one `advance()` call per tick."""

    def __init__(self, scenario: Scenario):
        scenario.validate()
        self.scenario = scenario
        self.state = scenario.initial_state
        self.track = TargetTrack(scenario.target, scenario.target_motion)
        self.target = scenario.target
        self.rng = np.random.default_rng(scenario.seed)
        self.nav = NavigatorState(
            mode=scenario.initial_mode,
            phase=AutoPhase.SEARCH,
            pid=PidState(integral_limit=scenario.integral_limit,
                         output_limit=scenario.output_limit),
            ticks_since_detection=0,
            lost_timeout=scenario.lost_timeout,
            search_differential=scenario.search_differential,
            min_confidence=scenario.detector.min_confidence,
        )
        self.controller = scenario.controller
        self.gains = scenario.gains
        self.teleop_cmd: ThrustCommand | None = None
        self.total_ticks = scenario.total_ticks
        self.tick = 0

    @property
    def finished(self) -> bool:
        return self.tick > self.total_ticks

    # runtime mutation, applied by the caller at tick boundaries
    def set_teleop(self, cmd: ThrustCommand) -> None:
        self.teleop_cmd = cmd

    def switch_mode(self, mode: Mode) -> None:
        self.nav = set_mode(self.nav, mode)

    def set_gains(self, gains: PidGains) -> None:
        gains.validate()
        self.gains = gains

    def advance(self) -> TelemetryRecord:
        """Process one tick: sense, decide, snapshot, then integrate."""
        if self.finished:
            raise RuntimeError("simulation already finished")
        sc = self.scenario
        k = self.tick
        t = k * sc.dt
        if k > 0:
            self.target = self.track.advance(sc.dt)

        ideal = project_target(sc.camera, self.state, self.target)
        det = None
        if ideal is not None:
            det = simulate_detection(ideal, sc.detector, self.rng, sc.camera)
        dist = disturbance_force(sc.disturbance, t, self.rng)

        cmd, self.nav = navigate(self.nav, det, self.teleop_cmd, sc.dt,
                                 self.controller, self.gains, sc.vessel,
                                 surge=self.state.surge)
        pid = self.nav.pid
        rec = TelemetryRecord(
            tick=k, t=t,
            x=self.state.x, y=self.state.y, heading=self.state.heading,
            surge=self.state.surge, sway=self.state.sway, yaw_rate=self.state.yaw_rate,
            left=cmd.left, right=cmd.right,
            mode=self.nav.mode.value, phase=self.nav.phase.value,
            detection=det,
            pixel_error=heading_error(det, self.controller) if det is not None else None,
            pid_p=pid.p_term, pid_i=pid.i_term, pid_d=pid.d_term,
            depth=det.depth if det is not None else None,
            dist_fx=dist[0], dist_fy=dist[1], dist_mz=dist[2],
            target_x=self.target.x, target_y=self.target.y,
        )
        if k < self.total_ticks:
            self.state = step(self.state, cmd, dist, sc.dt, sc.vessel)
        self.tick += 1
        return rec


def run(scenario: Scenario) -> tuple[list[TelemetryRecord], Metrics]:
    """Drive a scenario to completion; fully deterministic under its seed."""
    loop = SimLoop(scenario)
    records = [loop.advance() for _ in range(loop.total_ticks + 1)]
    return records, compute_metrics(records)


def compute_metrics(records: list[TelemetryRecord]) -> Metrics:
    if not records:
        raise ValueError("cannot compute metrics of empty telemetry")

    hold_index = next((i for i, r in enumerate(records)
                       if r.phase == AutoPhase.HOLD.value), None)
    success = hold_index is not None
    time_to_intercept = records[hold_index].t if success else None

    tracking = records[:hold_index] if success else records
    errs = [(r.t, r.pixel_error) for r in tracking if r.pixel_error is not None]

    settling_time = None
    rms_after = None
    if errs:
        # longest suffix of the tracking errors staying inside the band
        first_ok = len(errs)
        for i in range(len(errs) - 1, -1, -1):
            if abs(errs[i][1]) >= SETTLE_BAND_PX:
                break
            first_ok = i
        if first_ok < len(errs) and errs[-1][0] - errs[first_ok][0] >= SETTLE_HOLD_S:
            settling_time = errs[first_ok][0]
            tail = [e for t, e in errs if t >= settling_time]
            rms_after = math.sqrt(sum(e * e for e in tail) / len(tail))

    max_overshoot = None
    if errs:
        sign = 1.0 if errs[0][1] >= 0.0 else -1.0
        max_overshoot = max(0.0, max(-sign * e for _, e in errs))

    path = 0.0
    for a, b in zip(records, records[1:]):
        path += math.hypot(b.x - a.x, b.y - a.y)

    return Metrics(
        success=success,
        time_to_intercept=time_to_intercept,
        settling_time=settling_time,
        rms_pixel_error_after_settling=rms_after,
        max_overshoot=max_overshoot,
        path_length=path,
    )
