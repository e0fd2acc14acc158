"""marinex: deterministic twin-thruster USV simulator with vision-guided PID
navigation, a mission state machine, and a teleoperation gateway."""

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
from .dynamics import (
    KGF_TO_N,
    KNOT,
    ThrustCommand,
    VesselParams,
    VesselState,
    clamp_thrust,
    steady_state_speed,
    step,
    thrust_to_wrench,
    wrap_angle,
)
from .engine import Metrics, SimLoop, compute_metrics, disturbance_force, run
from .navigator import AutoPhase, Mode, NavigatorState, navigate, set_mode
from .scenario import (
    DisturbanceSpec,
    Scenario,
    ScenarioError,
    TargetMotion,
    TargetTrack,
    list_presets,
    load_preset,
    load_scenario,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
)
from .sensing import (
    CameraModel,
    Detection,
    DetectorConfig,
    TargetState,
    measure_depth,
    project_target,
    relative_bearing,
    simulate_detection,
)
from .telemetry import TelemetryRecord, read_jsonl, write_csv, write_jsonl

__version__ = "0.1.0"

__all__ = [
    "AutoPhase", "CameraModel", "ControllerConfig", "Detection",
    "DetectorConfig", "DisturbanceSpec", "KGF_TO_N", "KNOT", "Metrics",
    "Mode", "NavigatorState", "PidGains", "PidState", "Scenario",
    "ScenarioError", "SimLoop", "TargetMotion", "TargetState", "TargetTrack",
    "TelemetryRecord", "ThrustCommand", "VesselParams", "VesselState",
    "clamp_thrust", "compute_metrics", "disturbance_force", "governed_cruise",
    "heading_error", "list_presets", "load_preset", "load_scenario",
    "measure_depth", "mix", "navigate", "pid_update", "project_target",
    "read_jsonl", "relative_bearing", "reset_pid", "run", "save_scenario",
    "scenario_from_dict", "scenario_to_dict", "set_mode", "should_stop",
    "simulate_detection", "steady_state_speed", "step", "thrust_to_wrench",
    "wrap_angle", "write_csv", "write_jsonl",
]
