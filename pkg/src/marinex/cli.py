"""Headless command line: run scenarios, sweep parameters, replay telemetry,
evaluate loss fixtures, and launch the gateway.

Exit codes: 0 executed; 1 mission failure (--require-success) or metrics
mismatch on replay; 2 bad input (missing files, schema violations, unknown
presets/axes).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import yolo_loss
from .engine import Metrics, compute_metrics, run
from .scenario import (
    Scenario,
    ScenarioError,
    list_presets,
    load_preset,
    load_scenario,
    scenario_from_dict,
    scenario_to_dict,
)
from .telemetry import read_jsonl, records_to_jsonl, write_csv

REPORT_SCHEMA_VERSION = 1


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 2


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _load(args: argparse.Namespace) -> Scenario:
    if args.scenario:
        scenario = load_scenario(args.scenario)
    elif args.preset:
        scenario = load_preset(args.preset)
    else:
        raise ScenarioError("one of --scenario or --preset is required")
    if args.seed is not None:
        scenario = scenario_from_dict({**scenario_to_dict(scenario), "seed": args.seed})
    return scenario


def _write_plots(records, out: Path) -> list[str]:
    err_path = out / "pixel_error.csv"
    traj_path = out / "trajectory.csv"
    lines = ["t,pixel_error"]
    lines += [f"{r.t!r},{r.pixel_error!r}" for r in records if r.pixel_error is not None]
    _atomic_write(err_path, "\n".join(lines) + "\n")
    lines = ["t,x,y,target_x,target_y"]
    lines += [f"{r.t!r},{r.x!r},{r.y!r},{r.target_x!r},{r.target_y!r}" for r in records]
    _atomic_write(traj_path, "\n".join(lines) + "\n")
    written = [str(err_path), str(traj_path)]
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return written
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.5))
    ts = [r.t for r in records if r.pixel_error is not None]
    es = [r.pixel_error for r in records if r.pixel_error is not None]
    ax1.plot(ts, es, lw=0.8)
    ax1.set_xlabel("t [s]")
    ax1.set_ylabel("pixel error [px]")
    ax1.set_title("heading pixel error")
    ax1.grid(alpha=0.3)
    ax2.plot([r.x for r in records], [r.y for r in records], lw=1.0, label="vessel")
    ax2.plot(records[-1].target_x, records[-1].target_y, "r*", ms=12, label="target")
    ax2.set_xlabel("x [m]")
    ax2.set_ylabel("y [m]")
    ax2.set_title("trajectory")
    ax2.set_aspect("equal", "datalim")
    ax2.legend()
    ax2.grid(alpha=0.3)
    svg = out / "overview.svg"
    fig.tight_layout()
    fig.savefig(svg)
    plt.close(fig)
    written.append(str(svg))
    return written


def cmd_run(args: argparse.Namespace) -> int:
    try:
        scenario = _load(args)
    except ScenarioError as exc:
        return _fail(str(exc))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    records, metrics = run(scenario)
    jsonl_path = out / "telemetry.jsonl"
    csv_path = out / "telemetry.csv"
    metrics_path = out / "metrics.json"
    _atomic_write(jsonl_path, records_to_jsonl(records))
    write_csv(records, csv_path)
    report = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "scenario": scenario.name,
        "seed": scenario.seed,
        "metrics": metrics.to_dict(),
        "files": {"jsonl": str(jsonl_path), "csv": str(csv_path)},
    }
    _atomic_write(metrics_path, json.dumps(report, indent=2) + "\n")
    if args.plot:
        report["files"]["plots"] = _write_plots(records, out)
    print(f"scenario {scenario.name} seed {scenario.seed}: "
          f"{'SUCCESS' if metrics.success else 'NO INTERCEPT'} "
          f"({len(records)} ticks, path {metrics.path_length:.1f} m)")
    for key, value in metrics.to_dict().items():
        print(f"  {key}: {value}")
    print(f"  outputs: {out}")
    if args.require_success and not metrics.success:
        return 1
    return 0


def _set_by_path(doc: dict, path: str, value) -> None:
    parts = path.split(".")
    node = doc
    for p in parts[:-1]:
        if not isinstance(node, dict) or p not in node:
            raise ScenarioError(f"unknown scenario field path {path!r}")
        node = node[p]
    if not isinstance(node, dict) or parts[-1] not in node:
        raise ScenarioError(f"unknown scenario field path {path!r}")
    node[parts[-1]] = value


def _sweep_cell(task: tuple[dict, str]) -> dict:
    doc, _ = task
    scenario = scenario_from_dict(doc)
    _, metrics = run(scenario)
    return metrics.to_dict()


def cmd_sweep(args: argparse.Namespace) -> int:
    try:
        base = _load(args)
        values = [json.loads(v) for v in args.values.split(",")]
    except ScenarioError as exc:
        return _fail(str(exc))
    except json.JSONDecodeError as exc:
        return _fail(f"--values must be comma-separated JSON scalars: {exc}")
    seeds = list(range(args.seeds))
    base_doc = scenario_to_dict(base)
    tasks = []
    for v in values:
        for seed in seeds:
            doc = json.loads(json.dumps(base_doc))
            try:
                _set_by_path(doc, args.axis, v)
            except ScenarioError as exc:
                return _fail(str(exc))
            doc["seed"] = seed
            try:
                scenario_from_dict(doc)  # validate before launching workers
            except ScenarioError as exc:
                return _fail(f"{args.axis}={v}: {exc}")
            tasks.append((doc, f"{v}"))

    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_cell, tasks))
    else:
        results = [_sweep_cell(t) for t in tasks]

    def agg(ms: list[dict], key: str) -> float | None:
        xs = [m[key] for m in ms if m[key] is not None]
        return sum(xs) / len(xs) if xs else None

    header = (f"{args.axis},seeds,successes,success_rate,"
              "mean_time_to_intercept,mean_rms_pixel_error,mean_path_length")
    rows = [header]
    print(header)
    for i, v in enumerate(values):
        cell = results[i * len(seeds):(i + 1) * len(seeds)]
        successes = sum(1 for m in cell if m["success"])
        mean_tti = agg(cell, "time_to_intercept")
        mean_rms = agg(cell, "rms_pixel_error_after_settling")
        mean_path = agg(cell, "path_length")
        row = (f"{v},{len(seeds)},{successes},{successes / len(seeds)!r},"
               f"{'' if mean_tti is None else repr(mean_tti)},"
               f"{'' if mean_rms is None else repr(mean_rms)},"
               f"{'' if mean_path is None else repr(mean_path)}")
        rows.append(row)
        print(row)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _atomic_write(out / "sweep.csv", "\n".join(rows) + "\n")
        print(f"wrote {out / 'sweep.csv'}")
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    path = Path(args.telemetry)
    if not path.is_file():
        return _fail(f"telemetry file not found: {path}")
    try:
        records = read_jsonl(path)
    except ValueError as exc:
        return _fail(str(exc))
    if not records:
        return _fail(f"{path}: no telemetry records")
    metrics = compute_metrics(records)
    print(f"replayed {len(records)} ticks ({records[-1].t:.2f} s)")
    for key, value in metrics.to_dict().items():
        print(f"  {key}: {value}")
    if args.plot:
        for p in _write_plots(records, path.parent):
            print(f"  wrote {p}")
    stored_path = path.parent / "metrics.json"
    if stored_path.is_file():
        stored = json.loads(stored_path.read_text()).get("metrics")
        if stored == metrics.to_dict():
            print("stored metrics match recomputed metrics")
        else:
            print(f"MISMATCH: stored metrics in {stored_path} differ from recomputed",
                  file=sys.stderr)
            return 1
    return 0


def cmd_presets(args: argparse.Namespace) -> int:
    names = list_presets()
    if not names:
        print("no presets found")
        return 0
    for name in names:
        try:
            sc = load_preset(name)
        except ScenarioError as exc:
            print(f"{name}: INVALID ({exc})")
            continue
        print(f"{name}: {sc.duration:g} s @ {1 / sc.dt:g} Hz, seed {sc.seed}, "
              f"mode {sc.initial_mode.value}, "
              f"waves {sc.disturbance.wave_amplitude:g} N")
    return 0


def cmd_loss(args: argparse.Namespace) -> int:
    path = Path(args.fixture)
    if not path.is_file():
        return _fail(f"fixture file not found: {path}")
    try:
        cases = yolo_loss.load_fixture_file(path)
    except (ValueError, json.JSONDecodeError) as exc:
        return _fail(str(exc))
    worst = 0.0
    failures = 0
    for case in cases:
        try:
            computed = yolo_loss.evaluate_case(case)
        except ValueError as exc:
            return _fail(str(exc))
        name = case.get("name", "<unnamed>")
        print(name)
        expected = case.get("expected", {})
        for comp, value in computed.items():
            line = f"  {comp}: {value!r}"
            if comp in expected:
                err = abs(value - float(expected[comp]))
                worst = max(worst, err)
                ok = err <= args.tolerance
                failures += 0 if ok else 1
                line += f"  (expected {expected[comp]!r}, |err| {err:.3e}, {'ok' if ok else 'FAIL'})"
            print(line)
    if failures:
        print(f"{failures} component(s) outside tolerance {args.tolerance}", file=sys.stderr)
        return 1
    print(f"all expected components within {args.tolerance} (worst |err| {worst:.3e})")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .gateway import create_app

    ui_dir = args.ui_dir or os.environ.get("MARINEX_UI_DIR")
    if ui_dir and not Path(ui_dir).is_dir():
        return _fail(f"--ui-dir {ui_dir} is not a directory")
    app = create_app(ui_dir=ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _add_scenario_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", help="path to a scenario JSON file")
    p.add_argument("--preset", help="named preset (see `marinex presets`)")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="marinex",
                                     description="USV visual-servoing simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one scenario and write telemetry + metrics")
    _add_scenario_args(p)
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--require-success", action="store_true",
                   help="exit 1 when the mission does not reach HOLD")
    p.add_argument("--plot", action="store_true", help="emit plot-ready CSV/SVG series")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="sweep one scenario field across values x seeds")
    _add_scenario_args(p)
    p.add_argument("--axis", required=True,
                   help="dotted scenario field path, e.g. controller.speed_cap")
    p.add_argument("--values", required=True, help="comma-separated JSON scalars")
    p.add_argument("--seeds", type=int, default=20, help="number of seeds (0..N-1)")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    p.add_argument("--out", default=None, help="directory for sweep.csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("replay", help="recompute metrics from a telemetry JSONL file")
    p.add_argument("telemetry", help="path to telemetry.jsonl")
    p.add_argument("--plot", action="store_true", help="emit plot-ready CSV/SVG series")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("presets", help="list available scenario presets")
    p.set_defaults(func=cmd_presets)

    p = sub.add_parser("loss", help="evaluate a detection-loss fixture file")
    p.add_argument("fixture", help="path to a loss fixture JSON file")
    p.add_argument("--tolerance", type=float, default=1e-9)
    p.set_defaults(func=cmd_loss)

    p = sub.add_parser("serve", help="launch the telemetry/teleop gateway")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--ui-dir", default=None,
                   help="static operator-console assets to mount at /ui")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
