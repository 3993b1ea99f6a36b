"""Command-line entry points: force sweeps, sessions, field exports, serving.

Every flag can also be supplied through an AIRBUTTON_* environment variable
(AIRBUTTON_SCENE, AIRBUTTON_OUT_DIR, AIRBUTTON_SEED, AIRBUTTON_PORT,
AIRBUTTON_TICK_HZ, AIRBUTTON_CONDITION, AIRBUTTON_BURST_MS). Commands exit 0
on success and nonzero on any validation failure, without partial outputs.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import exports
from .acoustics import FocusSpec, GridSpec, field_grid, focus_phases
from .controller import Condition, FeedbackConfig
from .geometry import Scene, default_scene, load_scene, save_scene
from .harness import (
    TouchMode,
    add_chatter,
    dominant_period,
    run_force_sweep,
    run_session,
    sinusoid_trajectory,
)

ENV_PREFIX = "AIRBUTTON_"
DEFAULT_BURSTS_MS = (50, 100)


def _env(name: str, fallback=None):
    return os.environ.get(ENV_PREFIX + name, fallback)


def _load_scene_arg(path: str | None) -> Scene:
    if path is None:
        return default_scene()
    return load_scene(path)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scene", default=_env("SCENE"), help="scene config file (default: built-in scene)")
    parser.add_argument("--out-dir", default=_env("OUT_DIR", "."), help="output directory")


def _parse_mm_list(text: str) -> np.ndarray:
    return np.array([float(tok) for tok in text.split(",") if tok.strip()])


def cmd_sweep(args) -> int:
    scene = _load_scene_arg(args.scene)
    gaps = _parse_mm_list(args.gaps_mm) if args.gaps_mm else None
    heights = _parse_mm_list(args.heights_mm) if args.heights_mm else None
    result = run_force_sweep(
        scene,
        gaps_mm=gaps,
        focal_heights_mm=heights,
        bounce_order=args.bounce_order,
        quantize=args.quantize_scale,
    )
    os.makedirs(args.out_dir, exist_ok=True)
    out = os.path.join(args.out_dir, "sweep.csv")
    exports.write_sweep_csv(result, out)
    exports.write_run_manifest(
        os.path.join(args.out_dir, "sweep_manifest.json"),
        scene,
        {
            "command": "sweep",
            "gaps_mm": list(map(float, result.gaps_mm)),
            "focal_heights_mm": list(map(float, result.focal_heights_mm)),
            "bounce_order": args.bounce_order,
            "quantize_scale": bool(args.quantize_scale),
        },
        args.seed,
    )
    periods = []
    for j in range(result.focal_heights_mm.shape[0]):
        try:
            periods.append(dominant_period(*result.gap_series(j)))
        except ValueError:
            periods.append(float("nan"))
    print(f"wrote {out}: {result.forces.size} cells", flush=True)
    with np.printoptions(precision=2):
        print(f"dominant gap-axis periods (mm): {np.array(periods)}")
    return 0


def cmd_session(args) -> int:
    scene = _load_scene_arg(args.scene)
    if args.burst_ms not in args.allowed_bursts:
        raise ValueError(f"burst_ms {args.burst_ms} not in the configured set {sorted(args.allowed_bursts)}")
    config = FeedbackConfig(
        condition=Condition(args.condition),
        burst_duration=args.burst_ms / 1000.0,
        focal_height=scene.beam_height,
    )
    traj = sinusoid_trajectory(
        cycles=args.cycles,
        period=args.period_s,
        amplitude=args.amplitude_mm * 1e-3,
        touch_mode=TouchMode(args.touch),
        sample_rate_hz=args.sampling_hz,
    )
    if args.chatter_mm > 0:
        traj = add_chatter(traj, args.chatter_mm * 1e-3, seed=args.seed or 0)
    log = run_session(scene, config, traj)
    os.makedirs(args.out_dir, exist_ok=True)
    exports.write_events_csv(log.events, os.path.join(args.out_dir, "session_events.csv"))
    exports.write_commands_csv(log.commands, os.path.join(args.out_dir, "session_commands.csv"))
    exports.write_run_manifest(
        os.path.join(args.out_dir, "session_manifest.json"),
        scene,
        {
            "command": "session",
            "condition": args.condition,
            "burst_ms": args.burst_ms,
            "cycles": args.cycles,
            "period_s": args.period_s,
            "amplitude_mm": args.amplitude_mm,
            "touch": args.touch,
            "sampling_hz": args.sampling_hz,
            "chatter_mm": args.chatter_mm,
        },
        args.seed,
    )
    max_latency = max(log.latencies) if log.latencies else 0.0
    print(
        f"events={len(log.events)} commands={len(log.commands)} "
        f"max_latency={max_latency * 1e3:.3f} ms"
    )
    print(log.budget.describe())
    return 0


def cmd_field(args) -> int:
    scene = _load_scene_arg(args.scene)
    target = np.array([0.0, 0.0, args.target_height_mm * 1e-3])
    drive = focus_phases(scene, FocusSpec(target=target))
    spacing = args.spacing_mm * 1e-3
    half = args.extent_mm * 1e-3
    n_lat = int(round(2 * half / spacing)) + 1
    n_z = int(round(args.height_mm * 1e-3 / spacing)) + 1
    spec = GridSpec(origin=np.array([-half, -half, 0.0]), shape=(n_lat, n_lat, n_z), spacing=spacing)
    grid = field_grid(scene, drive, spec)
    os.makedirs(args.out_dir, exist_ok=True)
    exports.write_field_csv(grid, os.path.join(args.out_dir, "field.csv"))
    exports.write_field_binary(grid, os.path.join(args.out_dir, "field.bin"))
    exports.write_run_manifest(
        os.path.join(args.out_dir, "field_manifest.json"),
        scene,
        {
            "command": "field",
            "target_height_mm": args.target_height_mm,
            "extent_mm": args.extent_mm,
            "height_mm": args.height_mm,
            "spacing_mm": args.spacing_mm,
        },
        args.seed,
    )
    print(f"wrote field.csv and field.bin ({grid.values.size} points)")
    return 0


def cmd_scene(args) -> int:
    path = args.out
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    save_scene(default_scene(), path)
    print(f"wrote default scene to {path}")
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    scene = _load_scene_arg(args.scene)
    config = FeedbackConfig(
        condition=Condition(args.condition),
        burst_duration=args.burst_ms / 1000.0,
        focal_height=scene.beam_height,
    )
    serve(scene, config, port=args.port, tick_hz=args.tick_hz, record_path=args.record)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="airbutton", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="force vs (gap, focal height) table -> sweep.csv")
    _add_common(p)
    p.add_argument("--gaps-mm", default=None, help="comma list of gaps in mm (default 1..10)")
    p.add_argument("--heights-mm", default=None, help="comma list of focal heights in mm (default 1..10)")
    p.add_argument("--bounce-order", type=int, default=3)
    p.add_argument("--quantize-scale", action="store_true", help="emulate the 0.1 g scale resolution")
    p.add_argument("--seed", type=int, default=_env("SEED"))
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("session", help="run a scripted press session -> event/command CSVs")
    _add_common(p)
    p.add_argument("--condition", choices=[c.value for c in Condition], default=_env("CONDITION", "both"))
    p.add_argument("--burst-ms", type=int, default=int(_env("BURST_MS", 50)))
    p.add_argument("--cycles", type=int, default=5)
    p.add_argument("--period-s", type=float, default=2.0)
    p.add_argument("--amplitude-mm", type=float, default=10.0)
    p.add_argument("--touch", choices=[m.value for m in TouchMode], default="plate")
    p.add_argument("--sampling-hz", type=float, default=1000.0)
    p.add_argument("--chatter-mm", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=_env("SEED"))
    p.set_defaults(func=cmd_session, allowed_bursts=set(DEFAULT_BURSTS_MS))

    p = sub.add_parser("field", help="export the focused pressure field (CSV + binary)")
    _add_common(p)
    p.add_argument("--target-height-mm", type=float, default=3.0)
    p.add_argument("--extent-mm", type=float, default=40.0)
    p.add_argument("--height-mm", type=float, default=20.0)
    p.add_argument("--spacing-mm", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=_env("SEED"))
    p.set_defaults(func=cmd_field)

    p = sub.add_parser("scene", help="write the default scene config file")
    p.add_argument("--out", default="scenes/paper_default.json")
    p.set_defaults(func=cmd_scene)

    p = sub.add_parser("serve", help="stream live pipeline frames over a local websocket")
    _add_common(p)
    p.add_argument("--condition", choices=[c.value for c in Condition], default=_env("CONDITION", "both"))
    p.add_argument("--burst-ms", type=int, default=int(_env("BURST_MS", 50)))
    p.add_argument("--port", type=int, default=int(_env("PORT", 8765)))
    p.add_argument("--tick-hz", type=float, default=float(_env("TICK_HZ", 250.0)))
    p.add_argument("--record", default=None, help="write the applied input log here on shutdown")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
