"""File formats: CSV exports, the compact binary field layout, run manifests.

Writes are atomic (temp file + rename) so a failing command never leaves a
partial artifact behind.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import struct

import numpy as np

from .acoustics import FieldGrid, GridSpec
from .controller import FocusCommand
from .geometry import Scene
from .harness import SweepResult
from .sensing import ButtonEvent, EventKind

FIELD_MAGIC = b"ABFG"
FIELD_VERSION = 1


def _atomic_write(path: str, write_fn) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    try:
        with open(tmp, "w", newline="", encoding="utf-8") as fh:
            write_fn(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def _atomic_write_bytes(path: str, payload: bytes) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    try:
        with open(tmp, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def scene_hash(scene: Scene) -> str:
    canon = json.dumps(scene.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def write_run_manifest(path: str, scene: Scene, config: dict, seed: int | None) -> None:
    manifest = {"scene_sha256": scene_hash(scene), "config": config, "seed": seed}

    def _write(fh):
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")

    _atomic_write(path, _write)


def write_field_csv(grid: FieldGrid, path: str) -> None:
    points = grid.spec.points()
    values = grid.values.ravel()

    def _write(fh):
        w = csv.writer(fh)
        w.writerow(["x_m", "y_m", "z_m", "re_pa", "im_pa", "abs_pa"])
        for (x, y, z), v in zip(points, values):
            w.writerow([repr(float(x)), repr(float(y)), repr(float(z)), repr(float(v.real)), repr(float(v.imag)), repr(float(abs(v)))])

    _atomic_write(path, _write)


def write_field_binary(grid: FieldGrid, path: str) -> None:
    """Little-endian layout: magic, version, dims, origin, axes, spacing, then
    interleaved (re, im) float64 pairs in C order."""
    spec = grid.spec
    header = struct.pack(
        "<4sI3I",
        FIELD_MAGIC,
        FIELD_VERSION,
        *spec.shape,
    )
    header += struct.pack("<3d", *spec.origin)
    header += struct.pack("<9d", *spec.axes.ravel())
    header += struct.pack("<d", spec.spacing)
    payload = header + grid.values.astype("<c16").tobytes(order="C")
    _atomic_write_bytes(path, payload)


def read_field_binary(path: str) -> FieldGrid:
    with open(path, "rb") as fh:
        raw = fh.read()
    magic, version, nx, ny, nz = struct.unpack_from("<4sI3I", raw, 0)
    if magic != FIELD_MAGIC or version != FIELD_VERSION:
        raise ValueError(f"not a field binary (magic={magic!r}, version={version})")
    off = struct.calcsize("<4sI3I")
    origin = np.array(struct.unpack_from("<3d", raw, off))
    off += 24
    axes = np.array(struct.unpack_from("<9d", raw, off)).reshape(3, 3)
    off += 72
    (spacing,) = struct.unpack_from("<d", raw, off)
    off += 8
    values = np.frombuffer(raw, dtype="<c16", offset=off).reshape(nx, ny, nz)
    spec = GridSpec(origin=origin, shape=(nx, ny, nz), spacing=spacing, axes=axes)
    return FieldGrid(spec=spec, values=values.copy())


def write_sweep_csv(result: SweepResult, path: str) -> None:
    def _write(fh):
        w = csv.writer(fh)
        w.writerow(["gap_mm", "focal_height_mm", "force_mN"])
        for i, gap in enumerate(result.gaps_mm):
            for j, height in enumerate(result.focal_heights_mm):
                w.writerow([repr(float(gap)), repr(float(height)), repr(float(result.forces[i, j] * 1e3))])

    _atomic_write(path, _write)


def write_events_csv(events, path: str) -> None:
    def _write(fh):
        w = csv.writer(fh)
        w.writerow(["time_s", "kind", "volts"])
        for ev in events:
            w.writerow([repr(float(ev.time)), ev.kind.value, repr(float(ev.voltage))])

    _atomic_write(path, _write)


def read_events_csv(path: str) -> list[ButtonEvent]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out.append(
                ButtonEvent(kind=EventKind(row["kind"]), time=float(row["time_s"]), voltage=float(row["volts"]))
            )
    return out


def write_commands_csv(commands, path: str) -> None:
    def _write(fh):
        w = csv.writer(fh)
        w.writerow(["start_s", "duration_s", "x_mm", "y_mm", "z_mm"])
        for cmd in commands:
            w.writerow(
                [
                    repr(float(cmd.start)),
                    repr(float(cmd.duration)),
                    repr(float(cmd.target[0] * 1e3)),
                    repr(float(cmd.target[1] * 1e3)),
                    repr(float(cmd.target[2] * 1e3)),
                ]
            )

    _atomic_write(path, _write)


def read_commands_csv(path: str) -> list[FocusCommand]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out.append(
                FocusCommand(
                    target=np.array([float(row["x_mm"]), float(row["y_mm"]), float(row["z_mm"])]) * 1e-3,
                    start=float(row["start_s"]),
                    duration=float(row["duration_s"]),
                )
            )
    return out


def write_trace_csv(times, voltages, path: str) -> None:
    def _write(fh):
        w = csv.writer(fh)
        w.writerow(["time_s", "volts"])
        for t, v in zip(times, voltages):
            w.writerow([repr(float(t)), repr(float(v))])

    _atomic_write(path, _write)


def read_trace_csv(path: str) -> tuple[np.ndarray, np.ndarray]:
    times, volts = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            times.append(float(row["time_s"]))
            volts.append(float(row["volts"]))
    return np.array(times), np.array(volts)
