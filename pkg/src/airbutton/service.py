"""Live pipeline service: ticks the sensing->controller loop and streams frames.

Wire format is JSON text messages over a local WebSocket (length-delimited by
the transport, trivially consumed from a browser):

  server -> client  {"type": "hello", ...scene summary, thresholds, heatmap}
  server -> client  {"type": "frame", ...TickFrame fields, SI units}
  client -> server  {"type": "input", "finger_height_m": h, "client_time": t}

A single owner task advances the state machines; socket handlers only swap the
latest requested height in and copy frames out, so there is no shared mutable
simulation state. Batch replays use pure simulated time; `serve` paces the
same step function against the wall clock.
"""

from __future__ import annotations

import asyncio
import json
import signal
from dataclasses import dataclass, field

import numpy as np

from .acoustics import FocusSpec, GridSpec, field_grid, focus_phases
from .controller import ControllerState, FeedbackConfig, controller_step
from .geometry import Scene
from .harness import voltages_for_heights
from .sensing import BeamModel, ButtonEvent, DetectorState, default_beam, detector_step, seeded_state

DEFAULT_TICK_HZ = 250.0
MAX_INPUT_HEIGHT = 0.020


@dataclass(frozen=True)
class TickFrame:
    """One pipeline tick as broadcast to clients."""

    time: float
    finger_height: float
    voltage: float
    detector_region: str
    active_burst_remaining: float | None
    last_event: ButtonEvent | None
    t_press: float
    t_release: float

    def to_message(self) -> dict:
        ev = None
        if self.last_event is not None:
            ev = {
                "kind": self.last_event.kind.value,
                "time": self.last_event.time,
                "voltage": self.last_event.voltage,
            }
        return {
            "type": "frame",
            "time": self.time,
            "finger_height_m": self.finger_height,
            "voltage_v": self.voltage,
            "detector_region": self.detector_region,
            "active_burst_remaining_s": self.active_burst_remaining,
            "last_event": ev,
            "t_press_v": self.t_press,
            "t_release_v": self.t_release,
        }


class Pipeline:
    """Deterministic tick-by-tick sensing->controller state machine."""

    def __init__(
        self,
        scene: Scene,
        config: FeedbackConfig,
        tick_hz: float = DEFAULT_TICK_HZ,
        beam: BeamModel | None = None,
        t_press: float = 2.0,
        t_release: float = 3.0,
    ):
        if tick_hz <= 0:
            raise ValueError("tick_hz must be positive")
        self.scene = scene
        self.config = config
        self.tick_hz = tick_hz
        self.beam = default_beam(scene) if beam is None else beam
        self._det: DetectorState | None = None
        self._t_press = t_press
        self._t_release = t_release
        self._ctl = ControllerState(config=config)
        self.tick_index = 0

    def step(self, height: float) -> TickFrame:
        """Advance one tick with the commanded fingertip height (clamped >= 0)."""
        height = min(max(float(height), 0.0), MAX_INPUT_HEIGHT)
        t = self.tick_index / self.tick_hz
        voltage = float(voltages_for_heights(np.array([height]), self.beam)[0])
        if self._det is None:
            self._det = seeded_state(voltage, self._t_press, self._t_release)
        self._det, event = detector_step(self._det, voltage, t)
        self._ctl, _command = controller_step(self._ctl, event, t)
        burst = self._ctl.active_burst
        remaining = None
        if burst is not None:
            remaining = burst[0] + burst[1] - t
            if remaining <= 0:
                remaining = None
        self.tick_index += 1
        return TickFrame(
            time=t,
            finger_height=height,
            voltage=voltage,
            detector_region=self._det.region.value,
            active_burst_remaining=remaining,
            last_event=event,
            t_press=self._det.t_press,
            t_release=self._det.t_release,
        )


def replay(scene: Scene, config: FeedbackConfig, input_log: list[tuple[float, float]], ticks: int, tick_hz: float = DEFAULT_TICK_HZ) -> list[TickFrame]:
    """Offline run: apply a recorded (tick_time, height) log over `ticks` ticks.

    Heights take effect at the first tick whose time is >= their log time and
    hold until replaced, mirroring the live ingest rule, so replaying a log
    recorded by `serve` reproduces the identical frame sequence.
    """
    pipeline = Pipeline(scene, config, tick_hz=tick_hz)
    frames = []
    height = 0.0
    pending = sorted(input_log)
    idx = 0
    for k in range(ticks):
        t = k / tick_hz
        while idx < len(pending) and pending[idx][0] <= t:
            height = pending[idx][1]
            idx += 1
        frames.append(pipeline.step(height))
    return frames


def scene_heatmap(scene: Scene, config: FeedbackConfig, half_extent: float = 0.040, height: float = 0.020, spacing: float = 1e-3) -> dict:
    """Static |p| slice (y = 0) for the console; normalized to the slice peak."""
    drive = focus_phases(scene, FocusSpec(target=config.target))
    nx = int(round(2 * half_extent / spacing)) + 1
    nz = int(round(height / spacing)) + 1
    spec = GridSpec(origin=np.array([-half_extent, 0.0, 0.0]), shape=(nx, 1, nz), spacing=spacing)
    grid = field_grid(scene, drive, spec)
    mags = np.abs(grid.values[:, 0, :])
    peak = mags.max()
    norm = mags / peak if peak > 0 else mags
    return {
        "x_min_m": -half_extent,
        "x_max_m": half_extent,
        "z_min_m": 0.0,
        "z_max_m": height,
        "nx": nx,
        "nz": nz,
        "values": [round(float(v), 4) for v in norm.ravel(order="C")],
    }


def hello_message(
    scene: Scene,
    config: FeedbackConfig,
    tick_hz: float,
    heatmap: dict | None,
    t_press: float = 2.0,
    t_release: float = 3.0,
) -> dict:
    return {
        "type": "hello",
        "tick_hz": tick_hz,
        "t_press_v": t_press,
        "t_release_v": t_release,
        "beam_height_m": scene.beam_height,
        "burst_duration_s": config.burst_duration,
        "condition": config.condition.value,
        "max_height_m": MAX_INPUT_HEIGHT,
        "heatmap": heatmap,
    }


@dataclass
class _Shared:
    """State exchanged between socket handlers and the owner task."""

    latest_height: float = 0.0
    clients: set = field(default_factory=set)
    input_log: list = field(default_factory=list)


async def _run_server(
    scene: Scene,
    config: FeedbackConfig,
    host: str,
    port: int,
    tick_hz: float,
    with_heatmap: bool = True,
    record_path: str | None = None,
) -> None:
    import websockets

    shared = _Shared()
    heatmap = scene_heatmap(scene, config) if with_heatmap else None
    hello = json.dumps(hello_message(scene, config, tick_hz, heatmap))
    pipeline = Pipeline(scene, config, tick_hz=tick_hz)

    async def handler(ws):
        shared.clients.add(ws)
        try:
            await ws.send(hello)
            async for raw in ws:
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    continue
                if msg.get("type") == "input":
                    h = float(msg.get("finger_height_m", 0.0))
                    shared.latest_height = min(max(h, 0.0), MAX_INPUT_HEIGHT)
        finally:
            shared.clients.discard(ws)

    async def owner():
        period = 1.0 / tick_hz
        loop = asyncio.get_running_loop()
        next_tick = loop.time()
        while True:
            frame = pipeline.step(shared.latest_height)
            shared.input_log.append((frame.time, frame.finger_height))
            payload = json.dumps(frame.to_message())
            for ws in list(shared.clients):
                try:
                    await ws.send(payload)
                except Exception:
                    shared.clients.discard(ws)
            next_tick += period
            await asyncio.sleep(max(0.0, next_tick - loop.time()))

    stop = asyncio.Event()
    loop = asyncio.get_running_loop()
    for sig in (signal.SIGINT, signal.SIGTERM):
        try:
            loop.add_signal_handler(sig, stop.set)
        except NotImplementedError:
            pass

    async with websockets.serve(handler, host, port):
        task = asyncio.create_task(owner())
        print(f"serving pipeline on ws://{host}:{port} at {tick_hz:g} Hz")
        try:
            await stop.wait()
        finally:
            task.cancel()
            if record_path is not None:
                save_input_log(shared.input_log, record_path)


def save_input_log(log: list[tuple[float, float]], path: str) -> None:
    """Persist the per-tick applied heights; replay() consumes this format."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"input_log": [[t, h] for t, h in log]}, fh)
        fh.write("\n")


def load_input_log(path: str) -> list[tuple[float, float]]:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return [(float(t), float(h)) for t, h in data["input_log"]]


def serve(
    scene: Scene,
    config: FeedbackConfig,
    host: str = "127.0.0.1",
    port: int = 8765,
    tick_hz: float = DEFAULT_TICK_HZ,
    record_path: str | None = None,
) -> None:
    """Run the streaming service until interrupted; raises if the port is taken."""
    try:
        asyncio.run(_run_server(scene, config, host, port, tick_hz, record_path=record_path))
    except KeyboardInterrupt:
        pass
