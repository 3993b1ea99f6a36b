"""Scripted experiments: finger trajectories, live sessions, force sweeps."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import acoustics
from .acoustics import DiscTarget, FocusSpec, focus_phases, radiation_force_disc
from .controller import (
    BudgetCheck,
    ControllerState,
    FeedbackConfig,
    FocusCommand,
    check_latency_budget,
    controller_step,
    measure_latency,
)
from .geometry import Scene
from .sensing import BeamModel, ButtonEvent, default_beam, detector_step, seeded_state

DEFAULT_SAMPLING_HZ = 1000.0
AIRBORNE_MIN_HEIGHT = 1e-3

# Electronic-scale emulation: one 0.1 g count at standard gravity, in newtons.
SCALE_STEP_N = 0.1e-3 * 9.81


class TouchMode(str, enum.Enum):
    TOUCHING_PLATE = "plate"
    AIRBORNE = "air"


@dataclass(frozen=True)
class Trajectory:
    """Sampled fingertip height (meters above the plate) versus time."""

    times: np.ndarray
    heights: np.ndarray
    touch_mode: TouchMode

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        h = np.asarray(self.heights, dtype=float)
        if t.ndim != 1 or t.shape != h.shape:
            raise ValueError("times and heights must be matching 1-D arrays")
        if t.shape[0] >= 2 and np.any(np.diff(t) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        if np.any(h < 0):
            raise ValueError("trajectory heights must be >= 0")
        t.flags.writeable = False
        h.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "heights", h)

    @property
    def sampling_hz(self) -> float:
        if self.times.shape[0] < 2:
            raise ValueError("sampling rate needs at least two samples")
        return 1.0 / float(np.mean(np.diff(self.times)))


def sinusoid_trajectory(
    cycles: int,
    period: float,
    amplitude: float,
    touch_mode: TouchMode,
    sample_rate_hz: float = DEFAULT_SAMPLING_HZ,
) -> Trajectory:
    """Raised-cosine press cycles: height swings from the rest offset up by `amplitude`.

    Touching-plate motion rests at height 0; airborne motion keeps a 1 mm
    clearance at the bottom of each cycle.
    """
    if cycles < 1:
        raise ValueError("need at least one cycle")
    if amplitude <= 0 or period <= 0 or sample_rate_hz <= 0:
        raise ValueError("amplitude, period and sample rate must be positive")
    offset = 0.0 if touch_mode is TouchMode.TOUCHING_PLATE else AIRBORNE_MIN_HEIGHT
    duration = cycles * period
    n = int(round(duration * sample_rate_hz)) + 1
    t = np.arange(n) / sample_rate_hz
    h = offset + (amplitude / 2.0) * (1.0 - np.cos(2.0 * np.pi * t / period))
    if touch_mode is TouchMode.TOUCHING_PLATE:
        h = np.maximum(h, 0.0)
    return Trajectory(times=t, heights=h, touch_mode=touch_mode)


def add_chatter(traj: Trajectory, noise_amplitude: float, seed: int) -> Trajectory:
    """Seeded uniform height jitter per sample; heights stay clamped at 0."""
    if noise_amplitude < 0:
        raise ValueError("noise_amplitude must be >= 0")
    rng = np.random.default_rng(seed)
    jitter = rng.uniform(-noise_amplitude, noise_amplitude, size=traj.heights.shape)
    heights = np.maximum(traj.heights + jitter, 0.0)
    return Trajectory(times=traj.times, heights=heights, touch_mode=traj.touch_mode)


@dataclass(frozen=True)
class SessionLog:
    """Everything one sensing->controller run produced."""

    events: tuple[ButtonEvent, ...]
    commands: tuple[FocusCommand, ...]
    latencies: tuple[float, ...]
    budget: BudgetCheck

    def count(self, kind) -> int:
        return sum(1 for ev in self.events if ev.kind is kind)


def voltages_for_heights(heights: np.ndarray, beam: BeamModel) -> np.ndarray:
    """Photovoltage for fingertip bottom heights (vectorized occlusion model)."""
    a = beam.aperture_radius
    d = np.clip(np.asarray(heights, dtype=float) - beam.axis_height, -a, a)
    segment = a * a * np.arccos(d / a) - d * np.sqrt(np.maximum(a * a - d * d, 0.0))
    occ = np.clip(segment / (np.pi * a * a), 0.0, 1.0)
    return beam.v_dark + (1.0 - occ) * (beam.v_bright - beam.v_dark)


def run_session(
    scene: Scene,
    config: FeedbackConfig,
    traj: Trajectory,
    beam: BeamModel | None = None,
    t_press: float = 2.0,
    t_release: float = 3.0,
) -> SessionLog:
    """Feed a trajectory through sensing and control, logging what resulted.

    The detector region is seeded from the first sample so a session that
    starts with the finger already in the beam reports no spurious edge.
    """
    if beam is None:
        beam = default_beam(scene)
    voltages = voltages_for_heights(traj.heights, beam)
    det = seeded_state(float(voltages[0]), t_press=t_press, t_release=t_release)
    ctl = ControllerState(config=config)
    events: list[ButtonEvent] = []
    commands: list[FocusCommand] = []
    for t, v in zip(traj.times, voltages):
        det, event = detector_step(det, float(v), float(t))
        ctl, command = controller_step(ctl, event, float(t))
        if event is not None:
            events.append(event)
        if command is not None:
            commands.append(command)
    latencies = tuple(measure_latency(events, commands)) if commands else ()
    budget = check_latency_budget(traj.sampling_hz)
    return SessionLog(events=tuple(events), commands=tuple(commands), latencies=latencies, budget=budget)


@dataclass(frozen=True)
class SweepResult:
    """Force table indexed by (bar-plate gap, focal height), both in mm."""

    gaps_mm: np.ndarray
    focal_heights_mm: np.ndarray
    forces: np.ndarray  # newtons, shape (len(gaps), len(heights))
    quantized: bool = False

    def __post_init__(self):
        g = np.asarray(self.gaps_mm, dtype=float)
        h = np.asarray(self.focal_heights_mm, dtype=float)
        f = np.asarray(self.forces, dtype=float)
        if f.shape != (g.shape[0], h.shape[0]):
            raise ValueError("force table shape must be (len(gaps), len(heights))")
        if np.any(f < 0):
            raise ValueError("forces must be >= 0")
        for arr in (g, h, f):
            arr.flags.writeable = False
        object.__setattr__(self, "gaps_mm", g)
        object.__setattr__(self, "focal_heights_mm", h)
        object.__setattr__(self, "forces", f)

    def gap_series(self, height_index: int) -> tuple[np.ndarray, np.ndarray]:
        return self.gaps_mm, self.forces[:, height_index]


def quantize_to_scale(force_n: float, step: float = SCALE_STEP_N) -> float:
    """Round a force to the electronic scale's 0.1 g resolution."""
    return round(force_n / step) * step


def run_force_sweep(
    scene: Scene,
    gaps_mm: np.ndarray | None = None,
    focal_heights_mm: np.ndarray | None = None,
    disc_radius: float = 5e-3,
    bounce_order: int = acoustics.DEFAULT_BOUNCE_ORDER,
    amplitude: float = 1.0,
    quantize: bool = False,
) -> SweepResult:
    """Force over the (gap, focal height) grid, gap and focus both above the plate.

    Defaults reproduce the 1..10 mm x 1..10 mm measurement grid. Each column
    reuses one focusing solution; each cell integrates the bounce-augmented
    field over the disc face.
    """
    gaps = np.arange(1.0, 11.0) if gaps_mm is None else np.asarray(gaps_mm, dtype=float)
    heights = np.arange(1.0, 11.0) if focal_heights_mm is None else np.asarray(focal_heights_mm, dtype=float)
    up = scene.plane.normal
    origin = scene.plane.point
    forces = np.zeros((gaps.shape[0], heights.shape[0]))
    for j, h_mm in enumerate(heights):
        target = origin + (h_mm * 1e-3) * up
        drive = focus_phases(scene, FocusSpec(target=target))
        if amplitude != 1.0:
            drive = drive.scaled(amplitude)
        for i, g_mm in enumerate(gaps):
            disc = DiscTarget(center=origin + (g_mm * 1e-3) * up, radius=disc_radius, normal=up)
            f = radiation_force_disc(scene, drive, disc, gap=g_mm * 1e-3, bounce_order=bounce_order)
            forces[i, j] = quantize_to_scale(f) if quantize else f
    return SweepResult(gaps_mm=gaps, focal_heights_mm=heights, forces=forces, quantized=quantize)


def dominant_period(positions: np.ndarray, values: np.ndarray) -> float:
    """Dominant spatial period from the mean spacing of interior local maxima.

    Needs at least 6 uniformly spaced samples and at least two maxima after
    mean removal; constant or aperiodic series are rejected.
    """
    x = np.asarray(positions, dtype=float)
    v = np.asarray(values, dtype=float)
    if x.shape != v.shape or x.ndim != 1:
        raise ValueError("positions and values must be matching 1-D arrays")
    if x.shape[0] < 6:
        raise ValueError("need at least 6 samples to estimate a period")
    dx = np.diff(x)
    if not np.allclose(dx, dx[0], rtol=1e-9, atol=1e-12):
        raise ValueError("samples must be uniformly spaced")
    y = v - v.mean()
    n = len(y)
    # Endpoints count when they strictly dominate their single neighbor, so a
    # peak that falls on the sweep boundary still anchors the spacing estimate;
    # constant and monotone series still yield fewer than two maxima.
    peaks = [i for i in range(1, n - 1) if y[i] > y[i - 1] and y[i] >= y[i + 1]]
    if y[0] > y[1]:
        peaks.insert(0, 0)
    if y[n - 1] > y[n - 2]:
        peaks.append(n - 1)
    if len(peaks) < 2:
        raise ValueError("no dominant period: fewer than two local maxima")
    return float(np.mean(np.diff(x[peaks])))
