"""Optical finger detection: IR beam occlusion, photovoltage, hysteresis edges.

The beam is a thin collimated IR ray crossing the workspace a few millimeters
above the plate; the finger is a horizontal cylinder whose lower edge cuts the
circular beam aperture. The detector is a two-threshold state machine: the
release threshold sits above the press threshold, so voltage noise inside the
band cannot retrigger events (chattering suppression).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .geometry import Scene


class EventKind(str, enum.Enum):
    DOWN = "down"
    UP = "up"


class Region(str, enum.Enum):
    ABOVE = "above"
    BELOW = "below"


@dataclass(frozen=True)
class BeamModel:
    """IR emitter/receiver pair with a collimating aperture."""

    emitter: np.ndarray
    receiver: np.ndarray
    aperture_radius: float = 0.5e-3
    v_bright: float = 5.0
    v_dark: float = 0.0

    def __post_init__(self):
        e = np.asarray(self.emitter, dtype=float)
        r = np.asarray(self.receiver, dtype=float)
        if e.shape != (3,) or r.shape != (3,):
            raise ValueError("emitter and receiver must be 3-vectors")
        if self.aperture_radius <= 0:
            raise ValueError("aperture_radius must be positive")
        if not self.v_bright > self.v_dark >= 0:
            raise ValueError("need v_bright > v_dark >= 0")
        e.flags.writeable = False
        r.flags.writeable = False
        object.__setattr__(self, "emitter", e)
        object.__setattr__(self, "receiver", r)

    @property
    def axis_height(self) -> float:
        return float(self.emitter[2] + self.receiver[2]) / 2.0


def default_beam(scene: Scene) -> BeamModel:
    """Emitter/receiver 200 mm apart at the scene's beam height, 1 mm aperture."""
    h = scene.beam_height
    return BeamModel(emitter=np.array([-0.1, 0.0, h]), receiver=np.array([0.1, 0.0, h]))


@dataclass(frozen=True)
class FingerModel:
    """Horizontal-cylinder finger proxy; center is (x, y, height above plate)."""

    center: np.ndarray
    radius: float = 7e-3

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        if c.shape != (3,):
            raise ValueError("center must be a 3-vector")
        if self.radius <= 0:
            raise ValueError("finger radius must be positive")
        c.flags.writeable = False
        object.__setattr__(self, "center", c)

    @property
    def bottom(self) -> float:
        return float(self.center[2]) - self.radius


def occlusion(finger: FingerModel, beam: BeamModel) -> float:
    """Fraction of the beam aperture cross-section blocked by the finger.

    The finger's lower edge cuts the circular aperture as a half-plane; the
    blocked fraction is the normalized area of the circular segment above that
    chord. 0 when the finger bottom clears the beam top, 1 when it is below
    the beam bottom.
    """
    a = beam.aperture_radius
    d = finger.bottom - beam.axis_height
    if d >= a:
        return 0.0
    if d <= -a:
        return 1.0
    segment = a * a * math.acos(d / a) - d * math.sqrt(a * a - d * d)
    return segment / (math.pi * a * a)


def photovoltage(occ: float, beam: BeamModel) -> float:
    """Linear phototransistor model: v_bright unoccluded down to v_dark blocked."""
    if not 0.0 <= occ <= 1.0:
        raise ValueError("occlusion fraction must lie in [0, 1]")
    return beam.v_dark + (1.0 - occ) * (beam.v_bright - beam.v_dark)


@dataclass(frozen=True)
class ButtonEvent:
    kind: EventKind
    time: float
    voltage: float


@dataclass(frozen=True)
class DetectorState:
    """Hysteresis detector state; t_release > t_press spans the dead band."""

    region: Region = Region.ABOVE
    t_press: float = 2.0
    t_release: float = 3.0
    last_event_time: float = -math.inf
    last_sample_time: float = -math.inf

    def __post_init__(self):
        if not self.t_release > self.t_press:
            raise ValueError("hysteresis band requires t_release > t_press")


def detector_step(
    state: DetectorState, voltage: float, time: float
) -> tuple[DetectorState, ButtonEvent | None]:
    """Advance the detector by one sample; emits a Down/Up edge on band exit.

    Comparisons are inclusive: v <= t_press presses, v >= t_release releases.
    Samples must arrive in nondecreasing time order.
    """
    if time < state.last_sample_time:
        raise ValueError(f"sample time regression: {time} < {state.last_sample_time}")
    event = None
    region = state.region
    if region is Region.ABOVE and voltage <= state.t_press:
        region = Region.BELOW
        event = ButtonEvent(kind=EventKind.DOWN, time=time, voltage=voltage)
    elif region is Region.BELOW and voltage >= state.t_release:
        region = Region.ABOVE
        event = ButtonEvent(kind=EventKind.UP, time=time, voltage=voltage)
    new_state = replace(
        state,
        region=region,
        last_sample_time=time,
        last_event_time=event.time if event else state.last_event_time,
    )
    return new_state, event


def seeded_state(
    first_voltage: float, t_press: float = 2.0, t_release: float = 3.0
) -> DetectorState:
    """Detector state whose region matches the first sample, emitting no edge.

    Sessions that begin with the finger already in the beam must not report a
    spurious press, so the initial region is taken from the opening voltage.
    """
    region = Region.BELOW if first_voltage <= t_press else Region.ABOVE
    return DetectorState(region=region, t_press=t_press, t_release=t_release)
