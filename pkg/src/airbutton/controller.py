"""Two-stage burst controller: button edges in, focus burst commands out."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .sensing import ButtonEvent, EventKind

LATENCY_BUDGET_S = 0.015


class Condition(str, enum.Enum):
    DOWN_ONLY = "down"
    UP_ONLY = "up"
    BOTH = "both"

    def fires_on(self, kind: EventKind) -> bool:
        if self is Condition.BOTH:
            return True
        return (self is Condition.DOWN_ONLY) == (kind is EventKind.DOWN)


@dataclass(frozen=True)
class FeedbackConfig:
    condition: Condition = Condition.BOTH
    burst_duration: float = 0.050
    focal_height: float = 3e-3
    focal_xy: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.burst_duration <= 0:
            raise ValueError("burst_duration must be positive")
        if self.focal_height <= 0:
            raise ValueError("focal_height must be positive")

    @property
    def target(self) -> np.ndarray:
        return np.array([self.focal_xy[0], self.focal_xy[1], self.focal_height])


@dataclass(frozen=True)
class FocusCommand:
    """One scheduled burst: rectangular gate of unmodulated carrier at a focus.

    Commands are plain value objects (tuple target) so logs compare by value.
    """

    target: tuple[float, float, float]
    start: float
    duration: float
    amplitude: float = 1.0

    def __post_init__(self):
        t = tuple(float(x) for x in np.asarray(self.target, dtype=float).reshape(-1))
        if len(t) != 3:
            raise ValueError("target must be a 3-vector")
        if self.duration <= 0:
            raise ValueError("duration must be positive")
        object.__setattr__(self, "target", t)


@dataclass(frozen=True)
class ControllerState:
    config: FeedbackConfig
    active_burst: tuple[float, float] | None = None  # (start, duration)
    last_time: float = -math.inf


def controller_step(
    state: ControllerState, event: ButtonEvent | None, now: float
) -> tuple[ControllerState, FocusCommand | None]:
    """Advance the controller one tick, firing a burst on matching edges.

    A burst starts on the same tick as its event. Edges arriving while a burst
    is active are ignored, so command intervals never overlap. Expired bursts
    are cleared before the event is considered: the interval is half-open, so
    a burst is inactive at exactly start + duration.
    """
    if now < state.last_time:
        raise ValueError(f"controller time regression: {now} < {state.last_time}")
    active = state.active_burst
    if active is not None and now >= active[0] + active[1]:
        active = None
    command = None
    if event is not None and active is None and state.config.condition.fires_on(event.kind):
        command = FocusCommand(
            target=state.config.target,
            start=now,
            duration=state.config.burst_duration,
        )
        active = (now, state.config.burst_duration)
    return replace(state, active_burst=active, last_time=now), command


def burst_envelope(cmd: FocusCommand, t: float) -> float:
    """Rectangular amplitude gate over [start, start + duration)."""
    return cmd.amplitude if cmd.start <= t < cmd.start + cmd.duration else 0.0


def measure_latency(events: list[ButtonEvent], commands: list[FocusCommand]) -> list[float]:
    """Per-command latency: burst start minus the crossing sample's timestamp.

    Each command is matched with the most recent event at or before its start.
    """
    if not commands:
        raise ValueError("run contains no commands to measure")
    latencies = []
    for cmd in commands:
        causes = [ev for ev in events if ev.time <= cmd.start]
        if not causes:
            raise ValueError(f"command at t={cmd.start} has no causing event")
        latencies.append(cmd.start - causes[-1].time)
    return latencies


@dataclass(frozen=True)
class BudgetCheck:
    """Sampling-period check against the end-to-end latency budget."""

    sampling_period: float
    budget: float
    ok: bool

    def describe(self) -> str:
        status = "within" if self.ok else "VIOLATES"
        return (
            f"sampling period {self.sampling_period * 1e3:.2f} ms "
            f"{status} the {self.budget * 1e3:.0f} ms latency budget"
        )


def check_latency_budget(sampling_hz: float, budget: float = LATENCY_BUDGET_S) -> BudgetCheck:
    """Commands fire within one sampling period, so the period must fit the budget."""
    if sampling_hz <= 0:
        raise ValueError("sampling rate must be positive")
    period = 1.0 / sampling_hz
    return BudgetCheck(sampling_period=period, budget=budget, ok=period <= budget)
