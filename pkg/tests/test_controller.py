import numpy as np
import pytest

from airbutton.controller import (
    Condition,
    ControllerState,
    FeedbackConfig,
    FocusCommand,
    burst_envelope,
    check_latency_budget,
    controller_step,
    measure_latency,
)
from airbutton.sensing import ButtonEvent, EventKind


def _down(t, v=1.0):
    return ButtonEvent(kind=EventKind.DOWN, time=t, voltage=v)


def _up(t, v=4.0):
    return ButtonEvent(kind=EventKind.UP, time=t, voltage=v)


def test_both_condition_fires_on_down():
    config = FeedbackConfig(condition=Condition.BOTH, burst_duration=0.050, focal_height=3e-3)
    state = ControllerState(config=config)
    state, cmd = controller_step(state, _down(1.0), 1.0)
    assert cmd is not None
    assert cmd.start == 1.0
    assert cmd.duration == 0.050
    assert np.allclose(cmd.target, [0.0, 0.0, 3e-3])


def test_up_only_ignores_down():
    config = FeedbackConfig(condition=Condition.UP_ONLY)
    state = ControllerState(config=config)
    state, cmd = controller_step(state, _down(1.0), 1.0)
    assert cmd is None
    state, cmd = controller_step(state, _up(2.0), 2.0)
    assert cmd is not None


def test_down_only_ignores_up():
    config = FeedbackConfig(condition=Condition.DOWN_ONLY)
    state = ControllerState(config=config)
    state, cmd = controller_step(state, _up(1.0), 1.0)
    assert cmd is None


def test_no_event_no_command():
    state = ControllerState(config=FeedbackConfig())
    new_state, cmd = controller_step(state, None, 5.0)
    assert cmd is None
    assert new_state.active_burst is None


def test_event_during_active_burst_ignored():
    config = FeedbackConfig(condition=Condition.BOTH, burst_duration=0.100)
    state = ControllerState(config=config)
    state, first = controller_step(state, _down(0.0), 0.0)
    assert first is not None
    state, second = controller_step(state, _up(0.050), 0.050)
    assert second is None  # burst still active
    state, third = controller_step(state, _down(0.100), 0.100)
    assert third is not None  # interval is half-open, burst expired exactly now


def test_commands_never_overlap_random_streams():
    rng = np.random.default_rng(7)
    for _ in range(30):
        config = FeedbackConfig(condition=Condition.BOTH, burst_duration=float(rng.uniform(0.02, 0.2)))
        state = ControllerState(config=config)
        commands = []
        t = 0.0
        kind = EventKind.DOWN
        for _ in range(40):
            t += float(rng.uniform(0.001, 0.3))
            ev = ButtonEvent(kind=kind, time=t, voltage=1.0)
            kind = EventKind.UP if kind is EventKind.DOWN else EventKind.DOWN
            state, cmd = controller_step(state, ev, t)
            if cmd:
                commands.append(cmd)
        for a, b in zip(commands, commands[1:]):
            assert a.start + a.duration <= b.start


def test_time_regression_rejected():
    state = ControllerState(config=FeedbackConfig())
    state, _ = controller_step(state, None, 1.0)
    with pytest.raises(ValueError):
        controller_step(state, None, 0.5)


def test_burst_envelope_edges():
    cmd = FocusCommand(target=np.array([0.0, 0.0, 3e-3]), start=1.0, duration=0.1)
    assert burst_envelope(cmd, 1.0) == 1.0
    assert burst_envelope(cmd, 1.1) == 0.0
    assert burst_envelope(cmd, 1.05) == 1.0
    assert burst_envelope(cmd, 0.999) == 0.0


def test_measure_latency_matches_causing_events():
    events = [_down(1.0), _up(2.0)]
    commands = [
        FocusCommand(target=np.zeros(3) + [0, 0, 3e-3], start=1.0, duration=0.05),
        FocusCommand(target=np.zeros(3) + [0, 0, 3e-3], start=2.001, duration=0.05),
    ]
    lat = measure_latency(events, commands)
    assert lat[0] == 0.0
    assert lat[1] == pytest.approx(0.001)


def test_measure_latency_rejects_empty():
    with pytest.raises(ValueError):
        measure_latency([], [])


def test_latency_budget_rates():
    assert check_latency_budget(1000.0).ok
    assert check_latency_budget(100.0).ok
    bad = check_latency_budget(50.0)
    assert not bad.ok
    assert bad.sampling_period == pytest.approx(0.020)
    assert "VIOLATES" in bad.describe()


def test_config_validation():
    with pytest.raises(ValueError):
        FeedbackConfig(burst_duration=0.0)
    with pytest.raises(ValueError):
        FeedbackConfig(focal_height=0.0)
