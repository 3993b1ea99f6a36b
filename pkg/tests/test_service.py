import json
import os
import signal
import socket
import subprocess
import sys
import time

import numpy as np
import pytest

from airbutton.controller import Condition, FeedbackConfig
from airbutton.geometry import default_scene
from airbutton.sensing import EventKind
from airbutton.service import Pipeline, hello_message, replay, scene_heatmap


def _config():
    return FeedbackConfig(condition=Condition.BOTH, burst_duration=0.05, focal_height=3e-3)


def test_pipeline_frames_are_gap_free():
    frames = replay(default_scene(), _config(), input_log=[], ticks=100, tick_hz=250.0)
    times = [f.time for f in frames]
    assert times == [k / 250.0 for k in range(100)]
    assert all(b > a for a, b in zip(times, times[1:]))


def test_replay_reproduces_identical_sequence():
    log = [(0.1, 0.01), (0.4, 0.0), (0.8, 0.012)]
    a = replay(default_scene(), _config(), log, ticks=300, tick_hz=250.0)
    b = replay(default_scene(), _config(), log, ticks=300, tick_hz=250.0)
    assert a == b


def test_replay_scripted_press_produces_edges():
    # start lifted, dip through the beam, lift again
    log = [(0.0, 0.012), (0.2, 0.0), (0.5, 0.012)]
    frames = replay(default_scene(), _config(), log, ticks=250, tick_hz=250.0)
    edges = [f.last_event for f in frames if f.last_event is not None]
    kinds = [e.kind for e in edges]
    assert kinds == [EventKind.DOWN, EventKind.UP]
    down_frame = next(f for f in frames if f.last_event and f.last_event.kind is EventKind.DOWN)
    assert down_frame.active_burst_remaining == pytest.approx(0.05)
    assert down_frame.detector_region == "below"


def test_pipeline_clamps_input_height():
    pipe = Pipeline(default_scene(), _config(), tick_hz=100.0)
    frame = pipe.step(-0.01)
    assert frame.finger_height == 0.0
    frame = pipe.step(1.0)
    assert frame.finger_height == pytest.approx(0.020)


def test_frames_carry_thresholds():
    frames = replay(default_scene(), _config(), [], ticks=3, tick_hz=100.0)
    for f in frames:
        assert f.t_press == 2.0
        assert f.t_release == 3.0
        msg = f.to_message()
        assert msg["type"] == "frame"
        assert msg["t_press_v"] == 2.0
        assert msg["t_release_v"] == 3.0


def test_scene_heatmap_shape_and_normalization():
    hm = scene_heatmap(default_scene(), _config(), half_extent=0.01, height=0.005, spacing=1e-3)
    assert hm["nx"] == 21 and hm["nz"] == 6
    values = np.array(hm["values"])
    assert values.shape == (21 * 6,)
    assert values.max() == pytest.approx(1.0, abs=1e-3)
    assert values.min() >= 0.0


def test_hello_message_fields():
    msg = hello_message(default_scene(), _config(), 250.0, heatmap=None)
    assert msg["type"] == "hello"
    assert msg["t_press_v"] == 2.0
    assert msg["t_release_v"] == 3.0
    assert msg["burst_duration_s"] == 0.05
    assert msg["condition"] == "both"


def _free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


@pytest.fixture()
def live_server():
    port = _free_port()
    proc = subprocess.Popen(
        [sys.executable, "-m", "airbutton.cli", "serve", "--port", str(port), "--tick-hz", "100"],
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
    )
    try:
        deadline = time.time() + 15
        while time.time() < deadline:
            try:
                with socket.create_connection(("127.0.0.1", port), timeout=0.2):
                    break
            except OSError:
                if proc.poll() is not None:
                    raise RuntimeError(proc.stdout.read().decode())
                time.sleep(0.1)
        else:
            raise RuntimeError("server did not come up")
        yield port
    finally:
        proc.send_signal(signal.SIGTERM)
        try:
            proc.wait(timeout=10)
        except subprocess.TimeoutExpired:
            proc.kill()


def test_live_server_end_to_end(live_server):
    from websockets.sync.client import connect

    port = live_server
    with connect(f"ws://127.0.0.1:{port}", open_timeout=10) as ws:
        hello = json.loads(ws.recv(timeout=10))
        assert hello["type"] == "hello"
        assert hello["t_press_v"] == 2.0
        assert hello["heatmap"]["nx"] > 0

        # no input yet: constant-height frames, no events
        quiet = [json.loads(ws.recv(timeout=10)) for _ in range(10)]
        assert all(f["type"] == "frame" for f in quiet)
        assert all(f["finger_height_m"] == 0.0 for f in quiet)
        assert all(f["last_event"] is None for f in quiet)

        # lift the finger out of the beam -> Up edge
        ws.send(json.dumps({"type": "input", "finger_height_m": 0.012, "client_time": 0.0}))
        up_seen = None
        for _ in range(200):
            frame = json.loads(ws.recv(timeout=10))
            if frame["last_event"] is not None:
                up_seen = frame
                break
        assert up_seen is not None
        assert up_seen["last_event"]["kind"] == "up"
        assert up_seen["active_burst_remaining_s"] == pytest.approx(0.05)

        # wait out the release burst, then drop through the beam -> Down edge
        for _ in range(200):
            frame = json.loads(ws.recv(timeout=10))
            if frame["active_burst_remaining_s"] is None:
                break
        ws.send(json.dumps({"type": "input", "finger_height_m": 0.0, "client_time": 1.0}))
        down_seen = None
        for _ in range(200):
            frame = json.loads(ws.recv(timeout=10))
            if frame["last_event"] is not None and frame["last_event"]["kind"] == "down":
                down_seen = frame
                break
        assert down_seen is not None
        assert down_seen["active_burst_remaining_s"] == pytest.approx(0.05)


def test_two_clients_receive_identical_frames(live_server):
    from websockets.sync.client import connect

    port = live_server
    with connect(f"ws://127.0.0.1:{port}", open_timeout=10) as a, connect(
        f"ws://127.0.0.1:{port}", open_timeout=10
    ) as b:
        ha = json.loads(a.recv(timeout=10))
        hb = json.loads(b.recv(timeout=10))
        assert ha == hb
        frames_a = {}
        frames_b = {}
        for _ in range(40):
            fa = json.loads(a.recv(timeout=10))
            fb = json.loads(b.recv(timeout=10))
            frames_a[fa["time"]] = fa
            frames_b[fb["time"]] = fb
        shared = set(frames_a) & set(frames_b)
        assert len(shared) >= 20
        for t in shared:
            assert frames_a[t] == frames_b[t]


def test_serve_port_in_use_errors():
    from airbutton import cli

    with socket.socket() as blocker:
        blocker.bind(("127.0.0.1", 0))
        port = blocker.getsockname()[1]
        blocker.listen(1)
        rc = cli.main(["serve", "--port", str(port)])
        assert rc != 0


def test_recorded_log_replays_to_identical_frames(tmp_path):
    """Live frames and an offline replay of the recorded input log must match."""
    from airbutton.service import load_input_log, replay
    from websockets.sync.client import connect

    record = tmp_path / "inputs.json"
    port = _free_port()
    proc = subprocess.Popen(
        [sys.executable, "-m", "airbutton.cli", "serve", "--port", str(port),
         "--tick-hz", "100", "--record", str(record)],
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
    )
    live_frames = {}
    try:
        deadline = time.time() + 15
        while time.time() < deadline:
            try:
                with socket.create_connection(("127.0.0.1", port), timeout=0.2):
                    break
            except OSError:
                time.sleep(0.1)
        with connect(f"ws://127.0.0.1:{port}", open_timeout=10) as ws:
            ws.recv(timeout=10)  # hello
            ws.send(json.dumps({"type": "input", "finger_height_m": 0.012, "client_time": 0.0}))
            for _ in range(60):
                f = json.loads(ws.recv(timeout=10))
                live_frames[f["time"]] = f
            ws.send(json.dumps({"type": "input", "finger_height_m": 0.0, "client_time": 1.0}))
            for _ in range(60):
                f = json.loads(ws.recv(timeout=10))
                live_frames[f["time"]] = f
    finally:
        proc.send_signal(signal.SIGTERM)
        proc.wait(timeout=10)

    log = load_input_log(str(record))
    assert log, "server recorded no ticks"
    ticks = len(log)
    replayed = {f.time: f.to_message() for f in replay(default_scene(), _config(), log, ticks, tick_hz=100.0)}
    overlap = set(live_frames) & set(replayed)
    assert len(overlap) >= 100
    for t in overlap:
        assert json.loads(json.dumps(replayed[t])) == live_frames[t]
