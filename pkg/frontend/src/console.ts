// Pure view-state logic: frames in, renderable console state out.
// Thresholds always come from the served messages, never from local constants.

import type { FrameMsg, HelloMsg } from "./protocol";

export interface TracePoint {
  time: number;
  voltage: number;
}

export interface EventMarker {
  kind: "down" | "up";
  time: number;
  voltage: number;
}

export interface BurstIndicator {
  remaining: number;
  duration: number;
  fraction: number; // remaining / configured duration, clamped to [0, 1]
}

export interface ConsoleViewState {
  controlHeight: number; // meters commanded by the user
  maxHeight: number;
  trace: TracePoint[]; // strictly time-ordered rolling window
  traceWindowS: number;
  tPress: number | null;
  tRelease: number | null;
  markers: EventMarker[]; // windowed for display
  totalMarkers: number; // exactly one per served edge, never pruned
  burst: BurstIndicator | null;
  burstDuration: number | null;
  lastFrameTime: number;
  droppedFrames: number;
  fingerHeight: number; // latest served height
  voltage: number;
  region: "above" | "below" | null;
}

export const TRACE_WINDOW_S = 5;
export const NUDGE_M = 0.0005;
export const DEFAULT_MAX_HEIGHT_M = 0.02;

export function initialViewState(): ConsoleViewState {
  return {
    controlHeight: 0,
    maxHeight: DEFAULT_MAX_HEIGHT_M,
    trace: [],
    traceWindowS: TRACE_WINDOW_S,
    tPress: null,
    tRelease: null,
    markers: [],
    totalMarkers: 0,
    burst: null,
    burstDuration: null,
    lastFrameTime: -Infinity,
    droppedFrames: 0,
    fingerHeight: 0,
    voltage: 0,
    region: null,
  };
}

export function applyHello(state: ConsoleViewState, hello: HelloMsg): ConsoleViewState {
  return {
    ...state,
    tPress: hello.t_press_v,
    tRelease: hello.t_release_v,
    burstDuration: hello.burst_duration_s,
    maxHeight: hello.max_height_m,
  };
}

export function clampHeight(height: number, max: number = DEFAULT_MAX_HEIGHT_M): number {
  return Math.min(Math.max(height, 0), max);
}

export function nudgeHeight(state: ConsoleViewState, steps: number): ConsoleViewState {
  return {
    ...state,
    controlHeight: clampHeight(state.controlHeight + steps * NUDGE_M, state.maxHeight),
  };
}

export function setControlHeight(state: ConsoleViewState, height: number): ConsoleViewState {
  return { ...state, controlHeight: clampHeight(height, state.maxHeight) };
}

export type WarnFn = (message: string) => void;

export function applyFrame(
  state: ConsoleViewState,
  frame: FrameMsg,
  warn: WarnFn = (m) => console.warn(m),
): ConsoleViewState {
  if (frame.time <= state.lastFrameTime) {
    warn(`dropping out-of-order frame at t=${frame.time} (last ${state.lastFrameTime})`);
    return { ...state, droppedFrames: state.droppedFrames + 1 };
  }
  const cutoff = frame.time - state.traceWindowS;
  const trace = state.trace.filter((p) => p.time >= cutoff);
  trace.push({ time: frame.time, voltage: frame.voltage_v });

  let markers = state.markers.filter((m) => m.time >= cutoff);
  let totalMarkers = state.totalMarkers;
  if (frame.last_event !== null) {
    markers = [...markers, { ...frame.last_event }];
    totalMarkers += 1;
  }

  let burst: BurstIndicator | null = null;
  if (frame.active_burst_remaining_s !== null) {
    const duration = state.burstDuration ?? frame.active_burst_remaining_s;
    burst = {
      remaining: frame.active_burst_remaining_s,
      duration,
      fraction: duration > 0 ? Math.min(Math.max(frame.active_burst_remaining_s / duration, 0), 1) : 0,
    };
  }

  return {
    ...state,
    trace,
    markers,
    totalMarkers,
    burst,
    tPress: frame.t_press_v,
    tRelease: frame.t_release_v,
    lastFrameTime: frame.time,
    fingerHeight: frame.finger_height_m,
    voltage: frame.voltage_v,
    region: frame.detector_region,
  };
}
