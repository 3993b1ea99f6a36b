// Wire types for the pipeline service (JSON text frames over a websocket).

export interface EdgeEvent {
  kind: "down" | "up";
  time: number;
  voltage: number;
}

export interface FrameMsg {
  type: "frame";
  time: number;
  finger_height_m: number;
  voltage_v: number;
  detector_region: "above" | "below";
  active_burst_remaining_s: number | null;
  last_event: EdgeEvent | null;
  t_press_v: number;
  t_release_v: number;
}

export interface HeatmapData {
  x_min_m: number;
  x_max_m: number;
  z_min_m: number;
  z_max_m: number;
  nx: number;
  nz: number;
  values: number[];
}

export interface HelloMsg {
  type: "hello";
  tick_hz: number;
  t_press_v: number;
  t_release_v: number;
  beam_height_m: number;
  burst_duration_s: number;
  condition: string;
  max_height_m: number;
  heatmap: HeatmapData | null;
}

export type ServerMsg = HelloMsg | FrameMsg;

export interface InputMsg {
  type: "input";
  finger_height_m: number;
  client_time: number;
}

export function parseServerMsg(raw: string): ServerMsg | null {
  try {
    const msg = JSON.parse(raw);
    if (msg && (msg.type === "hello" || msg.type === "frame")) return msg as ServerMsg;
  } catch {
    // fall through: not a message we understand
  }
  return null;
}
