// Websocket client with auto-reconnect and a frame-rate input throttle.

import type { InputMsg, ServerMsg } from "./protocol";
import { parseServerMsg } from "./protocol";

export type Status = "connecting" | "connected" | "disconnected";

export interface ClientHandlers {
  onMessage: (msg: ServerMsg) => void;
  onStatus: (status: Status) => void;
}

export function connect(url: string, handlers: ClientHandlers) {
  let ws: WebSocket | null = null;
  let closed = false;

  const open = () => {
    if (closed) return;
    handlers.onStatus("connecting");
    ws = new WebSocket(url);
    ws.onopen = () => handlers.onStatus("connected");
    ws.onmessage = (ev) => {
      const msg = parseServerMsg(String(ev.data));
      if (msg) handlers.onMessage(msg);
    };
    ws.onclose = () => {
      handlers.onStatus("disconnected");
      if (!closed) setTimeout(open, 1000);
    };
    ws.onerror = () => ws?.close();
  };
  open();

  return {
    send(height: number, clientTime: number) {
      if (ws && ws.readyState === WebSocket.OPEN) {
        const msg: InputMsg = { type: "input", finger_height_m: height, client_time: clientTime };
        ws.send(JSON.stringify(msg));
      }
    },
    close() {
      closed = true;
      ws?.close();
    },
  };
}

/**
 * Rate limiter for finger input: at most one send per frame interval, always
 * forwarding the latest value once the interval has elapsed.
 */
export class InputThrottle {
  private lastSent = -Infinity;
  private lastValue: number | null = null;

  constructor(private intervalS: number) {}

  /** Returns the height to send now, or null to hold. */
  update(now: number, height: number): number | null {
    if (height === this.lastValue) return null;
    if (now - this.lastSent < this.intervalS) return null;
    this.lastSent = now;
    this.lastValue = height;
    return height;
  }
}
