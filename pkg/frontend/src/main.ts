// Operator console: drag the virtual finger, watch the pipeline respond live.

import { connect, InputThrottle, type Status } from "./client";
import {
  applyFrame,
  applyHello,
  initialViewState,
  nudgeHeight,
  setControlHeight,
  type ConsoleViewState,
} from "./console";
import { heatmapRGBA } from "./heatmap";
import type { HeatmapData, ServerMsg } from "./protocol";

const params = new URLSearchParams(location.search);
const port = params.get("port") ?? "8765";
const url = `ws://${location.hostname || "127.0.0.1"}:${port}`;

const traceCanvas = document.getElementById("trace") as HTMLCanvasElement;
const heatCanvas = document.getElementById("heatmap") as HTMLCanvasElement;
const dragArea = document.getElementById("finger") as HTMLDivElement;
const fingerDot = document.getElementById("finger-dot") as HTMLDivElement;
const burstBar = document.getElementById("burst-bar") as HTMLDivElement;
const statusEl = document.getElementById("status") as HTMLSpanElement;
const readoutEl = document.getElementById("readout") as HTMLSpanElement;

let state: ConsoleViewState = initialViewState();
let tickInterval = 1 / 250;
let heatmap: HeatmapData | null = null;
const throttle = () => new InputThrottle(tickInterval);
let inputThrottle = throttle();

const client = connect(url, {
  onMessage(msg: ServerMsg) {
    if (msg.type === "hello") {
      state = applyHello(state, msg);
      tickInterval = 1 / msg.tick_hz;
      inputThrottle = throttle();
      heatmap = msg.heatmap;
      if (heatmap) drawHeatmap(heatmap);
    } else {
      state = applyFrame(state, msg);
    }
  },
  onStatus(status: Status) {
    statusEl.textContent = status;
    statusEl.className = status;
  },
});

function drawHeatmap(hm: HeatmapData) {
  heatCanvas.width = hm.nx;
  heatCanvas.height = hm.nz;
  const ctx = heatCanvas.getContext("2d")!;
  const rgba = heatmapRGBA(hm.values, hm.nx, hm.nz);
  ctx.putImageData(new ImageData(rgba, hm.nx, hm.nz), 0, 0);
}

// --- finger drag control (vertical strip mimics the physical gesture) ---

function heightFromPointer(ev: PointerEvent): number {
  const rect = dragArea.getBoundingClientRect();
  const fromBottom = rect.bottom - ev.clientY;
  return (fromBottom / rect.height) * state.maxHeight;
}

let dragging = false;
dragArea.addEventListener("pointerdown", (ev) => {
  dragging = true;
  dragArea.setPointerCapture(ev.pointerId);
  state = setControlHeight(state, heightFromPointer(ev));
});
dragArea.addEventListener("pointermove", (ev) => {
  if (dragging) state = setControlHeight(state, heightFromPointer(ev));
});
dragArea.addEventListener("pointerup", () => {
  dragging = false;
});
window.addEventListener("keydown", (ev) => {
  if (ev.key === "ArrowUp") state = nudgeHeight(state, +1);
  if (ev.key === "ArrowDown") state = nudgeHeight(state, -1);
});

// --- render loop; input sends are throttled to the service tick rate ---

function drawTrace() {
  const ctx = traceCanvas.getContext("2d")!;
  const w = traceCanvas.width;
  const h = traceCanvas.height;
  ctx.fillStyle = "#10141a";
  ctx.fillRect(0, 0, w, h);
  const vMax = 5.5;
  const yOf = (v: number) => h - (v / vMax) * h;
  const t1 = state.lastFrameTime;
  const t0 = t1 - state.traceWindowS;
  const xOf = (t: number) => ((t - t0) / state.traceWindowS) * w;

  for (const [threshold, color] of [
    [state.tPress, "#e05555"],
    [state.tRelease, "#55c065"],
  ] as const) {
    if (threshold === null) continue;
    ctx.strokeStyle = color;
    ctx.setLineDash([6, 4]);
    ctx.beginPath();
    ctx.moveTo(0, yOf(threshold));
    ctx.lineTo(w, yOf(threshold));
    ctx.stroke();
    ctx.setLineDash([]);
  }

  ctx.strokeStyle = "#7fc4ff";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  state.trace.forEach((p, i) => {
    if (i === 0) ctx.moveTo(xOf(p.time), yOf(p.voltage));
    else ctx.lineTo(xOf(p.time), yOf(p.voltage));
  });
  ctx.stroke();

  ctx.font = "12px monospace";
  for (const m of state.markers) {
    const age = t1 - m.time;
    const flash = Math.max(0, 1 - age / 1.5);
    ctx.fillStyle = m.kind === "down" ? `rgba(255,110,110,${0.4 + 0.6 * flash})` : `rgba(110,230,140,${0.4 + 0.6 * flash})`;
    ctx.beginPath();
    ctx.arc(xOf(m.time), yOf(m.voltage), 4 + 6 * flash, 0, 2 * Math.PI);
    ctx.fill();
    ctx.fillText(m.kind.toUpperCase(), xOf(m.time) + 6, yOf(m.voltage) - 6);
  }
}

function render(nowMs: number) {
  const send = inputThrottle.update(nowMs / 1000, state.controlHeight);
  if (send !== null) client.send(send, nowMs / 1000);

  drawTrace();

  const frac = state.controlHeight / state.maxHeight;
  fingerDot.style.bottom = `${frac * 100}%`;
  burstBar.style.width = state.burst ? `${state.burst.fraction * 100}%` : "0%";
  readoutEl.textContent =
    `h=${(state.controlHeight * 1e3).toFixed(1)} mm  ` +
    `v=${state.voltage.toFixed(2)} V  ` +
    `region=${state.region ?? "-"}  ` +
    `events=${state.totalMarkers}`;
  requestAnimationFrame(render);
}
requestAnimationFrame(render);
