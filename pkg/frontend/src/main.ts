/**
 * Browser entry point: wires the WebSocket, the canvas view and the
 * session panel together. The UI never originates state; the robot pose
 * on screen is exactly the last StateUpdate (latest-value buffer, rendered
 * on the animation frame clock, decoupled from message arrival).
 */
import {
  dragToNudge,
  holdToHandWall,
  renewalDueS,
} from "./interact.js";
import {
  applyInbound,
  countdownS,
  initialPanel,
  requestPause,
  requestResume,
  requestStart,
  type PanelState,
} from "./panel.js";
import {
  drawFrame,
  fitTransform,
  isStale,
  layoutArena,
  robotOps,
} from "./view.js";
import {
  encodeOutbound,
  parseArena,
  parseInbound,
  type Arena,
  type Outbound,
  type StateUpdate,
} from "./wire.js";

const canvas = document.getElementById("arena") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const tokenInput = document.getElementById("token") as HTMLInputElement;
const startBtn = document.getElementById("start") as HTMLButtonElement;
const pauseBtn = document.getElementById("pause") as HTMLButtonElement;
const resumeBtn = document.getElementById("resume") as HTMLButtonElement;
const toolSelect = document.getElementById("tool") as HTMLSelectElement;
const countdownEl = document.getElementById("countdown")!;
const hintEl = document.getElementById("hint")!;
const bannerEl = document.getElementById("banner")!;
const downloadEl = document.getElementById("download") as HTMLAnchorElement;
const diagEl = document.getElementById("diag")!;

let panel: PanelState = initialPanel();
let arena: Arena | null = null;
let lastState: StateUpdate | null = null; // latest-value buffer
let lastStateAtMs = 0;

const ws = new WebSocket(`ws://${location.host}/ws`);

function send(msg: Outbound): void {
  if (ws.readyState === WebSocket.OPEN) ws.send(encodeOutbound(msg));
}

ws.onmessage = (ev) => {
  const msg = parseInbound(String(ev.data));
  if (msg === null) return;
  if (msg.type === "state") {
    lastState = msg;
    lastStateAtMs = performance.now();
  }
  panel = applyInbound(panel, msg);
};

fetch("/arena")
  .then((r) => r.json())
  .then((raw) => {
    arena = parseArena(raw);
  });

startBtn.onclick = () => {
  const out = requestStart(panel, { token: tokenInput.value.trim() }, Date.now() % 100000);
  panel = out.state;
  if (out.send) send(out.send);
};
pauseBtn.onclick = () => {
  const out = requestPause(panel);
  panel = out.state;
  if (out.send) send(out.send);
};
resumeBtn.onclick = () => {
  const out = requestResume(panel);
  panel = out.state;
  if (out.send) send(out.send);
};

// gestures: drag anywhere = nudge; press-and-hold near the open edge = wall
let dragStart: [number, number] | null = null;
let holdTimer: number | null = null;
let lastWallT = -1;

function canvasToWorld(px: number, py: number): [number, number] {
  const t = fitTransform(arena!, canvas.width, canvas.height);
  return [(px - t.padX) / t.scale, t.depth - (py - t.padY) / t.scale];
}

canvas.onpointerdown = (ev) => {
  if (!arena || panel.phase !== "running") {
    if (panel.phase === "paused") hintEl.textContent = "session paused";
    return;
  }
  dragStart = [ev.offsetX, ev.offsetY];
  if (toolSelect.value === "hand-wall") {
    const renew = () => {
      if (dragStart === null || !arena || lastState === null) return;
      if (renewalDueS(lastWallT, lastState.t)) {
        const [wx, wy] = canvasToWorld(dragStart[0], dragStart[1]);
        send(holdToHandWall(arena, wx, wy));
        lastWallT = lastState.t;
      }
      holdTimer = window.setTimeout(renew, 100);
    };
    renew();
  }
};

canvas.onpointerup = (ev) => {
  if (holdTimer !== null) {
    clearTimeout(holdTimer);
    holdTimer = null;
  }
  if (dragStart === null || panel.phase !== "running") return;
  if (toolSelect.value === "nudge") {
    const dx = ev.offsetX - dragStart[0];
    const dy = ev.offsetY - dragStart[1];
    if (Math.hypot(dx, dy) > 3) send(dragToNudge(dx, dy));
  }
  dragStart = null;
};

function renderLoop(): void {
  if (arena) {
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    const ops = layoutArena(arena, canvas.width, canvas.height);
    if (lastState) ops.push(...robotOps(arena, lastState, canvas.width, canvas.height));
    drawFrame(ctx, ops);
  }
  // render loop runs every frame, so the banner shows well inside 1.5 s
  const stalled =
    panel.phase === "running" && lastStateAtMs > 0 && isStale(lastStateAtMs, performance.now());
  bannerEl.style.display = stalled ? "block" : "none";
  countdownEl.textContent = `${countdownS(panel).toFixed(0)} s`;
  hintEl.textContent = panel.hint ?? "";
  if (panel.downloadPath) {
    downloadEl.href = panel.downloadPath;
    downloadEl.style.display = "inline";
  }
  const last = panel.series[panel.series.length - 1];
  if (last) {
    diagEl.textContent = `PI ${last.pi.toFixed(2)}   pred err ${last.pe.toFixed(3)}`;
  }
  requestAnimationFrame(renderLoop);
}

requestAnimationFrame(renderLoop);
