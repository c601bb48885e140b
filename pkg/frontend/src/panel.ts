/**
 * Session panel state machine, DOM-free so the protocol logic is testable.
 * Holds the operator-visible state: phase, countdown, hints, the download
 * link once a session finishes. The condition is never part of this state;
 * in blind mode the operator only ever handles an opaque token.
 */
import type { Inbound, Outbound } from "./wire.js";

export interface PanelState {
  phase: "idle" | "running" | "paused" | "finished";
  sessionId: string | null;
  durationS: number;
  /** simulated seconds elapsed; the countdown shows durationS - elapsedT */
  elapsedT: number;
  downloadPath: string | null;
  hint: string | null;
  series: { t: number; pi: number; pe: number }[];
}

export function initialPanel(): PanelState {
  return {
    phase: "idle",
    sessionId: null,
    durationS: 600,
    elapsedT: 0,
    downloadPath: null,
    hint: null,
    series: [],
  };
}

export function countdownS(p: PanelState): number {
  return Math.max(0, p.durationS - p.elapsedT);
}

/** Operator pressed start with a token (blind) or a condition (unblinded). */
export function requestStart(
  p: PanelState,
  entry: { token?: string; condition?: string },
  seed: number,
): { state: PanelState; send: Outbound | null } {
  if (p.phase === "running" || p.phase === "paused") {
    return { state: { ...p, hint: "a session is already running" }, send: null };
  }
  if (!entry.token && !entry.condition) {
    return { state: { ...p, hint: "enter a session token" }, send: null };
  }
  return {
    state: { ...initialPanel(), hint: null },
    send: { type: "start", ...entry, seed },
  };
}

export function requestPause(p: PanelState): { state: PanelState; send: Outbound | null } {
  if (p.phase !== "running") {
    return { state: { ...p, hint: "nothing to pause" }, send: null };
  }
  return { state: p, send: { type: "pause" } };
}

export function requestResume(p: PanelState): { state: PanelState; send: Outbound | null } {
  if (p.phase !== "paused") {
    return { state: { ...p, hint: "nothing to resume" }, send: null };
  }
  return { state: p, send: { type: "resume" } };
}

const MAX_SERIES = 1200; // one minute of 20 Hz diagnostics

/** Fold one validated inbound message into the panel state. */
export function applyInbound(p: PanelState, msg: Inbound): PanelState {
  switch (msg.type) {
    case "state": {
      const series = p.series.length >= MAX_SERIES ? p.series.slice(1) : p.series.slice();
      series.push({ t: msg.t, pi: msg.pi_value, pe: msg.prediction_error_sq });
      return {
        ...p,
        phase: msg.phase === "idle" ? p.phase : msg.phase,
        elapsedT: msg.t,
        series,
      };
    }
    case "event_ack":
      if (msg.event === "start") {
        return {
          ...p,
          phase: "running",
          sessionId: msg.session_id ?? null,
          durationS: msg.duration_s ?? p.durationS,
          hint: null,
        };
      }
      if (msg.event === "pause") return { ...p, phase: "paused" };
      if (msg.event === "resume") return { ...p, phase: "running" };
      return p;
    case "error":
      return { ...p, hint: msg.text };
    case "finished":
      return {
        ...p,
        phase: "finished",
        elapsedT: msg.t,
        downloadPath: `/logs/${msg.log_id}`,
      };
  }
}
