import { describe, expect, it } from "vitest";

import {
  applyInbound,
  countdownS,
  initialPanel,
  requestPause,
  requestResume,
  requestStart,
} from "../src/panel.js";
import type { Inbound } from "../src/wire.js";

function stateMsg(t: number, phase: "running" | "paused" = "running"): Inbound {
  return {
    type: "state",
    t,
    position: [0.9, 0.6],
    heading: 0,
    speed: 0.1,
    pi_value: 2,
    prediction_error_sq: 0.1,
    phase,
  };
}

const startAck: Inbound = {
  type: "event_ack",
  event: "start",
  t: 0,
  session_id: "abc123def456",
  duration_s: 600,
};

describe("session flow", () => {
  it("start with a blind token sends a schema-valid start and nothing leaks", () => {
    const { state, send } = requestStart(initialPanel(), { token: "tk42" }, 7);
    expect(send).toEqual({ type: "start", token: "tk42", seed: 7 });
    const running = applyInbound(state, startAck);
    expect(running.phase).toBe("running");
    expect(running.durationS).toBe(600);
    const blob = JSON.stringify(running);
    expect(blob).not.toContain("REA");
    expect(blob).not.toContain("ADA");
  });

  it("refuses start without a token and while running, with hints", () => {
    const empty = requestStart(initialPanel(), {}, 0);
    expect(empty.send).toBeNull();
    expect(empty.state.hint).toMatch(/token/);
    const running = applyInbound(initialPanel(), startAck);
    const again = requestStart(running, { token: "tk" }, 0);
    expect(again.send).toBeNull();
    expect(again.state.hint).toMatch(/already running/);
  });

  it("counts down from the session duration as simulated time advances", () => {
    let p = applyInbound(initialPanel(), startAck);
    expect(countdownS(p)).toBe(600);
    p = applyInbound(p, stateMsg(42.5));
    expect(countdownS(p)).toBeCloseTo(557.5, 9);
  });

  it("pause freezes the countdown until resume", () => {
    let p = applyInbound(initialPanel(), startAck);
    p = applyInbound(p, stateMsg(10));
    const pause = requestPause(p);
    expect(pause.send).toEqual({ type: "pause" });
    p = applyInbound(p, { type: "event_ack", event: "pause", t: 10 });
    expect(p.phase).toBe("paused");
    const before = countdownS(p);
    // paused: no state updates arrive, the countdown holds
    expect(countdownS(p)).toBe(before);
    const resume = requestResume(p);
    expect(resume.send).toEqual({ type: "resume" });
    p = applyInbound(p, { type: "event_ack", event: "resume", t: 10 });
    p = applyInbound(p, stateMsg(11));
    expect(countdownS(p)).toBeCloseTo(before - 1, 9);
  });

  it("pause is a no-op unless running, resume unless paused", () => {
    expect(requestPause(initialPanel()).send).toBeNull();
    expect(requestResume(initialPanel()).send).toBeNull();
  });

  it("finished state exposes the download path and a zero countdown", () => {
    let p = applyInbound(initialPanel(), startAck);
    p = applyInbound(p, stateMsg(600));
    p = applyInbound(p, { type: "finished", t: 600, log_id: "abc123def456", fell: false });
    expect(p.phase).toBe("finished");
    expect(p.downloadPath).toBe("/logs/abc123def456");
    expect(countdownS(p)).toBe(0);
  });

  it("errors surface as hints without killing the session state", () => {
    let p = applyInbound(initialPanel(), startAck);
    p = applyInbound(p, { type: "error", code: "bad_message", text: "bad nudge", t: 1 });
    expect(p.hint).toBe("bad nudge");
    expect(p.phase).toBe("running");
  });

  it("caps the diagnostic series to a bounded window", () => {
    let p = applyInbound(initialPanel(), startAck);
    for (let i = 0; i < 1500; i++) p = applyInbound(p, stateMsg(i * 0.05));
    expect(p.series.length).toBe(1200);
    expect(p.series[p.series.length - 1].t).toBeCloseTo(1499 * 0.05, 9);
  });
});
