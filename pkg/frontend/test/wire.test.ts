import { describe, expect, it } from "vitest";

import {
  encodeOutbound,
  parseArena,
  parseInbound,
  type Outbound,
} from "../src/wire.js";

const goodState = {
  type: "state",
  t: 1.25,
  position: [0.9, 0.6],
  heading: 0.1,
  speed: 0.2,
  pi_value: 3.4,
  prediction_error_sq: 0.05,
  phase: "running",
};

describe("inbound parsing", () => {
  it("accepts a well-formed state update", () => {
    const msg = parseInbound(JSON.stringify(goodState));
    expect(msg).not.toBeNull();
    expect(msg!.type).toBe("state");
  });

  it("rejects junk, wrong shapes and off-protocol types", () => {
    expect(parseInbound("}{")).toBeNull();
    expect(parseInbound(JSON.stringify({ type: "state", t: -1 }))).toBeNull();
    expect(parseInbound(JSON.stringify({ type: "telemetry" }))).toBeNull();
    expect(
      parseInbound(JSON.stringify({ ...goodState, position: [1, 2, 3] })),
    ).toBeNull();
    expect(
      parseInbound(JSON.stringify({ ...goodState, phase: "launched" })),
    ).toBeNull();
  });

  it("round-trips event_ack, error and finished", () => {
    for (const m of [
      { type: "event_ack", event: "nudge", t: 2.0 },
      { type: "error", code: "bad_token", text: "unknown token", t: 0 },
      { type: "finished", t: 600, log_id: "ab12cd34ef56", fell: false },
    ]) {
      expect(parseInbound(JSON.stringify(m))).toEqual(m);
    }
  });

  it("rejects a finished message with a path-traversal log id", () => {
    const m = { type: "finished", t: 1, log_id: "../etc/passwd", fell: false };
    expect(parseInbound(JSON.stringify(m))).toBeNull();
  });
});

describe("outbound encoding", () => {
  it("all outbound messages validate against the schema", () => {
    const msgs: Outbound[] = [
      { type: "start", token: "tk1", seed: 3 },
      { type: "pause" },
      { type: "resume" },
      { type: "nudge", impulse: [0.5, 0] },
      {
        type: "hand_wall",
        segment: [
          [0.7, 0],
          [1.1, 0],
        ],
        duration_s: 0.4,
      },
    ];
    for (const m of msgs) {
      expect(JSON.parse(encodeOutbound(m))).toEqual(m);
    }
  });

  it("refuses a start without token or condition", () => {
    expect(() =>
      encodeOutbound({ type: "start", seed: 1 } as Outbound),
    ).toThrow();
  });
});

describe("arena schema", () => {
  it("rejects unknown zone kinds", () => {
    expect(() =>
      parseArena({
        width: 1,
        depth: 1,
        open_edge: "bottom",
        zones: [{ kind: "lava", polygon: [[0, 0], [1, 0], [1, 1]] }],
        hill: { center: [0.5, 0.5], radius: 0.1, height: 0.03 },
        pit: { center: [0.2, 0.2], radius: 0.1, depth: 0.03 },
        friction: { wood: 1 },
      }),
    ).toThrow();
  });
});
