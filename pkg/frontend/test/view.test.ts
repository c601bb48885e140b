import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import {
  STALE_AFTER_MS,
  ZONE_COLORS,
  fitTransform,
  isStale,
  layoutArena,
  robotOps,
  worldToCanvas,
  type CircleOp,
  type LineOp,
  type PolygonOp,
} from "../src/view.js";
import { parseArena, type StateUpdate } from "../src/wire.js";

import arenaRaw from "../../src/pisphere/data/arena.json";

const arena = parseArena(arenaRaw);
const W = 720;
const H = 500;

function state(partial: Partial<StateUpdate>): StateUpdate {
  return {
    type: "state",
    t: 1,
    position: [arena.width / 2, arena.depth / 2],
    heading: 0,
    speed: 0.1,
    pi_value: 1,
    prediction_error_sq: 0.1,
    phase: "running",
    ...partial,
  };
}

describe("coordinate mapping", () => {
  it("keeps the aspect ratio and centers the arena", () => {
    const t = fitTransform(arena, W, H);
    expect(t.scale * arena.width + 2 * t.padX).toBeCloseTo(W, 9);
    expect(t.scale * arena.depth + 2 * t.padY).toBeCloseTo(H, 9);
  });

  it("flips y: the open bottom edge lands at the bottom of the canvas", () => {
    const t = fitTransform(arena, W, H);
    const [, yTop] = worldToCanvas(t, [0, arena.depth]);
    const [, yBottom] = worldToCanvas(t, [0, 0]);
    expect(yBottom).toBeGreaterThan(yTop);
    expect(yBottom).toBeCloseTo(H - t.padY, 9);
  });
});

describe("golden render layout", () => {
  const ops = layoutArena(arena, W, H);

  it("matches the checked-in golden layout exactly", () => {
    const golden = JSON.parse(
      readFileSync(new URL("./golden_layout.json", import.meta.url), "utf8"),
    );
    expect(ops).toEqual(golden);
  });

  it("paints white paper, black foam and beige wood", () => {
    expect(ZONE_COLORS.paper).toBe("#ffffff");
    expect(ZONE_COLORS.foam).toBe("#000000");
    expect(ZONE_COLORS.wood.toLowerCase()).toMatch(/^#e/); // beige family
    const polys = ops.filter((o): o is PolygonOp => o.op === "polygon");
    expect(polys.map((p) => p.kind)).toEqual(arena.zones.map((z) => z.kind));
    for (const p of polys) expect(p.color).toBe(ZONE_COLORS[p.kind]);
  });

  it("shades the hill and pit inside the foam zone", () => {
    const t = fitTransform(arena, W, H);
    const foam = arena.zones.find((z) => z.kind === "foam")!;
    const xs = foam.polygon.map((p) => p[0]);
    for (const kind of ["hill", "pit"] as const) {
      const c = ops.find((o): o is CircleOp => o.op === "circle" && o.kind === kind)!;
      expect(c.center).toEqual(worldToCanvas(t, arena[kind].center as [number, number]));
      expect(c.radius).toBeCloseTo(arena[kind].radius * t.scale, 9);
      const worldX = (c.center[0] - t.padX) / t.scale;
      expect(worldX).toBeGreaterThan(Math.min(...xs));
      expect(worldX).toBeLessThan(Math.max(...xs));
    }
  });

  it("highlights the open bottom edge along the full width", () => {
    const t = fitTransform(arena, W, H);
    const edge = ops.find((o): o is LineOp => o.op === "line" && o.kind === "open-edge")!;
    expect(edge.from).toEqual(worldToCanvas(t, [0, 0]));
    expect(edge.to).toEqual(worldToCanvas(t, [arena.width, 0]));
  });
});

describe("robot marker", () => {
  it("center of the arena heading east -> canvas center, tick pointing right", () => {
    const ops = robotOps(arena, state({}), W, H);
    const disc = ops.find((o): o is CircleOp => o.op === "circle")!;
    const tick = ops.find((o): o is LineOp => o.op === "line")!;
    expect(disc.center[0]).toBeCloseTo(W / 2, 6);
    expect(disc.center[1]).toBeCloseTo(H / 2, 6);
    expect(tick.to[0]).toBeGreaterThan(tick.from[0]); // east = canvas +x
    expect(tick.to[1]).toBeCloseTo(tick.from[1], 6);
  });

  it("heading north points up on the canvas (y flip)", () => {
    const ops = robotOps(arena, state({ heading: Math.PI / 2 }), W, H);
    const tick = ops.find((o): o is LineOp => o.op === "line")!;
    expect(tick.to[1]).toBeLessThan(tick.from[1]);
  });
});

describe("staleness rule", () => {
  it("declares the feed stalled after one second without updates", () => {
    expect(isStale(1000, 1000 + STALE_AFTER_MS)).toBe(false);
    expect(isStale(1000, 1001 + STALE_AFTER_MS)).toBe(true);
  });
});
