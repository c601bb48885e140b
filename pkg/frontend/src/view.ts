/**
 * Bird's-eye arena view. All geometry is computed here as plain data
 * (a draw list), so the layout is testable without a canvas; drawFrame
 * then replays the list onto a 2D context.
 *
 * Canvas frame: x right, y down. Arena frame: x right, y up from the open
 * bottom edge, in meters.
 */
import type { Arena, StateUpdate } from "./wire.js";

export const ZONE_COLORS: Record<string, string> = {
  paper: "#ffffff",
  foam: "#000000",
  wood: "#e3cfa3",
};
export const OPEN_EDGE_COLOR = "#d4483b";
export const ROBOT_COLOR = "#2b6cb0";
export const ROBOT_RADIUS_M = 0.04;
export const STALE_AFTER_MS = 1000;
export const BANNER_WITHIN_MS = 1500;

export interface Transform {
  scale: number; // canvas px per meter
  padX: number;
  padY: number;
  depth: number; // arena depth in meters, for the y flip
}

export interface PolygonOp {
  op: "polygon";
  kind: string;
  color: string;
  points: [number, number][];
}

export interface CircleOp {
  op: "circle";
  kind: string; // "hill" | "pit" | "robot"
  color: string;
  center: [number, number];
  radius: number;
}

export interface LineOp {
  op: "line";
  kind: string; // "open-edge" | "heading"
  color: string;
  from: [number, number];
  to: [number, number];
  width: number;
}

export type DrawOp = PolygonOp | CircleOp | LineOp;

export function fitTransform(arena: Arena, canvasW: number, canvasH: number): Transform {
  const pad = 12;
  const scale = Math.min(
    (canvasW - 2 * pad) / arena.width,
    (canvasH - 2 * pad) / arena.depth,
  );
  return {
    scale,
    padX: (canvasW - scale * arena.width) / 2,
    padY: (canvasH - scale * arena.depth) / 2,
    depth: arena.depth,
  };
}

export function worldToCanvas(t: Transform, p: [number, number]): [number, number] {
  return [t.padX + p[0] * t.scale, t.padY + (t.depth - p[1]) * t.scale];
}

function edgeEndpoints(arena: Arena): [[number, number], [number, number]] {
  switch (arena.open_edge) {
    case "bottom":
      return [[0, 0], [arena.width, 0]];
    case "top":
      return [[0, arena.depth], [arena.width, arena.depth]];
    case "left":
      return [[0, 0], [0, arena.depth]];
    case "right":
      return [[arena.width, 0], [arena.width, arena.depth]];
  }
}

/** Static arena layout: zones, terrain shading, the open-edge highlight. */
export function layoutArena(arena: Arena, canvasW: number, canvasH: number): DrawOp[] {
  const t = fitTransform(arena, canvasW, canvasH);
  const ops: DrawOp[] = [];
  for (const zone of arena.zones) {
    ops.push({
      op: "polygon",
      kind: zone.kind,
      color: ZONE_COLORS[zone.kind],
      points: zone.polygon.map((p) => worldToCanvas(t, p as [number, number])),
    });
  }
  // terrain bumps: outlined discs so the hill and pit read on black foam
  ops.push({
    op: "circle",
    kind: "hill",
    color: "#8c8c8c",
    center: worldToCanvas(t, arena.hill.center as [number, number]),
    radius: arena.hill.radius * t.scale,
  });
  ops.push({
    op: "circle",
    kind: "pit",
    color: "#4a4a4a",
    center: worldToCanvas(t, arena.pit.center as [number, number]),
    radius: arena.pit.radius * t.scale,
  });
  const [a, b] = edgeEndpoints(arena);
  ops.push({
    op: "line",
    kind: "open-edge",
    color: OPEN_EDGE_COLOR,
    from: worldToCanvas(t, a),
    to: worldToCanvas(t, b),
    width: 4,
  });
  return ops;
}

/** Robot disc plus a heading tick pointing where the "head" faces. */
export function robotOps(arena: Arena, state: StateUpdate, canvasW: number, canvasH: number): DrawOp[] {
  const t = fitTransform(arena, canvasW, canvasH);
  const center = worldToCanvas(t, state.position);
  const r = ROBOT_RADIUS_M * t.scale;
  const tip: [number, number] = [
    state.position[0] + 2 * ROBOT_RADIUS_M * Math.cos(state.heading),
    state.position[1] + 2 * ROBOT_RADIUS_M * Math.sin(state.heading),
  ];
  return [
    { op: "circle", kind: "robot", color: ROBOT_COLOR, center, radius: r },
    {
      op: "line",
      kind: "heading",
      color: ROBOT_COLOR,
      from: center,
      to: worldToCanvas(t, tip),
      width: 2,
    },
  ];
}

/** Staleness rule: no update for > 1 s means the feed stalled. */
export function isStale(lastUpdateMs: number, nowMs: number): boolean {
  return nowMs - lastUpdateMs > STALE_AFTER_MS;
}

export function drawFrame(ctx: CanvasRenderingContext2D, ops: DrawOp[]): void {
  for (const op of ops) {
    if (op.op === "polygon") {
      ctx.fillStyle = op.color;
      ctx.beginPath();
      ctx.moveTo(op.points[0][0], op.points[0][1]);
      for (const p of op.points.slice(1)) ctx.lineTo(p[0], p[1]);
      ctx.closePath();
      ctx.fill();
    } else if (op.op === "circle") {
      ctx.beginPath();
      ctx.arc(op.center[0], op.center[1], op.radius, 0, 2 * Math.PI);
      if (op.kind === "robot") {
        ctx.fillStyle = op.color;
        ctx.fill();
      } else {
        ctx.strokeStyle = op.color;
        ctx.lineWidth = 2;
        ctx.stroke();
      }
    } else {
      ctx.strokeStyle = op.color;
      ctx.lineWidth = op.width;
      ctx.beginPath();
      ctx.moveTo(op.from[0], op.from[1]);
      ctx.lineTo(op.to[0], op.to[1]);
      ctx.stroke();
    }
  }
}
