/**
 * Gesture-to-message mapping. A drag on the robot becomes a nudge with
 * impulse proportional to the drag vector; pressing along the open edge
 * renews a short hand wall while held. The scales are interaction
 * ergonomics, exposed so an operator can retune them.
 */
import type { Arena, Outbound } from "./wire.js";

export const NUDGE_SCALE_MPS_PER_PX = 0.005;
export const NUDGE_CLAMP_MPS = 1.0;
export const HAND_WALL_LENGTH_M = 0.4;
export const HAND_WALL_RENEW_S = 0.4;

/**
 * Drag vector in canvas pixels (canvas y points down, arena y up) to a
 * nudge message; magnitude clamped at exactly NUDGE_CLAMP_MPS.
 */
export function dragToNudge(dxPx: number, dyPx: number): Outbound {
  let ix = dxPx * NUDGE_SCALE_MPS_PER_PX;
  let iy = -dyPx * NUDGE_SCALE_MPS_PER_PX;
  const mag = Math.hypot(ix, iy);
  if (mag > NUDGE_CLAMP_MPS) {
    ix *= NUDGE_CLAMP_MPS / mag;
    iy *= NUDGE_CLAMP_MPS / mag;
  }
  // adding 0 normalizes negative zero from the y flip
  return { type: "nudge", impulse: [ix + 0, iy + 0] };
}

/**
 * A press at arena position (x, y) near the open edge places a hand wall
 * centered on the press, flush with the edge, clipped to the arena.
 */
export function holdToHandWall(arena: Arena, x: number, _y: number): Outbound {
  const half = HAND_WALL_LENGTH_M / 2;
  const x0 = Math.max(0, Math.min(arena.width - HAND_WALL_LENGTH_M, x - half));
  const edgeY = arena.open_edge === "top" ? arena.depth : 0;
  return {
    type: "hand_wall",
    segment: [
      [x0, edgeY],
      [x0 + HAND_WALL_LENGTH_M, edgeY],
    ],
    duration_s: HAND_WALL_RENEW_S,
  };
}

/** While held, resend the wall each renewal interval so it never lapses. */
export function renewalDueS(lastSentT: number, nowT: number): boolean {
  return nowT - lastSentT >= HAND_WALL_RENEW_S / 2;
}
