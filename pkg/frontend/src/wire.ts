/**
 * Wire protocol schemas. Every message crossing the WebSocket is validated
 * here, in both directions; the UI never trusts raw JSON and never sends
 * anything that does not parse against the outbound schemas.
 *
 * Units: positions in meters (arena frame, y up from the open bottom edge),
 * heading in radians, speed in m/s, t in simulated seconds.
 */
import { z } from "zod";

export const phaseSchema = z.enum(["idle", "running", "paused", "finished"]);
export type Phase = z.infer<typeof phaseSchema>;

const vec2 = z.tuple([z.number(), z.number()]);

export const stateUpdateSchema = z.object({
  type: z.literal("state"),
  t: z.number().nonnegative(),
  position: vec2,
  heading: z.number(),
  speed: z.number(),
  pi_value: z.number(),
  prediction_error_sq: z.number().nonnegative(),
  phase: phaseSchema,
});
export type StateUpdate = z.infer<typeof stateUpdateSchema>;

export const eventAckSchema = z.object({
  type: z.literal("event_ack"),
  event: z.string(),
  t: z.number(),
  session_id: z.string().optional(),
  duration_s: z.number().positive().optional(),
});
export type EventAck = z.infer<typeof eventAckSchema>;

export const errorMessageSchema = z.object({
  type: z.literal("error"),
  code: z.string(),
  text: z.string(),
  t: z.number(),
});
export type ErrorMessage = z.infer<typeof errorMessageSchema>;

export const finishedSchema = z.object({
  type: z.literal("finished"),
  t: z.number().nonnegative(),
  log_id: z.string().regex(/^[a-z0-9]+$/),
  fell: z.boolean(),
});
export type Finished = z.infer<typeof finishedSchema>;

export const inboundSchema = z.discriminatedUnion("type", [
  stateUpdateSchema,
  eventAckSchema,
  errorMessageSchema,
  finishedSchema,
]);
export type Inbound = z.infer<typeof inboundSchema>;

export const startSchema = z
  .object({
    type: z.literal("start"),
    token: z.string().min(1).optional(),
    condition: z.string().optional(),
    seed: z.number().int().nonnegative(),
  })
  .refine((m) => m.token !== undefined || m.condition !== undefined, {
    message: "start needs a token or a condition",
  });
export const pauseSchema = z.object({ type: z.literal("pause") });
export const resumeSchema = z.object({ type: z.literal("resume") });
export const nudgeSchema = z.object({
  type: z.literal("nudge"),
  impulse: vec2,
});
export const handWallSchema = z.object({
  type: z.literal("hand_wall"),
  segment: z.tuple([vec2, vec2]),
  duration_s: z.number().positive(),
});

export const outboundSchema = z.union([
  startSchema,
  pauseSchema,
  resumeSchema,
  nudgeSchema,
  handWallSchema,
]);
export type Outbound = z.infer<typeof outboundSchema>;

/** Parse one inbound frame; returns null for anything off-protocol. */
export function parseInbound(text: string): Inbound | null {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    return null;
  }
  const result = inboundSchema.safeParse(raw);
  return result.success ? result.data : null;
}

/** Serialize an outbound message, refusing anything off-schema. */
export function encodeOutbound(msg: Outbound): string {
  return JSON.stringify(outboundSchema.parse(msg));
}

export const arenaZoneSchema = z.object({
  kind: z.enum(["wood", "paper", "foam"]),
  polygon: z.array(vec2).min(3),
});

export const arenaSchema = z.object({
  width: z.number().positive(),
  depth: z.number().positive(),
  open_edge: z.enum(["top", "bottom", "left", "right"]),
  zones: z.array(arenaZoneSchema).min(1),
  hill: z.object({ center: vec2, radius: z.number().positive(), height: z.number() }),
  pit: z.object({ center: vec2, radius: z.number().positive(), depth: z.number() }),
  friction: z.record(z.number()),
});
export type Arena = z.infer<typeof arenaSchema>;

export function parseArena(raw: unknown): Arena {
  return arenaSchema.parse(raw);
}

export const logHeaderSchema = z.object({
  type: z.literal("header"),
  condition: z.enum(["REA", "ADA"]),
  seed: z.number().int(),
  dt: z.number().positive(),
  duration_s: z.number().positive(),
  arena: arenaSchema,
  arena_hash: z.string().length(64),
  config_hash: z.string().length(64),
  snapshot_hash: z.string().length(64),
  snapshot_b64: z.string().min(1),
});

export const logRowSchema = z.object({
  type: z.literal("row"),
  t: z.number().nonnegative(),
  state: z.object({
    position: vec2,
    heading: z.number(),
    speed: z.number(),
    fallen: z.boolean(),
  }),
  sensors: z.array(z.number()).length(5),
  motors: z.array(z.number()).length(2),
  diag: z.object({
    pi_value: z.number(),
    prediction_error_sq: z.number().nonnegative(),
  }),
});

export const logEventSchema = z.object({
  type: z.enum(["nudge", "hand_wall"]),
  t: z.number().nonnegative(),
});

/**
 * Validate a downloaded JSONL session log: a header line first, then rows
 * and interaction events. Returns the number of rows or throws.
 */
export function validateLog(text: string): number {
  const lines = text.trim().split("\n");
  if (lines.length < 2) throw new Error("log too short");
  logHeaderSchema.passthrough().parse(JSON.parse(lines[0]));
  let rows = 0;
  let lastT = -1;
  for (const line of lines.slice(1)) {
    const raw = JSON.parse(line) as { type?: string };
    if (raw.type === "row") {
      const row = logRowSchema.passthrough().parse(raw);
      if (row.t <= lastT) throw new Error(`non-increasing row time at t=${row.t}`);
      lastT = row.t;
      rows += 1;
    } else {
      logEventSchema.passthrough().parse(raw);
    }
  }
  return rows;
}
