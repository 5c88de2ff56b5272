/**
 * Wire grammar for the gesture prediction service.
 *
 * The service speaks newline-delimited JSON, one message per line.  The
 * client sends frame messages and reads back prediction or error messages.
 * Everything here is pure validation and formatting; no sockets.
 */
import { z } from "zod";

/** Gesture labels in class order. Prediction probs carry exactly these keys. */
export const GESTURE_LABELS = [
  "attention",
  "right",
  "left",
  "stop",
  "yes",
  "shrug",
  "random",
  "static",
] as const;

export type GestureLabel = (typeof GESTURE_LABELS)[number];

export const LANDMARK_COUNT = 33;
export const LANDMARK_WIDTH = 4; // x, y, z, visibility

const finiteNumber = z.number().finite();

const visibility = z
  .number()
  .finite()
  .min(0, "visibility must be in [0, 1]")
  .max(1, "visibility must be in [0, 1]");

/** One landmark row: [x, y, z, visibility]. */
export const landmarkRowSchema = z.tuple([
  finiteNumber,
  finiteNumber,
  finiteNumber,
  visibility,
]);

/** Full pose: exactly 33 rows of 4. */
export const landmarksSchema = z
  .array(landmarkRowSchema)
  .length(LANDMARK_COUNT, `landmarks must have exactly ${LANDMARK_COUNT} rows`);

export type Landmarks = z.infer<typeof landmarksSchema>;

/** Client -> server. `id`, when present, is echoed back on the prediction. */
export const frameMessageSchema = z
  .object({
    type: z.literal("frame"),
    id: z.number().int().optional(),
    landmarks: landmarksSchema,
  })
  .strict();

export type FrameMessage = z.infer<typeof frameMessageSchema>;

const probability = z.number().finite().min(0).max(1);

const probsShape = Object.fromEntries(
  GESTURE_LABELS.map((label) => [label, probability]),
) as Record<GestureLabel, typeof probability>;

/** Server -> client on success. `model` is a 16-hex checkpoint checksum. */
export const predictionMessageSchema = z
  .object({
    type: z.literal("prediction"),
    id: z.number().int().optional(),
    gesture: z.enum(GESTURE_LABELS),
    probs: z.object(probsShape).strict(),
    model: z.string().regex(/^[0-9a-f]{16}$/, "model must be 16 lowercase hex chars"),
  })
  .strict();

export type PredictionMessage = z.infer<typeof predictionMessageSchema>;

/** Server -> client on a rejected line. Never carries an id. */
export const errorMessageSchema = z
  .object({
    type: z.literal("error"),
    reason: z.enum(["parse", "arity", "nonfinite"]),
  })
  .strict();

export type ErrorMessage = z.infer<typeof errorMessageSchema>;

export const serverMessageSchema = z.discriminatedUnion("type", [
  predictionMessageSchema,
  errorMessageSchema,
]);

export type ServerMessage = z.infer<typeof serverMessageSchema>;

/**
 * Format a frame line for the wire.  Validates first so a bad extractor
 * output is caught client-side instead of bouncing off the server.
 * Landmark values are serialized exactly as given; nothing is rounded,
 * clamped, or reordered.
 */
export function buildFrameLine(landmarks: Landmarks, id?: number): string {
  const message: FrameMessage =
    id === undefined ? { type: "frame", landmarks } : { type: "frame", id, landmarks };
  frameMessageSchema.parse(message);
  return JSON.stringify(message);
}

/** Parse and validate one server line. Throws on anything off-grammar. */
export function parseServerLine(line: string): ServerMessage {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch (err) {
    throw new Error(`server sent invalid JSON: ${String(err)}`);
  }
  return serverMessageSchema.parse(raw);
}

/** Quick structural check for raw extractor output before it goes anywhere. */
export function isValidLandmarks(value: unknown): value is Landmarks {
  return landmarksSchema.safeParse(value).success;
}
