/**
 * The live loop: pull a frame, send it, show the answer, repeat.
 *
 * Concurrency model: strictly one frame in flight.  The next frame is not
 * pulled until the previous answer arrives, so a slow service makes the
 * client skip camera frames (the source hands out its freshest frame on
 * each pull) instead of building a queue of stale ones.  Frames with no
 * detected pose are shown as such and never sent.
 *
 * All classification happens on the service side; this loop only forwards
 * landmarks and renders what comes back.
 */
import type { Predictor } from "./client.js";
import type { Display } from "./display.js";
import { NO_POSE, type FrameSource } from "./sources.js";
import type { GestureLabel } from "./protocol.js";

export interface LiveSummary {
  frames: number;
  sent: number;
  predictions: number;
  noPose: number;
  rejected: number;
  byGesture: Partial<Record<GestureLabel, number>>;
}

export interface LiveOptions {
  /** Stop after this many frames (default: run the source dry). */
  maxFrames?: number;
  /** Cooperative cancellation, e.g. from a quit key. */
  signal?: AbortSignal;
}

export async function runLive(
  source: FrameSource,
  client: Predictor,
  display: Display,
  options: LiveOptions = {},
): Promise<LiveSummary> {
  const summary: LiveSummary = {
    frames: 0,
    sent: 0,
    predictions: 0,
    noPose: 0,
    rejected: 0,
    byGesture: {},
  };
  display.note(`source: ${source.name}`);
  let lastAnswerAt = 0;
  let fps = 0;

  while (!options.signal?.aborted) {
    if (options.maxFrames !== undefined && summary.frames >= options.maxFrames) break;
    const frame = await source.next();
    if (frame === null) break;
    const frameIndex = summary.frames;
    summary.frames += 1;

    if (frame === NO_POSE) {
      summary.noPose += 1;
      display.noPose(frameIndex);
      continue;
    }

    summary.sent += 1;
    const msg = await client.predict(frame, frameIndex);
    if (msg.type === "error") {
      summary.rejected += 1;
      display.rejected(frameIndex, msg.reason);
      continue;
    }

    summary.predictions += 1;
    summary.byGesture[msg.gesture] = (summary.byGesture[msg.gesture] ?? 0) + 1;
    const now = performance.now();
    if (lastAnswerAt > 0 && now > lastAnswerAt) {
      fps = 1000 / (now - lastAnswerAt);
    }
    lastAnswerAt = now;
    display.prediction(frameIndex, msg, fps);
  }

  const shown = Object.entries(summary.byGesture)
    .sort((a, b) => b[1] - a[1])
    .map(([g, n]) => `${g}=${n}`)
    .join(" ");
  display.note(
    `done: ${summary.frames} frames, ${summary.predictions} predictions, ` +
      `${summary.noPose} without a pose, ${summary.rejected} rejected${shown ? `  (${shown})` : ""}`,
  );
  return summary;
}
