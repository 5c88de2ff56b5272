/**
 * Frame sources: where landmark frames come from.
 *
 * A source yields one pose per pull: a 33x4 landmark array, NO_POSE when the
 * extractor found nobody in frame, or null when the source is exhausted.
 * Values pass through exactly as the extractor produced them; sources never
 * scale, smooth, or reorder landmarks.
 *
 * Two kinds exist: a fixture source that replays a recorded clip from a
 * JSONL file (used for tests and offline runs), and a camera source that
 * wraps a pose-landmark extractor if one is installed.
 */
import fs from "node:fs";

import { isValidLandmarks, type Landmarks } from "./protocol.js";

/** Marker for a frame where the extractor found no pose. */
export const NO_POSE = Symbol("no-pose");

export type SourceFrame = Landmarks | typeof NO_POSE | null;

export interface FrameSource {
  /** Human-readable origin, for status lines. */
  readonly name: string;
  /** Next frame, NO_POSE for an empty frame, or null at end of stream. */
  next(): Promise<SourceFrame>;
  close(): Promise<void>;
}

/**
 * Replays a recorded clip.  One JSON value per line: either a 33x4 landmark
 * array or null for a frame where no pose was detected.  Blank lines are
 * skipped.
 */
export class FixtureSource implements FrameSource {
  readonly name: string;
  private readonly frames: (Landmarks | typeof NO_POSE)[] = [];
  private cursor = 0;

  constructor(clipPath: string) {
    this.name = `fixture:${clipPath}`;
    let text: string;
    try {
      text = fs.readFileSync(clipPath, "utf8");
    } catch (err) {
      throw new Error(`cannot open clip ${clipPath}: ${(err as Error).message}`);
    }
    const lines = text.split("\n");
    for (let i = 0; i < lines.length; i++) {
      const line = (lines[i] ?? "").trim();
      if (line === "") continue;
      let value: unknown;
      try {
        value = JSON.parse(line);
      } catch {
        throw new Error(`${clipPath}:${i + 1}: invalid JSON`);
      }
      if (value === null) {
        this.frames.push(NO_POSE);
        continue;
      }
      if (!isValidLandmarks(value)) {
        throw new Error(`${clipPath}:${i + 1}: not a 33x4 landmark array`);
      }
      this.frames.push(value);
    }
    if (this.frames.length === 0) {
      throw new Error(`clip ${clipPath} contains no frames`);
    }
  }

  get frameCount(): number {
    return this.frames.length;
  }

  next(): Promise<SourceFrame> {
    if (this.cursor >= this.frames.length) return Promise.resolve(null);
    const frame = this.frames[this.cursor++];
    return Promise.resolve(frame ?? null);
  }

  close(): Promise<void> {
    this.cursor = this.frames.length;
    return Promise.resolve();
  }
}

/**
 * Camera/video capture via an installed pose-landmark extractor.
 *
 * The extractor stack (camera bindings plus a pose model) is an optional,
 * platform-specific install, so it is loaded dynamically.  Without it,
 * opening a camera source fails with a pointer at the fixture form, which
 * works everywhere.
 */
async function openCameraSource(spec: string): Promise<FrameSource> {
  let extractor: unknown;
  try {
    // Expected to export createPoseSource(spec) -> FrameSource.
    extractor = await import("@posegest/extractor" as string);
  } catch {
    throw new Error(
      `camera source "${spec}" needs a pose-landmark extractor package, ` +
        `which is not installed; use a recorded clip instead (--source fixture:clip.jsonl)`,
    );
  }
  const factory = (extractor as { createPoseSource?: (spec: string) => FrameSource })
    .createPoseSource;
  if (typeof factory !== "function") {
    throw new Error("extractor package is present but does not export createPoseSource");
  }
  return factory(spec);
}

/**
 * Open a frame source from a CLI spec.
 *
 *   "fixture:clip.jsonl"  replay a recorded clip
 *   "clip.jsonl"          same, by extension
 *   "camera:0"            capture device 0 via the extractor package
 *   anything else         treated as a video path for the extractor
 */
export async function openSource(spec: string): Promise<FrameSource> {
  if (spec.startsWith("fixture:")) {
    return new FixtureSource(spec.slice("fixture:".length));
  }
  if (spec.endsWith(".jsonl")) {
    return new FixtureSource(spec);
  }
  return openCameraSource(spec);
}
