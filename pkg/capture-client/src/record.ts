/**
 * Dataset recording.
 *
 * A capture session keeps pulling frames so "the current frame" stays
 * fresh, and writes the current frame to the dataset file when asked.
 * Capturing is refused while no pose is in frame; a dataset of empty
 * detections is worthless.  The interactive runner binds that to keys:
 * space or c to capture, q to quit.
 */
import type { Display } from "./display.js";
import { DatasetWriter, type RecordMeta, validateRecordMeta } from "./dataset.js";
import { NO_POSE, type FrameSource } from "./sources.js";
import type { Landmarks } from "./protocol.js";

export class CaptureSession {
  private current: Landmarks | null = null;
  private exhausted = false;
  readonly writer: DatasetWriter;

  constructor(
    private readonly source: FrameSource,
    private readonly meta: RecordMeta,
    outPath: string,
  ) {
    validateRecordMeta(meta);
    this.writer = new DatasetWriter(outPath);
  }

  /** Pull the next frame. Returns false once the source is exhausted. */
  async step(): Promise<boolean> {
    if (this.exhausted) return false;
    const frame = await this.source.next();
    if (frame === null) {
      this.exhausted = true;
      return false;
    }
    this.current = frame === NO_POSE ? null : frame;
    return true;
  }

  /** Whether the latest frame has a usable pose. */
  get hasPose(): boolean {
    return this.current !== null;
  }

  get captured(): number {
    return this.writer.count;
  }

  /** Append the current frame to the dataset. Throws without a pose. */
  capture(): void {
    if (this.current === null) {
      throw new Error("no pose in the current frame; nothing to record");
    }
    this.writer.append(this.meta, this.current);
  }

  close(): void {
    this.writer.close();
  }
}

/**
 * Scripted capture: record every posed frame the source yields, up to
 * `maxCaptures`.  Used by tests and for turning a clip into dataset rows
 * without sitting at a keyboard.
 */
export async function recordClip(
  source: FrameSource,
  meta: RecordMeta,
  outPath: string,
  display: Display,
  maxCaptures?: number,
): Promise<number> {
  const session = new CaptureSession(source, meta, outPath);
  try {
    while (await session.step()) {
      if (!session.hasPose) continue;
      session.capture();
      if (maxCaptures !== undefined && session.captured >= maxCaptures) break;
    }
  } finally {
    session.close();
  }
  display.note(`recorded ${session.captured} ${meta.label} frames to ${outPath}`);
  return session.captured;
}

/**
 * Interactive capture at the terminal.  The session free-runs the source in
 * the background so captures grab what is on screen right now; keys:
 * space/c capture, q quit.
 */
export async function recordInteractive(
  source: FrameSource,
  meta: RecordMeta,
  outPath: string,
  display: Display,
  stdin: NodeJS.ReadStream = process.stdin,
): Promise<number> {
  const session = new CaptureSession(source, meta, outPath);
  display.note(`recording ${meta.label} for ${meta.subject} at ${meta.distanceM} m -> ${outPath}`);
  display.note("space/c to capture the current frame, q to finish");

  let quit = false;
  const onKey = (chunk: Buffer): void => {
    for (const ch of chunk.toString("utf8")) {
      if (ch === "q" || ch === "\x03") {
        quit = true;
      } else if (ch === " " || ch === "c") {
        if (session.hasPose) {
          session.capture();
          display.note(`captured frame ${session.captured}`);
        } else {
          display.note("not captured: no pose in frame");
        }
      }
    }
  };

  const rawCapable = stdin.isTTY === true;
  if (rawCapable) stdin.setRawMode(true);
  stdin.resume();
  stdin.on("data", onKey);
  try {
    while (!quit) {
      const more = await session.step();
      if (!more) break;
      // Yield so key events interleave with the pull loop.
      await new Promise((resolve) => setImmediate(resolve));
    }
  } finally {
    stdin.off("data", onKey);
    if (rawCapable) stdin.setRawMode(false);
    stdin.pause();
    session.close();
  }
  display.note(`recorded ${session.captured} ${meta.label} frames to ${outPath}`);
  return session.captured;
}
