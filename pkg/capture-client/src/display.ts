/**
 * Presentation layer for live runs.
 *
 * The live loop reports events through the Display interface; the terminal
 * implementation renders a single status line that updates in place, and
 * tests substitute a collecting implementation to assert on what was shown.
 */
import type { GestureLabel, PredictionMessage } from "./protocol.js";

export interface Display {
  /** A frame was answered with a prediction. */
  prediction(frameIndex: number, msg: PredictionMessage, fps: number): void;
  /** A frame had no detectable pose and was skipped. */
  noPose(frameIndex: number): void;
  /** The service rejected a frame. */
  rejected(frameIndex: number, reason: string): void;
  /** Free-form status note (start, end, source name). */
  note(text: string): void;
  close(): void;
}

const BAR_SLOTS = 20;

function probabilityBar(p: number): string {
  const filled = Math.max(0, Math.min(BAR_SLOTS, Math.round(p * BAR_SLOTS)));
  return "#".repeat(filled) + ".".repeat(BAR_SLOTS - filled);
}

/** One-line in-place status renderer for interactive terminals. */
export class TerminalDisplay implements Display {
  constructor(private readonly out: NodeJS.WriteStream = process.stderr) {}

  private status(text: string): void {
    if (this.out.isTTY) {
      this.out.write(`\r\x1b[2K${text}`);
    } else {
      this.out.write(text + "\n");
    }
  }

  prediction(frameIndex: number, msg: PredictionMessage, fps: number): void {
    const p = msg.probs[msg.gesture];
    const fpsText = fps > 0 ? ` ${fps.toFixed(1)} fps` : "";
    this.status(
      `frame ${frameIndex}  ${msg.gesture.padEnd(9)} [${probabilityBar(p)}] ${(p * 100).toFixed(0).padStart(3)}%${fpsText}`,
    );
  }

  noPose(frameIndex: number): void {
    this.status(`frame ${frameIndex}  (no pose detected)`);
  }

  rejected(frameIndex: number, reason: string): void {
    this.status(`frame ${frameIndex}  rejected by service: ${reason}`);
  }

  note(text: string): void {
    if (this.out.isTTY) this.out.write("\r\x1b[2K");
    this.out.write(text + "\n");
  }

  close(): void {
    if (this.out.isTTY) this.out.write("\n");
  }
}

/** Test double that records every event. */
export class CollectingDisplay implements Display {
  readonly predictions: { frameIndex: number; gesture: GestureLabel; msg: PredictionMessage }[] =
    [];
  readonly noPoseFrames: number[] = [];
  readonly rejections: { frameIndex: number; reason: string }[] = [];
  readonly notes: string[] = [];

  prediction(frameIndex: number, msg: PredictionMessage): void {
    this.predictions.push({ frameIndex, gesture: msg.gesture, msg });
  }

  noPose(frameIndex: number): void {
    this.noPoseFrames.push(frameIndex);
  }

  rejected(frameIndex: number, reason: string): void {
    this.rejections.push({ frameIndex, reason });
  }

  note(text: string): void {
    this.notes.push(text);
  }

  close(): void {}
}
