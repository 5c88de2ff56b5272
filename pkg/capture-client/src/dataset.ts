/**
 * Dataset file writer.
 *
 * Recorded frames land in the same newline-delimited JSON format the
 * training tools read: one record per line with subject, label, distance_m,
 * and the raw 33x4 landmarks.  The writer validates before touching the
 * file so a bad capture can never poison a dataset.
 *
 * Numbers are serialized with JavaScript's shortest round-trip formatting.
 * That can differ textually from other writers (1 vs 1.0), but parses back
 * to the identical IEEE-754 double, which is what the readers consume.
 */
import fs from "node:fs";
import path from "node:path";

import { GESTURE_LABELS, landmarksSchema, type GestureLabel, type Landmarks } from "./protocol.js";

export interface RecordMeta {
  subject: string;
  label: GestureLabel;
  distanceM: number;
}

export function validateRecordMeta(meta: RecordMeta): void {
  if (typeof meta.subject !== "string" || meta.subject.length === 0) {
    throw new Error("subject must be a non-empty string");
  }
  if (!GESTURE_LABELS.includes(meta.label)) {
    throw new Error(`unknown label "${meta.label}"; expected one of ${GESTURE_LABELS.join(", ")}`);
  }
  if (!Number.isFinite(meta.distanceM) || meta.distanceM <= 0) {
    throw new Error("distance must be a positive number of meters");
  }
}

/** Format one dataset record line. Validates meta and landmarks. */
export function formatRecordLine(meta: RecordMeta, landmarks: Landmarks): string {
  validateRecordMeta(meta);
  const parsed = landmarksSchema.parse(landmarks);
  return JSON.stringify({
    subject: meta.subject,
    label: meta.label,
    distance_m: meta.distanceM,
    landmarks: parsed,
  });
}

/**
 * Appends validated records to a dataset file, creating it (and its parent
 * directory) on first write.  Append mode keeps an interrupted session's
 * captures on disk.
 */
export class DatasetWriter {
  private fd: number | null = null;
  private written = 0;

  constructor(readonly outPath: string) {}

  private ensureOpen(): number {
    if (this.fd === null) {
      const dir = path.dirname(this.outPath);
      if (dir && dir !== ".") fs.mkdirSync(dir, { recursive: true });
      this.fd = fs.openSync(this.outPath, "a");
    }
    return this.fd;
  }

  /** Validate and append one record. Returns the line written. */
  append(meta: RecordMeta, landmarks: Landmarks): string {
    const line = formatRecordLine(meta, landmarks);
    fs.writeSync(this.ensureOpen(), line + "\n");
    this.written += 1;
    return line;
  }

  get count(): number {
    return this.written;
  }

  close(): void {
    if (this.fd !== null) {
      fs.closeSync(this.fd);
      this.fd = null;
    }
  }
}
