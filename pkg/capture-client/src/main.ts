/**
 * capture-client command line.
 *
 * Live mode streams frames from a source to a prediction service and shows
 * the recognized gesture:
 *
 *   capture-client --source fixture:clips/left.jsonl --endpoint 127.0.0.1:7331
 *
 * Record mode captures frames into a dataset file (no service involved):
 *
 *   capture-client --source camera:0 --record subject=s00,label=left,distance=1.0 \
 *       --out data/s00-left.jsonl
 */
import { parseArgs } from "node:util";

import { openEndpoint, PredictionClient } from "./client.js";
import { TerminalDisplay } from "./display.js";
import { runLive } from "./live.js";
import { GESTURE_LABELS, type GestureLabel } from "./protocol.js";
import { recordClip, recordInteractive } from "./record.js";
import { openSource } from "./sources.js";
import type { RecordMeta } from "./dataset.js";

const USAGE = `usage: capture-client --source SPEC [--endpoint HOST:PORT | stdio:CMD]
                      [--record subject=S,label=L,distance=D --out FILE]
                      [--max-frames N]

sources:   fixture:clip.jsonl | clip.jsonl | camera:N | video path
endpoints: HOST:PORT (TCP serve) | stdio:COMMAND ARG... (spawned serve)
record:    captures frames to a dataset file instead of streaming;
           labels: ${GESTURE_LABELS.join(", ")}
`;

class UsageError extends Error {}

function parseRecordSpec(spec: string): RecordMeta {
  const fields = new Map<string, string>();
  for (const part of spec.split(",")) {
    const eq = part.indexOf("=");
    if (eq <= 0) throw new UsageError(`--record expects key=value pairs, got "${part}"`);
    fields.set(part.slice(0, eq).trim(), part.slice(eq + 1).trim());
  }
  const subject = fields.get("subject");
  const label = fields.get("label");
  const distance = fields.get("distance");
  if (!subject || !label || !distance) {
    throw new UsageError("--record needs subject=, label=, and distance= fields");
  }
  if (!(GESTURE_LABELS as readonly string[]).includes(label)) {
    throw new UsageError(`unknown label "${label}"; expected one of ${GESTURE_LABELS.join(", ")}`);
  }
  const distanceM = Number(distance);
  if (!Number.isFinite(distanceM) || distanceM <= 0) {
    throw new UsageError(`distance must be a positive number of meters, got "${distance}"`);
  }
  return { subject, label: label as GestureLabel, distanceM };
}

async function runMain(argv: string[]): Promise<number> {
  let values: {
    source?: string;
    endpoint?: string;
    record?: string;
    out?: string;
    "max-frames"?: string;
    help?: boolean;
  };
  try {
    ({ values } = parseArgs({
      args: argv,
      options: {
        source: { type: "string" },
        endpoint: { type: "string" },
        record: { type: "string" },
        out: { type: "string" },
        "max-frames": { type: "string" },
        help: { type: "boolean", short: "h" },
      },
      allowPositionals: false,
    }));
  } catch (err) {
    throw new UsageError(err instanceof Error ? err.message : String(err));
  }

  if (values.help) {
    process.stdout.write(USAGE);
    return 0;
  }
  if (!values.source) throw new UsageError("--source is required");

  let maxFrames: number | undefined;
  if (values["max-frames"] !== undefined) {
    maxFrames = Number(values["max-frames"]);
    if (!Number.isInteger(maxFrames) || maxFrames <= 0) {
      throw new UsageError("--max-frames must be a positive integer");
    }
  }

  const display = new TerminalDisplay();

  if (values.record !== undefined) {
    const meta = parseRecordSpec(values.record);
    if (!values.out) throw new UsageError("--record needs --out FILE for the dataset");
    const source = await openSource(values.source);
    try {
      if (process.stdin.isTTY) {
        await recordInteractive(source, meta, values.out, display);
      } else {
        await recordClip(source, meta, values.out, display, maxFrames);
      }
    } finally {
      await source.close();
      display.close();
    }
    return 0;
  }

  if (!values.endpoint) throw new UsageError("live mode needs --endpoint (or use --record)");
  const source = await openSource(values.source);
  const conn = await openEndpoint(values.endpoint);
  const client = new PredictionClient(conn);
  const aborter = new AbortController();
  const onSigint = (): void => aborter.abort();
  process.once("SIGINT", onSigint);
  // q at the terminal also quits, matching record mode.
  const stdin = process.stdin;
  const onKey = (chunk: Buffer): void => {
    if (chunk.toString("utf8").includes("q")) aborter.abort();
  };
  if (stdin.isTTY) {
    stdin.setRawMode(true);
    stdin.resume();
    stdin.on("data", onKey);
  }
  try {
    await runLive(source, client, display, { maxFrames, signal: aborter.signal });
  } finally {
    process.off("SIGINT", onSigint);
    if (stdin.isTTY) {
      stdin.off("data", onKey);
      stdin.setRawMode(false);
      stdin.pause();
    }
    await client.close();
    await source.close();
    display.close();
  }
  return 0;
}

runMain(process.argv.slice(2))
  .then((code) => {
    process.exitCode = code;
  })
  .catch((err: unknown) => {
    if (err instanceof UsageError) {
      process.stderr.write(`error: ${err.message}\n\n${USAGE}`);
      process.exitCode = 1;
    } else {
      process.stderr.write(`error: ${err instanceof Error ? err.message : String(err)}\n`);
      process.exitCode = 2;
    }
  });
