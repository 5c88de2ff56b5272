/**
 * Connection handling for the prediction service.
 *
 * Two transports speak the same line protocol: a TCP socket to a serve
 * process listening on host:port, or a child process speaking the protocol
 * on stdin/stdout.  On top of either sits PredictionClient, which enforces
 * the concurrency model: at most one frame in flight, responses matched to
 * requests in order, echoed ids verified.
 */
import { spawn, type ChildProcessWithoutNullStreams } from "node:child_process";
import net from "node:net";
import readline from "node:readline";

import {
  buildFrameLine,
  parseServerLine,
  type Landmarks,
  type ServerMessage,
} from "./protocol.js";

/** A newline-delimited text channel to the service. */
export interface Connection {
  sendLine(line: string): void;
  onLine(handler: (line: string) => void): void;
  onClose(handler: (err?: Error) => void): void;
  close(): Promise<void>;
}

class TcpConnection implements Connection {
  private lineHandler: (line: string) => void = () => {};
  private closeHandler: (err?: Error) => void = () => {};
  private closed = false;

  constructor(private readonly socket: net.Socket) {
    const rl = readline.createInterface({ input: socket, crlfDelay: Infinity });
    rl.on("line", (line) => this.lineHandler(line));
    socket.on("error", (err) => this.emitClose(err));
    socket.on("close", () => this.emitClose());
  }

  private emitClose(err?: Error): void {
    if (this.closed) return;
    this.closed = true;
    this.closeHandler(err);
  }

  sendLine(line: string): void {
    this.socket.write(line + "\n");
  }

  onLine(handler: (line: string) => void): void {
    this.lineHandler = handler;
  }

  onClose(handler: (err?: Error) => void): void {
    this.closeHandler = handler;
  }

  close(): Promise<void> {
    return new Promise((resolve) => {
      this.closed = true;
      this.socket.end(() => {
        this.socket.destroy();
        resolve();
      });
    });
  }
}

class StdioConnection implements Connection {
  private lineHandler: (line: string) => void = () => {};
  private closeHandler: (err?: Error) => void = () => {};
  private closed = false;

  constructor(private readonly child: ChildProcessWithoutNullStreams) {
    const rl = readline.createInterface({ input: child.stdout, crlfDelay: Infinity });
    rl.on("line", (line) => this.lineHandler(line));
    // Surface service diagnostics but keep them off our protocol stream.
    child.stderr.on("data", (chunk: Buffer) => {
      process.stderr.write(chunk);
    });
    child.on("error", (err) => this.emitClose(err));
    child.on("exit", (code) => {
      this.emitClose(
        code === 0 || code === null ? undefined : new Error(`service exited with code ${code}`),
      );
    });
  }

  private emitClose(err?: Error): void {
    if (this.closed) return;
    this.closed = true;
    this.closeHandler(err);
  }

  sendLine(line: string): void {
    this.child.stdin.write(line + "\n");
  }

  onLine(handler: (line: string) => void): void {
    this.lineHandler = handler;
  }

  onClose(handler: (err?: Error) => void): void {
    this.closeHandler = handler;
  }

  close(): Promise<void> {
    return new Promise((resolve) => {
      this.closed = true;
      this.child.once("exit", () => resolve());
      this.child.stdin.end();
      // Belt and braces: a stuck child should not hang shutdown.
      setTimeout(() => {
        if (this.child.exitCode === null) this.child.kill("SIGTERM");
      }, 2000).unref();
    });
  }
}

/** Connect to a serve process over TCP. Rejects if the connection fails. */
export function connectTcp(host: string, port: number, timeoutMs = 5000): Promise<Connection> {
  return new Promise((resolve, reject) => {
    const socket = net.createConnection({ host, port });
    const timer = setTimeout(() => {
      socket.destroy();
      reject(new Error(`timed out connecting to ${host}:${port}`));
    }, timeoutMs);
    socket.once("connect", () => {
      clearTimeout(timer);
      socket.setNoDelay(true);
      resolve(new TcpConnection(socket));
    });
    socket.once("error", (err) => {
      clearTimeout(timer);
      reject(new Error(`cannot connect to ${host}:${port}: ${err.message}`));
    });
  });
}

/** Spawn a service subprocess that speaks the protocol on stdin/stdout. */
export function connectStdio(command: string, args: string[]): Connection {
  const child = spawn(command, args, { stdio: ["pipe", "pipe", "pipe"] });
  return new StdioConnection(child);
}

/**
 * Parse an endpoint spec into a live connection.
 *
 *   "HOST:PORT"         TCP to a listening serve process
 *   "stdio:CMD ARG..."  spawn CMD and speak the protocol on its stdio
 */
export async function openEndpoint(endpoint: string): Promise<Connection> {
  if (endpoint.startsWith("stdio:")) {
    const parts = endpoint.slice("stdio:".length).trim().split(/\s+/);
    const command = parts[0];
    if (!command) throw new Error("stdio endpoint needs a command, e.g. stdio:posegest serve --stdio --model m.json");
    return connectStdio(command, parts.slice(1));
  }
  const colon = endpoint.lastIndexOf(":");
  if (colon <= 0) {
    throw new Error(`endpoint must be HOST:PORT or stdio:COMMAND, got "${endpoint}"`);
  }
  const host = endpoint.slice(0, colon);
  const port = Number(endpoint.slice(colon + 1));
  if (!Number.isInteger(port) || port <= 0 || port > 65535) {
    throw new Error(`invalid port in endpoint "${endpoint}"`);
  }
  return connectTcp(host, port);
}

interface Pending {
  id?: number;
  resolve: (msg: ServerMessage) => void;
  reject: (err: Error) => void;
  timer: NodeJS.Timeout;
}

/** What the live loop needs from a prediction backend. */
export interface Predictor {
  predict(landmarks: Landmarks, id?: number): Promise<ServerMessage>;
}

/**
 * Request/response layer over a Connection.
 *
 * The service answers strictly in request order, so the client keeps at most
 * one request outstanding and pairs the next response line with it.  Calling
 * predict() while a request is pending is a programming error and throws;
 * callers that want to skip frames should simply not send them (the live
 * loop drops frames it cannot send rather than queueing them).
 */
export class PredictionClient implements Predictor {
  private pending: Pending | null = null;
  private closedErr: Error | null = null;

  constructor(
    private readonly conn: Connection,
    private readonly timeoutMs = 5000,
  ) {
    conn.onLine((line) => this.handleLine(line));
    conn.onClose((err) => {
      this.closedErr = err ?? new Error("connection closed");
      if (this.pending) {
        const p = this.takePending();
        p.reject(this.closedErr);
      }
    });
  }

  get busy(): boolean {
    return this.pending !== null;
  }

  private takePending(): Pending {
    const p = this.pending;
    if (!p) throw new Error("no pending request");
    clearTimeout(p.timer);
    this.pending = null;
    return p;
  }

  private handleLine(line: string): void {
    if (line.trim() === "") return;
    if (!this.pending) return; // late line after timeout; nothing to pair it with
    const p = this.takePending();
    let msg: ServerMessage;
    try {
      msg = parseServerLine(line);
    } catch (err) {
      p.reject(err instanceof Error ? err : new Error(String(err)));
      return;
    }
    if (msg.type === "prediction" && p.id !== undefined && msg.id !== p.id) {
      p.reject(new Error(`response id ${String(msg.id)} does not match request id ${p.id}`));
      return;
    }
    p.resolve(msg);
  }

  /**
   * Send one frame and await the service's answer (prediction or error
   * message).  Landmarks are forwarded exactly as given.
   */
  predict(landmarks: Landmarks, id?: number): Promise<ServerMessage> {
    if (this.closedErr) return Promise.reject(this.closedErr);
    if (this.pending) {
      return Promise.reject(new Error("a frame is already in flight; await it before sending another"));
    }
    let line: string;
    try {
      line = buildFrameLine(landmarks, id);
    } catch (err) {
      // Rejected promise, not a sync throw: callers treat predict uniformly.
      return Promise.reject(err instanceof Error ? err : new Error(String(err)));
    }
    return new Promise<ServerMessage>((resolve, reject) => {
      const timer = setTimeout(() => {
        if (this.pending) this.takePending();
        reject(new Error(`no response within ${this.timeoutMs} ms`));
      }, this.timeoutMs);
      this.pending = { id, resolve, reject, timer };
      this.conn.sendLine(line);
    });
  }

  async close(): Promise<void> {
    await this.conn.close();
  }
}
