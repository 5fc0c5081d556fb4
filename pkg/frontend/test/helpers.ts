import { ChildProcess, spawn } from "node:child_process";
import { Socket, createConnection } from "node:net";
import { Transport } from "../src/transport";

/** Direct socket to a running engine; tests skip the WebSocket bridge. */
export class TcpTransport implements Transport {
  private dataCallback: ((chunk: Uint8Array) => void) | null = null;
  private closeCallback: (() => void) | null = null;

  private constructor(private socket: Socket) {
    socket.on("data", (buffer) => {
      this.dataCallback?.(new Uint8Array(buffer));
    });
    socket.on("close", () => this.closeCallback?.());
  }

  static connect(port: number, host = "127.0.0.1"): Promise<TcpTransport> {
    return new Promise((resolve, reject) => {
      const socket = createConnection({ port, host });
      socket.once("connect", () => resolve(new TcpTransport(socket)));
      socket.once("error", reject);
    });
  }

  send(bytes: Uint8Array): void {
    this.socket.write(bytes);
  }

  onData(callback: (chunk: Uint8Array) => void): void {
    this.dataCallback = callback;
  }

  onClose(callback: () => void): void {
    this.closeCallback = callback;
  }

  close(): void {
    this.socket.destroy();
  }
}

export interface EngineProcess {
  port: number;
  stop(): void;
}

/** Spawn `engine serve` on a free port and wait for its address line. */
export function spawnEngine(): Promise<EngineProcess> {
  const child: ChildProcess = spawn(
    "python3",
    ["-m", "stet.cli", "serve", "--port", "0"],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  return new Promise((resolve, reject) => {
    let out = "";
    let err = "";
    const timer = setTimeout(() => {
      child.kill();
      reject(new Error(`engine did not start: ${out} ${err}`));
    }, 15000);
    child.stdout!.on("data", (chunk: Buffer) => {
      out += chunk.toString();
      const match = out.match(/listening on [^:]+:(\d+)/);
      if (match) {
        clearTimeout(timer);
        resolve({
          port: Number(match[1]),
          stop() {
            child.kill();
          },
        });
      }
    });
    child.stderr!.on("data", (chunk: Buffer) => {
      err += chunk.toString();
    });
    child.on("exit", (code) => {
      clearTimeout(timer);
      reject(new Error(`engine exited early (${code}): ${err}`));
    });
  });
}

export function delay(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

/** Poll until `check` passes or the deadline hits; rethrows the last failure. */
export async function until(
  check: () => void | Promise<void>,
  timeoutMs = 5000,
): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      await check();
      return;
    } catch (error) {
      if (Date.now() > deadline) throw error;
      await delay(25);
    }
  }
}
