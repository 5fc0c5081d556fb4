import {
  ErrorMessage,
  FrameDecoder,
  ServerMessage,
  StateMessage,
  encodeFrame,
} from "./protocol";
import { Transport } from "./transport";
import { WireChange } from "./offsets";

export class EngineError extends Error {
  constructor(
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

type StateListener = (state: StateMessage) => void;

/**
 * Request/response client over one engine session.
 *
 * Change requests are pipelined off: at most one is in flight, the rest
 * queue behind it, so the version a request carries is always the latest
 * the engine has confirmed.  A stale_version reply still gets one rebase
 * and resend (a broadcast may have advanced the session between queueing
 * and sending); the second failure propagates.
 */
export class EngineClient {
  private decoder = new FrameDecoder();
  private nextRequestId = 1;
  private pending = new Map<number, [(m: StateMessage) => void, (e: Error) => void]>();
  private listeners: StateListener[] = [];
  private sendChain: Promise<unknown> = Promise.resolve();
  private closed = false;

  state: StateMessage | null = null;

  constructor(private transport: Transport) {
    transport.onData((chunk) => {
      for (const message of this.decoder.push(chunk)) this.dispatch(message);
    });
    transport.onClose(() => {
      this.closed = true;
      for (const [, [, reject]] of this.pending) {
        reject(new EngineError("closed", "connection closed"));
      }
      this.pending.clear();
    });
  }

  private dispatch(message: ServerMessage): void {
    if (message.type === "state" && message.id === undefined) {
      // subscription push: track it, but it answers no request
      this.state = message;
      for (const listener of this.listeners) listener(message);
      return;
    }
    const id = message.id;
    if (id == null) return;
    const handlers = this.pending.get(id);
    if (!handlers) return;
    this.pending.delete(id);
    const [resolve, reject] = handlers;
    if (message.type === "error") {
      reject(new EngineError(message.code, (message as ErrorMessage).message));
      return;
    }
    this.state = message;
    for (const listener of this.listeners) listener(message);
    resolve(message);
  }

  private request(payload: Record<string, unknown>): Promise<StateMessage> {
    if (this.closed) {
      return Promise.reject(new EngineError("closed", "connection closed"));
    }
    const id = this.nextRequestId++;
    return new Promise((resolve, reject) => {
      this.pending.set(id, [resolve, reject]);
      this.transport.send(encodeFrame({ id, ...payload }));
    });
  }

  onState(listener: StateListener): void {
    this.listeners.push(listener);
  }

  private get sessionId(): number {
    if (!this.state) throw new EngineError("no_session", "open a session first");
    return this.state.sessionId;
  }

  open(text: string, languageId: string): Promise<StateMessage> {
    return this.request({ type: "open", text, languageId });
  }

  subscribe(): Promise<StateMessage> {
    return this.request({ type: "subscribeState", sessionId: this.sessionId });
  }

  /** Queue a change behind any in-flight one; resolves with the reply state. */
  change(
    changes: WireChange[],
    options: { intents?: number[]; forceApply?: boolean } = {},
  ): Promise<StateMessage> {
    const run = async (): Promise<StateMessage> => {
      try {
        return await this.sendChangeOnce(changes, options);
      } catch (error) {
        if (error instanceof EngineError && error.code === "stale_version") {
          return this.sendChangeOnce(changes, options);
        }
        throw error;
      }
    };
    const result = this.sendChain.then(run, run);
    this.sendChain = result.catch(() => {});
    return result;
  }

  private sendChangeOnce(
    changes: WireChange[],
    options: { intents?: number[]; forceApply?: boolean },
  ): Promise<StateMessage> {
    const payload: Record<string, unknown> = {
      type: "change",
      sessionId: this.sessionId,
      version: this.state!.version,
      changes,
    };
    if (options.intents?.length) payload.intents = options.intents;
    if (options.forceApply) payload.forceApply = true;
    return this.request(payload);
  }

  action(
    instanceId: string,
    actionId: string,
    payload: Record<string, unknown> = {},
  ): Promise<StateMessage> {
    return this.request({
      type: "action",
      sessionId: this.sessionId,
      instanceId,
      actionId,
      payload,
    });
  }

  revert(): Promise<StateMessage> {
    return this.request({ type: "revert", sessionId: this.sessionId });
  }

  forceApply(): Promise<StateMessage> {
    return this.change([], { forceApply: true });
  }

  /** Settles when every queued change request has been answered. */
  async idle(): Promise<void> {
    let tail;
    do {
      tail = this.sendChain;
      await tail.catch(() => {});
    } while (tail !== this.sendChain);
  }

  close(): void {
    this.transport.close();
  }
}
