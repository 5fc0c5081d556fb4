// A transport moves raw bytes; framing belongs to the client.  The browser
// build talks to a WebSocket bridge in front of the engine's TCP endpoint
// (demo/bridge.mjs); tests plug in a direct socket or a fake.

export interface Transport {
  send(bytes: Uint8Array): void;
  onData(callback: (chunk: Uint8Array) => void): void;
  onClose(callback: () => void): void;
  close(): void;
}

export class WebSocketTransport implements Transport {
  private socket: WebSocket;
  private dataCallback: ((chunk: Uint8Array) => void) | null = null;
  private closeCallback: (() => void) | null = null;

  constructor(url: string) {
    this.socket = new WebSocket(url);
    this.socket.binaryType = "arraybuffer";
    this.socket.onmessage = (event) => {
      this.dataCallback?.(new Uint8Array(event.data as ArrayBuffer));
    };
    this.socket.onclose = () => this.closeCallback?.();
  }

  ready(): Promise<void> {
    if (this.socket.readyState === WebSocket.OPEN) return Promise.resolve();
    return new Promise((resolve, reject) => {
      this.socket.addEventListener("open", () => resolve(), { once: true });
      this.socket.addEventListener("error", () => reject(new Error("connect failed")), {
        once: true,
      });
    });
  }

  send(bytes: Uint8Array): void {
    this.socket.send(bytes);
  }

  onData(callback: (chunk: Uint8Array) => void): void {
    this.dataCallback = callback;
  }

  onClose(callback: () => void): void {
    this.closeCallback = callback;
  }

  close(): void {
    this.socket.close();
  }
}
