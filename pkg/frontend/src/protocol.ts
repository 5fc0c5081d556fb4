// Wire protocol mirror: 4-byte big-endian length, UTF-8 JSON body.  The
// shapes here follow docs/protocol.md on the engine side.

export interface StateMessage {
  id?: number;
  type: "state";
  sessionId: number;
  version: number;
  frozen: boolean;
  pendingCount: number;
  violations: string[];
  outcome: string | null;
  opCount: number;
  tools: ToolView[];
  fragments: FragmentView[];
  text: string;
}

export interface ErrorMessage {
  id: number | null;
  type: "error";
  code: string;
  message: string;
}

export type ServerMessage = StateMessage | ErrorMessage;

export interface ToolView {
  instanceId: string;
  definitionId: string;
  displayType: "Replace" | "InsertBefore" | "InsertAfter" | "Markup";
  anchorRange: [number, number];
  depth: number;
  view: ViewPart[];
}

export interface ViewPart {
  type: string;
  actionId?: string;
  label?: string;
  text?: string;
  quote?: string;
  nodeId?: number;
  value?: number | unknown;
  min?: number;
  max?: number;
  step?: number;
  nodes?: number[];
  fragmentId?: number | null;
  components?: number[];
  values?: number[];
  style?: Record<string, string>;
  children?: ViewPart[];
}

export interface FragmentView {
  fragmentId: number;
  range: [number, number];
  nodeRange: [number, number];
  displayText: string;
  indentPrefix: string;
  lineStrips: number[];
}

export interface ChangeRequest {
  id: number;
  type: "change";
  sessionId: number;
  version: number;
  changes: { from: number; to: number; insert?: string }[];
  intents?: number[];
  forceApply?: boolean;
}

const encoder = new TextEncoder();
const decoder = new TextDecoder();

export const MAX_FRAME = 64 * 1024 * 1024;

export function encodeFrame(payload: object): Uint8Array {
  const body = encoder.encode(JSON.stringify(payload));
  const frame = new Uint8Array(4 + body.length);
  new DataView(frame.buffer).setUint32(0, body.length);
  frame.set(body, 4);
  return frame;
}

/** Reassembles frames from arbitrary byte chunks. */
export class FrameDecoder {
  private buffer = new Uint8Array(0);

  push(chunk: Uint8Array): ServerMessage[] {
    const merged = new Uint8Array(this.buffer.length + chunk.length);
    merged.set(this.buffer);
    merged.set(chunk, this.buffer.length);
    this.buffer = merged;

    const out: ServerMessage[] = [];
    for (;;) {
      if (this.buffer.length < 4) break;
      const view = new DataView(
        this.buffer.buffer,
        this.buffer.byteOffset,
        this.buffer.byteLength,
      );
      const length = view.getUint32(0);
      if (length > MAX_FRAME) {
        throw new Error(`frame of ${length} bytes exceeds the limit`);
      }
      if (this.buffer.length < 4 + length) break;
      const body = this.buffer.subarray(4, 4 + length);
      out.push(JSON.parse(decoder.decode(body)) as ServerMessage);
      this.buffer = this.buffer.slice(4 + length);
    }
    return out;
  }
}
