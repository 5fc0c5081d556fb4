import { describe, expect, it } from "vitest";
import { EngineClient, EngineError } from "../src/client";
import { encodeFrame } from "../src/protocol";
import { Transport } from "../src/transport";
import { delay } from "./helpers";

const textDecoder = new TextDecoder();

class FakeTransport implements Transport {
  sent: Record<string, unknown>[] = [];
  private dataCallback: ((chunk: Uint8Array) => void) | null = null;

  send(bytes: Uint8Array): void {
    this.sent.push(JSON.parse(textDecoder.decode(bytes.subarray(4))));
  }

  reply(payload: Record<string, unknown>): void {
    this.dataCallback?.(encodeFrame(payload));
  }

  onData(callback: (chunk: Uint8Array) => void): void {
    this.dataCallback = callback;
  }

  onClose(): void {}
  close(): void {}
}

function stateReply(id: number | undefined, version: number): Record<string, unknown> {
  const state: Record<string, unknown> = {
    type: "state",
    sessionId: 1,
    version,
    frozen: false,
    pendingCount: 0,
    violations: [],
    outcome: "Accepted",
    opCount: 0,
    tools: [],
    fragments: [],
    text: "var a = 1\n",
  };
  if (id !== undefined) state.id = id;
  return state;
}

async function openedClient(): Promise<[EngineClient, FakeTransport]> {
  const transport = new FakeTransport();
  const client = new EngineClient(transport);
  const opened = client.open("var a = 1\n", "javascript");
  await delay(0);
  transport.reply(stateReply(1, 0));
  await opened;
  return [client, transport];
}

describe("request correlation", () => {
  it("resolves the matching request on out-of-order replies", async () => {
    const [client, transport] = await openedClient();
    const a = client.revert();
    const b = client.action("watch:1", "remove");
    await delay(0);
    const [idA, idB] = transport.sent.slice(1).map((m) => m.id as number);
    transport.reply({ ...stateReply(idB, 2), outcome: "B" });
    transport.reply({ ...stateReply(idA, 3), outcome: "A" });
    expect((await a).outcome).toBe("A");
    expect((await b).outcome).toBe("B");
  });

  it("rejects with the error code from the reply", async () => {
    const [client, transport] = await openedClient();
    const request = client.revert();
    await delay(0);
    const id = transport.sent[1]!.id as number;
    transport.reply({ id, type: "error", code: "invalid_request", message: "no" });
    await expect(request).rejects.toMatchObject({ code: "invalid_request" });
    await expect(request).rejects.toBeInstanceOf(EngineError);
  });

  it("routes id-less pushes to listeners, not requests", async () => {
    const [client, transport] = await openedClient();
    const pushes: number[] = [];
    client.onState((state) => pushes.push(state.version));
    transport.reply(stateReply(undefined, 7));
    expect(pushes).toEqual([7]);
    expect(client.state!.version).toBe(7);
  });
});

describe("change pipeline", () => {
  it("keeps a single change in flight", async () => {
    const [client, transport] = await openedClient();
    const first = client.change([{ from: 0, to: 0, insert: "a" }]);
    const second = client.change([{ from: 1, to: 1, insert: "b" }]);
    await delay(0);
    expect(transport.sent.filter((m) => m.type === "change")).toHaveLength(1);
    transport.reply(stateReply(transport.sent[1]!.id as number, 1));
    await first;
    await delay(0);
    expect(transport.sent.filter((m) => m.type === "change")).toHaveLength(2);
    transport.reply(stateReply(transport.sent[2]!.id as number, 2));
    await second;
    await client.idle();
  });

  it("stamps the current version on each change", async () => {
    const [client, transport] = await openedClient();
    transport.reply(stateReply(undefined, 4));
    const request = client.change([{ from: 0, to: 0, insert: "x" }]);
    await delay(0);
    expect(transport.sent[1]).toMatchObject({ type: "change", version: 4 });
    transport.reply(stateReply(transport.sent[1]!.id as number, 5));
    await request;
  });

  it("rebases once on stale_version", async () => {
    const [client, transport] = await openedClient();
    const request = client.change([{ from: 0, to: 0, insert: "x" }]);
    await delay(0);
    const firstId = transport.sent[1]!.id as number;
    // Another client moved the session; the push lands before our error.
    transport.reply(stateReply(undefined, 3));
    transport.reply({ id: firstId, type: "error", code: "stale_version", message: "3" });
    await delay(0);
    const resent = transport.sent[2]!;
    expect(resent).toMatchObject({ type: "change", version: 3 });
    transport.reply(stateReply(resent.id as number, 4));
    expect((await request).version).toBe(4);
  });

  it("surfaces the second stale_version", async () => {
    const [client, transport] = await openedClient();
    const request = client.change([{ from: 0, to: 0, insert: "x" }]);
    await delay(0);
    transport.reply({
      id: transport.sent[1]!.id as number,
      type: "error",
      code: "stale_version",
      message: "n",
    });
    await delay(0);
    transport.reply({
      id: transport.sent[2]!.id as number,
      type: "error",
      code: "stale_version",
      message: "n",
    });
    await expect(request).rejects.toMatchObject({ code: "stale_version" });
  });

  it("sends forceApply as an empty change with the flag", async () => {
    const [client, transport] = await openedClient();
    const request = client.forceApply();
    await delay(0);
    expect(transport.sent[1]).toMatchObject({
      type: "change",
      changes: [],
      forceApply: true,
    });
    transport.reply(stateReply(transport.sent[1]!.id as number, 1));
    await request;
  });

  it("shapes action requests", async () => {
    const [client, transport] = await openedClient();
    const request = client.action("slider:9", "set", { value: 128 });
    await delay(0);
    expect(transport.sent[1]).toMatchObject({
      type: "action",
      sessionId: 1,
      instanceId: "slider:9",
      actionId: "set",
      payload: { value: 128 },
    });
    transport.reply(stateReply(transport.sent[1]!.id as number, 1));
    await request;
  });
});
