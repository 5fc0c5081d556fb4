import { EngineClient } from "../src/client";
import { EditorHost } from "../src/editor";
import { WebSocketTransport } from "../src/transport";

const DOC = [
  "var threshold = 120",
  'var tint = ["slider", 0, 255, 1, 73][1]',
  'var doubled = ["__watch", threshold * 2][1]',
  "var onEmpty = __VI_PLACEHOLDER_empty_state",
  "var query = sql`SELECT name, hits FROM pages WHERE hits > 10`",
  "",
].join("\n");

async function boot(): Promise<void> {
  const parent = document.getElementById("editor")!;
  const transport = new WebSocketTransport(`ws://${location.hostname}:9880`);
  try {
    await transport.ready();
  } catch {
    parent.textContent = "No bridge on port 9880; run `npm run bridge` first.";
    return;
  }
  const client = new EngineClient(transport);
  await EditorHost.connect(parent as HTMLElement, client, DOC, "javascript");
}

boot();
