// End-to-end editor flows against a live engine process over TCP.  Every
// flow finishes by checking the editor buffer against the engine's text:
// the two must agree byte for byte no matter which side drove the change.

import { EditorView } from "@codemirror/view";
import { afterAll, afterEach, beforeAll, describe, expect, it } from "vitest";
import { EngineClient } from "../src/client";
import { EditorHost } from "../src/editor";
import { EngineProcess, TcpTransport, spawnEngine, until } from "./helpers";

const WATCH_DOC = 'var a = 1\nvar b = ["__watch", a + 1][1]\n';
const PLACEHOLDER_DOC = "var render = __VI_PLACEHOLDER_home_view\n";
const SQL_DOC = "var q = sql`SELECT * FROM t`\n";
const SLIDER_DOC = 'var c = ["slider", 0, 255, 1, 73][1]\n';

let engine: EngineProcess;
let open: { host: EditorHost; client: EngineClient }[] = [];

beforeAll(async () => {
  engine = await spawnEngine();
});

afterAll(() => {
  engine.stop();
});

afterEach(() => {
  for (const { host, client } of open) {
    host.destroy();
    client.close();
  }
  open = [];
  document.body.innerHTML = "";
});

async function editor(doc: string): Promise<{ host: EditorHost; client: EngineClient }> {
  const client = new EngineClient(await TcpTransport.connect(engine.port));
  const parent = document.body.appendChild(document.createElement("div"));
  const host = await EditorHost.connect(parent, client, doc, "javascript");
  const made = { host, client };
  open.push(made);
  return made;
}

function bufferText(host: EditorHost): string {
  return host.view.state.doc.toString();
}

async function expectSynced(host: EditorHost, client: EngineClient): Promise<void> {
  await client.idle();
  await until(() => {
    expect(bufferText(host)).toBe(client.state!.text);
  });
}

describe("watch widget", () => {
  it("covers the marker and shows the expression fragment", async () => {
    const { host, client } = await editor(WATCH_DOC);
    const widget = host.view.dom.querySelector(".stet-tool-watch");
    expect(widget).not.toBeNull();
    expect(host.view.contentDOM.textContent).not.toContain("__watch");
    const fragment = widget!.querySelector(".stet-part-fragment .cm-content");
    expect(fragment!.textContent).toContain("a + 1");
    await expectSynced(host, client);
  });

  it("relays typing in the main buffer", async () => {
    const { host, client } = await editor(WATCH_DOC);
    const end = host.view.state.doc.length;
    host.view.dispatch({ changes: { from: end, to: end, insert: "var d = 2\n" } });
    await until(() => {
      expect(client.state!.text).toBe(WATCH_DOC + "var d = 2\n");
      expect(client.state!.outcome).toBe("Accepted");
    });
    expect(host.view.dom.querySelector(".stet-tool-watch")).not.toBeNull();
    await expectSynced(host, client);
  });

  it("relays edits made inside the fragment sub-editor", async () => {
    const { host, client } = await editor(WATCH_DOC);
    const mount = host.view.dom.querySelector(
      ".stet-part-fragment .cm-editor",
    ) as HTMLElement;
    const sub = EditorView.findFromDOM(mount)!;
    sub.dispatch({ changes: { from: 5, to: 5, insert: " + 2" } });
    await until(() => {
      expect(client.state!.text).toContain('["__watch", a + 1 + 2][1]');
    });
    await expectSynced(host, client);
    const refreshed = host.view.dom.querySelector(".stet-part-fragment .cm-content");
    expect(refreshed!.textContent).toContain("a + 1 + 2");
  });

  it("removes the marker through the widget button", async () => {
    const { host, client } = await editor(WATCH_DOC);
    const button = host.view.dom.querySelector(
      ".stet-tool-watch .stet-part-button",
    ) as HTMLButtonElement;
    button.click();
    await until(() => {
      expect(client.state!.text).toBe("var a = 1\nvar b = a + 1\n");
    });
    await expectSynced(host, client);
    expect(host.view.dom.querySelector(".stet-tool-watch")).toBeNull();
  });
});

describe("freeze banner", () => {
  it("appears on a stray quote and revert restores the bytes", async () => {
    const { host, client } = await editor(WATCH_DOC);
    expect(host.banner.style.display).toBe("none");

    const at = WATCH_DOC.indexOf("][1]");
    host.view.dispatch({ changes: { from: at, to: at, insert: '"' } });
    await until(() => {
      expect(client.state!.frozen).toBe(true);
      expect(host.banner.style.display).not.toBe("none");
    });
    expect(bufferText(host)).toContain('"][1]');
    await expectSynced(host, client);

    const revert = host.banner.querySelector(".stet-banner-revert") as HTMLButtonElement;
    revert.click();
    await until(() => {
      expect(client.state!.frozen).toBe(false);
      expect(bufferText(host)).toBe(WATCH_DOC);
    });
    expect(host.banner.style.display).toBe("none");
    await expectSynced(host, client);
  });

  it("force-applies through the banner and drops dead tools", async () => {
    const { host, client } = await editor(WATCH_DOC);
    const at = WATCH_DOC.indexOf("][1]");
    host.view.dispatch({ changes: { from: at, to: at, insert: '"' } });
    await until(() => expect(client.state!.frozen).toBe(true));

    const apply = host.banner.querySelector(".stet-banner-apply") as HTMLButtonElement;
    apply.click();
    await until(() => {
      expect(client.state!.frozen).toBe(false);
      expect(client.state!.outcome).toBe("ForceApplied");
    });
    expect(client.state!.tools).toHaveLength(0);
    expect(host.view.dom.querySelector(".stet-tool-watch")).toBeNull();
    await expectSynced(host, client);
  });
});

describe("placeholder widget", () => {
  it("shows the label and typed text replaces the marker", async () => {
    const { host, client } = await editor(PLACEHOLDER_DOC);
    const input = host.view.dom.querySelector(
      ".stet-tool-placeholder .stet-part-input",
    ) as HTMLInputElement;
    expect(input.placeholder).toBe("home view");

    input.value = "renderHome()";
    input.dispatchEvent(new Event("change"));
    await until(() => {
      expect(client.state!.text).toBe("var render = renderHome()\n");
    });
    await expectSynced(host, client);
    expect(bufferText(host)).not.toContain("__VI_PLACEHOLDER");
  });
});

describe("sql widget", () => {
  it("escapes a backtick typed into the sub-editor", async () => {
    const { host, client } = await editor(SQL_DOC);
    const input = host.view.dom.querySelector(
      ".stet-tool-sql .stet-part-plain",
    ) as HTMLInputElement;
    expect(input.value).toBe("SELECT * FROM t");

    input.value = "SELECT * FROM t`";
    input.dispatchEvent(new Event("input"));
    await until(() => {
      expect(client.state!.text).toBe("var q = sql`SELECT * FROM t\\``\n");
    });
    await expectSynced(host, client);
    const refreshed = host.view.dom.querySelector(
      ".stet-tool-sql .stet-part-plain",
    ) as HTMLInputElement;
    expect(refreshed.value).toBe("SELECT * FROM t`");
  });
});

describe("slider widget", () => {
  it("rewrites the bound number on change", async () => {
    const { host, client } = await editor(SLIDER_DOC);
    const slider = host.view.dom.querySelector(
      ".stet-tool-slider .stet-part-slider",
    ) as HTMLInputElement;
    expect(slider.value).toBe("73");

    slider.value = "128";
    slider.dispatchEvent(new Event("change"));
    await until(() => {
      expect(client.state!.text).toBe('var c = ["slider", 0, 255, 1, 128][1]\n');
    });
    await expectSynced(host, client);
  });
});
