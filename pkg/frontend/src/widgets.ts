import { EditorState } from "@codemirror/state";
import { EditorView, WidgetType } from "@codemirror/view";
import type { EditorHost } from "./editor";
import { charToByte, diffStrings } from "./offsets";
import { FragmentView, ToolView, ViewPart } from "./protocol";

export function buildWidget(
  tool: ToolView,
  host: EditorHost,
  fragments: FragmentView[],
): WidgetType {
  return new ToolWidget(tool, host, fragments);
}

/**
 * Inline rendering for one tool instance.  The layout comes from the
 * instance's view parts, so one widget class covers every definition; the
 * signature includes resolved fragment text so an unchanged tool keeps its
 * DOM (and any nested editor state) across engine updates.
 */
class ToolWidget extends WidgetType {
  private signature: string;
  private nested: EditorView[] = [];

  constructor(
    private tool: ToolView,
    private host: EditorHost,
    private fragments: FragmentView[],
  ) {
    super();
    this.signature = JSON.stringify([
      tool.instanceId,
      tool.anchorRange,
      tool.view,
      tool.view
        .filter((p) => p.type === "fragment")
        .map((p) => this.fragmentById(p.fragmentId)?.displayText),
    ]);
  }

  private fragmentById(id: number | null | undefined): FragmentView | null {
    if (id == null) return null;
    return this.fragments.find((f) => f.fragmentId === id) ?? null;
  }

  override eq(other: WidgetType): boolean {
    return other instanceof ToolWidget && other.signature === this.signature;
  }

  override toDOM(): HTMLElement {
    const dom = document.createElement("span");
    dom.className = `stet-tool stet-tool-${this.tool.definitionId}`;
    dom.dataset.instance = this.tool.instanceId;
    for (const part of this.tool.view) this.renderPart(dom, part);
    return dom;
  }

  override destroy(): void {
    for (const view of this.nested) view.destroy();
    this.nested = [];
  }

  private act(actionId: string, payload: Record<string, unknown> = {}): void {
    this.host.runAction(this.tool.instanceId, actionId, payload);
  }

  private renderPart(dom: HTMLElement, part: ViewPart): void {
    switch (part.type) {
      case "label": {
        const span = dom.appendChild(document.createElement("span"));
        span.className = "stet-part-label";
        span.textContent = String(part.text ?? "");
        break;
      }
      case "value": {
        const span = dom.appendChild(document.createElement("span"));
        span.className = "stet-part-value";
        span.textContent = part.value == null ? "?" : JSON.stringify(part.value);
        break;
      }
      case "button": {
        const button = dom.appendChild(document.createElement("button"));
        button.className = "stet-part-button";
        button.textContent = String(part.label ?? part.actionId);
        button.onclick = () => this.act(part.actionId as string);
        break;
      }
      case "input": {
        // "continue typing": the widget swallows keystrokes, the action
        // replaces the anchor text with whatever was entered.
        const input = dom.appendChild(document.createElement("input"));
        input.className = "stet-part-input";
        input.placeholder = String(part.label ?? "");
        const send = () => this.act(part.actionId as string, { text: input.value });
        input.addEventListener("change", send);
        input.addEventListener("keydown", (event) => {
          if ((event as KeyboardEvent).key === "Enter") send();
        });
        break;
      }
      case "plainString": {
        this.renderPlainString(dom, part);
        break;
      }
      case "slider": {
        const input = dom.appendChild(document.createElement("input"));
        input.className = "stet-part-slider";
        input.type = "range";
        input.min = String(part.min);
        input.max = String(part.max);
        input.step = String(part.step);
        input.value = String(part.value);
        const send = () =>
          this.act(part.actionId as string, { value: Number(input.value) });
        input.addEventListener("change", send);
        input.addEventListener("input", send);
        break;
      }
      case "color": {
        this.renderColor(dom, part);
        break;
      }
      case "fragment": {
        this.renderFragment(dom, part);
        break;
      }
      default: {
        const span = dom.appendChild(document.createElement("span"));
        span.className = "stet-part-unknown";
        span.textContent = String(part.type);
      }
    }
  }

  private renderPlainString(dom: HTMLElement, part: ViewPart): void {
    const input = dom.appendChild(document.createElement("input"));
    input.className = "stet-part-plain";
    input.value = String(part.text ?? "");
    let shown = input.value;
    const send = () => {
      const before = shown;
      const patch = diffStrings(before, input.value);
      if (!patch) return;
      shown = input.value;
      this.act(part.actionId as string, {
        from: charToByte(before, patch.from),
        to: charToByte(before, patch.to),
        insert: patch.insert,
      });
    };
    input.addEventListener("change", send);
    input.addEventListener("input", send);
  }

  private renderColor(dom: HTMLElement, part: ViewPart): void {
    const values = (part.values as number[] | undefined) ?? [];
    const swatch = dom.appendChild(document.createElement("span"));
    swatch.className = "stet-part-color";
    swatch.style.backgroundColor = `rgb(${values.join(",")})`;
    const names = ["r", "g", "b"];
    values.forEach((value, i) => {
      const input = dom.appendChild(document.createElement("input"));
      input.className = `stet-part-color-${names[i]}`;
      input.type = "number";
      input.value = String(value);
      input.addEventListener("change", () => {
        this.act(part.actionId as string, {
          binding: names[i],
          value: Number(input.value),
        });
      });
    });
  }

  private renderFragment(dom: HTMLElement, part: ViewPart): void {
    const fragment = this.fragmentById(part.fragmentId);
    const mount = dom.appendChild(document.createElement("span"));
    mount.className = "stet-part-fragment";
    if (!fragment) {
      mount.textContent = "";
      return;
    }
    const sub = new EditorView({
      parent: mount,
      state: EditorState.create({
        doc: fragment.displayText,
        extensions: [
          EditorView.updateListener.of((update) => {
            if (update.docChanged) {
              this.relayFragment(fragment, update);
            }
          }),
        ],
      }),
    });
    this.nested.push(sub);
  }

  /**
   * Edits land against the display text the engine last sent; offsets map
   * through the fragment's strip table.  Ranges go out in descending order
   * so each one still addresses the original document.
   */
  private relayFragment(
    fragment: FragmentView,
    update: { changes: { iterChanges(f: Function): void } },
  ): void {
    const edits: { from: number; to: number; insert: string }[] = [];
    update.changes.iterChanges(
      (fromA: number, toA: number, _b: number, _c: number, inserted: { toString(): string }) => {
        edits.push({ from: fromA, to: toA, insert: inserted.toString() });
      },
    );
    edits.sort((a, b) => b.from - a.from);
    for (const edit of edits) {
      this.host.fragmentEdit(fragment, edit.from, edit.to, edit.insert);
    }
  }
}
