import {
  Annotation,
  EditorState,
  RangeSetBuilder,
  StateEffect,
  StateField,
} from "@codemirror/state";
import { Decoration, DecorationSet, EditorView } from "@codemirror/view";
import { EngineClient } from "./client";
import { byteToChar, diffStrings, toWireChanges } from "./offsets";
import { FragmentView, StateMessage, ToolView } from "./protocol";
import { buildWidget } from "./widgets";

/** Marks transactions that mirror engine state rather than user input. */
export const fromEngine = Annotation.define<boolean>();

const setEngineState = StateEffect.define<StateMessage>();

const engineField = StateField.define<StateMessage | null>({
  create: () => null,
  update(value, tr) {
    for (const effect of tr.effects) {
      if (effect.is(setEngineState)) return effect.value;
    }
    return value;
  },
});

/**
 * One engine session wired into a CodeMirror view.
 *
 * Local transactions relay to the engine as byte changes; engine states come
 * back as widget decorations, the freeze banner, and (for remote rewrites
 * like revert or tool actions) a reconciling document edit.  While a local
 * change is in flight the reconcile step stays off: the editor is ahead of
 * the engine, not behind it.
 */
export class EditorHost {
  readonly view: EditorView;
  readonly banner: HTMLElement;
  lastError: string | null = null;

  private inflight = 0;

  constructor(
    parent: HTMLElement,
    private client: EngineClient,
    initial: StateMessage,
  ) {
    this.banner = parent.appendChild(document.createElement("div"));
    this.banner.className = "stet-banner";
    this.banner.style.display = "none";

    const notice = this.banner.appendChild(document.createElement("span"));
    notice.className = "stet-banner-text";
    notice.textContent = "Structure broken; keep typing, apply, or revert.";
    this.bannerButton("Apply", () => this.client.forceApply());
    this.bannerButton("Revert", () => this.client.revert());

    this.view = new EditorView({
      parent,
      state: EditorState.create({
        doc: initial.text,
        extensions: [
          engineField.init(() => initial),
          EditorView.decorations.compute([engineField, "doc"], (state) =>
            this.decorate(state),
          ),
          EditorView.updateListener.of((update) => {
            if (!update.docChanged) return;
            const local = update.transactions.some(
              (tr) => tr.annotation(fromEngine) !== true,
            );
            if (local) this.relay(update.startState.doc.toString(), update);
          }),
        ],
      }),
    });

    client.onState((state) => this.applyState(state));
    this.applyState(initial);
  }

  static async connect(
    parent: HTMLElement,
    client: EngineClient,
    text: string,
    languageId: string,
  ): Promise<EditorHost> {
    const state = await client.open(text, languageId);
    const host = new EditorHost(parent, client, state);
    await client.subscribe();
    return host;
  }

  private bannerButton(label: string, run: () => Promise<StateMessage>): void {
    const button = this.banner.appendChild(document.createElement("button"));
    button.textContent = label;
    button.className = `stet-banner-${label.toLowerCase()}`;
    button.onclick = () => {
      run()
        .then((state) => this.applyState(state))
        .catch((error) => this.fail(error));
    };
  }

  // -- outgoing ------------------------------------------------------------

  private relay(
    oldText: string,
    update: { changes: { iterChanges(f: Function): void } },
  ): void {
    const ranges: { fromA: number; toA: number; inserted: string }[] = [];
    update.changes.iterChanges(
      (fromA: number, toA: number, _fromB: number, _toB: number, inserted: { toString(): string }) => {
        ranges.push({ fromA, toA, inserted: inserted.toString() });
      },
    );
    this.inflight++;
    this.client
      .change(toWireChanges(oldText, ranges))
      .catch((error) => this.fail(error))
      .finally(() => {
        this.inflight--;
        if (this.inflight === 0 && this.client.state) {
          this.applyState(this.client.state);
        }
      });
  }

  runAction(
    instanceId: string,
    actionId: string,
    payload: Record<string, unknown>,
  ): void {
    this.client
      .action(instanceId, actionId, payload)
      .then((state) => this.applyState(state))
      .catch((error) => this.fail(error));
  }

  /** Relay an edit made inside a fragment sub-editor, in display offsets. */
  fragmentEdit(
    fragment: FragmentView,
    displayFrom: number,
    displayTo: number,
    insert: string,
  ): void {
    const doc = this.view.state.doc.toString();
    const from = this.displayToByte(fragment, doc, displayFrom);
    const to = this.displayToByte(fragment, doc, displayTo);
    this.inflight++;
    this.client
      .change(insert ? [{ from, to, insert }] : [{ from, to }])
      .catch((error) => this.fail(error))
      .finally(() => {
        this.inflight--;
        if (this.inflight === 0 && this.client.state) {
          this.applyState(this.client.state);
        }
      });
  }

  /**
   * Display coordinates back to document byte offsets.  Continuation lines
   * show one indent symbol where `lineStrips[i]` stripped characters sit in
   * the document, so columns past it shift by `strips - 1`.
   */
  private displayToByte(
    fragment: FragmentView,
    doc: string,
    displayPos: number,
  ): number {
    const lines = fragment.displayText.split("\n");
    let sliceChars = 0; // offset into the document slice, in code units
    let walked = 0;
    for (let i = 0; i < lines.length; i++) {
      const line = lines[i]!;
      const strips = fragment.lineStrips[i] ?? 0;
      const lineEnd = walked + line.length;
      if (displayPos <= lineEnd) {
        const col = displayPos - walked;
        if (i === 0) {
          sliceChars += col;
        } else if (col === 0) {
          // before the indent symbol: before the stripped region
        } else {
          sliceChars += strips + (col - 1);
        }
        break;
      }
      sliceChars += i === 0 ? line.length : strips + (line.length - 1);
      sliceChars += 1; // the newline
      walked = lineEnd + 1;
    }
    const sliceStart = byteToChar(doc, fragment.range[0]);
    const encoder = new TextEncoder();
    return (
      fragment.range[0] +
      encoder.encode(doc.slice(sliceStart, sliceStart + sliceChars)).length
    );
  }

  // -- incoming ------------------------------------------------------------

  private applyState(state: StateMessage): void {
    this.banner.style.display = state.frozen ? "" : "none";

    const current = this.view.state.doc.toString();
    const effects = [setEngineState.of(state)];
    if (state.text !== current && this.inflight === 0) {
      const patch = diffStrings(current, state.text);
      this.view.dispatch({
        changes: patch ?? undefined,
        effects,
        annotations: fromEngine.of(true),
      });
      return;
    }
    this.view.dispatch({ effects, annotations: fromEngine.of(true) });
  }

  fragment(fragmentId: number | null | undefined): FragmentView | null {
    const state = this.view.state.field(engineField);
    if (!state || fragmentId == null) return null;
    return state.fragments.find((f) => f.fragmentId === fragmentId) ?? null;
  }

  engineState(): StateMessage | null {
    return this.view.state.field(engineField);
  }

  private decorate(state: EditorState): DecorationSet {
    const engine = state.field(engineField);
    if (!engine || engine.tools.length === 0) return Decoration.none;
    const doc = state.doc.toString();
    const builder = new RangeSetBuilder<Decoration>();
    const tools = [...engine.tools].sort(
      (a, b) => a.anchorRange[0] - b.anchorRange[0] || a.depth - b.depth,
    );
    const coveredTo: Record<number, number> = {};
    for (const tool of tools) {
      let from: number;
      let to: number;
      try {
        from = byteToChar(doc, tool.anchorRange[0]);
        to = byteToChar(doc, tool.anchorRange[1]);
      } catch {
        continue; // stale range during a frozen burst: plain text for now
      }
      if (tool.displayType === "Replace") {
        if ((coveredTo[tool.depth] ?? -1) > from) continue; // overlap: degrade
        const widget = this.tryWidget(tool, engine.fragments);
        if (!widget) continue;
        coveredTo[tool.depth] = to;
        builder.add(from, to, Decoration.replace({ widget }));
      } else if (tool.displayType === "Markup") {
        if (from < to) {
          builder.add(from, to, Decoration.mark({ class: "stet-markup" }));
        }
      } else {
        const widget = this.tryWidget(tool, engine.fragments);
        if (!widget) continue;
        const side = tool.displayType === "InsertBefore" ? -1 : 1;
        builder.add(
          side < 0 ? from : to,
          side < 0 ? from : to,
          Decoration.widget({ widget, side }),
        );
      }
    }
    return builder.finish();
  }

  private tryWidget(tool: ToolView, fragments: FragmentView[]) {
    try {
      return buildWidget(tool, this, fragments);
    } catch (error) {
      this.fail(error); // this widget degrades to plain text; others stand
      return null;
    }
  }

  private fail(error: unknown): void {
    this.lastError = error instanceof Error ? error.message : String(error);
  }

  destroy(): void {
    this.view.destroy();
    this.banner.remove();
  }
}
