// Application wiring.  The UI holds no transition semantics: every
// displayed state, enabled step and verdict is a protocol response, and
// trace replay re-runs the recorded commands on a fresh server session
// (same seed, so the run is identical) instead of recomputing anything
// locally.

import { highlight } from "./highlight";
import { renderAutomaton, highlightFired, highlightStates } from "./automata";
import {
  clearToast,
  renderEnabled,
  renderStateGrid,
  renderTrace,
  toast,
} from "./panels";
import type {
  AutomatonDump,
  InspectPayload,
  LoadResponse,
  StepCommand,
  StepResponse,
  WireResponse,
} from "./types";
import { WireClient, WireFailure } from "./wire";

interface TraceRecord {
  command: StepCommand;
  snapshot: InspectPayload;
  description: string;
  stutter: boolean;
}

const SKELETON = `
  <header class="bar">
    <strong>rmas workbench</strong>
    <span id="endpoint-label"></span>
  </header>
  <section class="editor-pane">
    <div class="editor-wrap">
      <pre id="editor-highlight" aria-hidden="true"></pre>
      <textarea id="editor" spellcheck="false" placeholder="# paste a model here"></textarea>
    </div>
    <div class="editor-side">
      <button id="load-btn" type="button">Load model</button>
      <label>seed <input id="seed-input" type="number" value="0" /></label>
      <button id="new-session-btn" type="button" disabled>New session</button>
      <div id="warnings-panel"></div>
    </div>
  </section>
  <div id="toast-area"></div>
  <section id="automata-row"></section>
  <section class="stepper">
    <button id="random-btn" type="button" disabled>Random step</button>
    <input id="constraint-input" placeholder="next(client1-cLink) == c" />
    <button id="constrained-btn" type="button" disabled>Constrained step</button>
  </section>
  <section class="panels">
    <div>
      <h3>State</h3>
      <div id="state-grid"></div>
    </div>
    <div>
      <h3>Enabled transitions</h3>
      <div id="enabled-panel"></div>
    </div>
    <div>
      <h3>Trace</h3>
      <div id="trace-panel"></div>
      <div id="replay-panel"></div>
    </div>
  </section>
`;

export class App {
  readonly client: WireClient;
  private root: HTMLElement;
  private session: string | null = null;
  private seed = 0;
  private automata: AutomatonDump[] = [];
  private instanceTypes: Record<string, string> = {};
  private current: InspectPayload | null = null;
  private trace: TraceRecord[] = [];

  constructor(root: HTMLElement, endpoint: string, fetchImpl?: typeof fetch) {
    this.root = root;
    this.client = new WireClient(endpoint, fetchImpl);
    root.innerHTML = SKELETON;
    this.el("endpoint-label").textContent = endpoint;
    this.bindEvents();
  }

  private el(id: string): HTMLElement {
    const node = this.root.querySelector(`#${id}`);
    if (!node) throw new Error(`missing #${id}`);
    return node as HTMLElement;
  }

  private bindEvents(): void {
    const editor = this.el("editor") as HTMLTextAreaElement;
    editor.addEventListener("input", () => this.refreshHighlight());
    editor.addEventListener("scroll", () => {
      const pre = this.el("editor-highlight");
      pre.scrollTop = editor.scrollTop;
      pre.scrollLeft = editor.scrollLeft;
    });
    this.el("load-btn").addEventListener("click", () => {
      void this.loadModel(editor.value);
    });
    this.el("new-session-btn").addEventListener("click", () => {
      const seed = Number((this.el("seed-input") as HTMLInputElement).value) || 0;
      void this.newSession(seed);
    });
    this.el("random-btn").addEventListener("click", () => {
      void this.stepRandom();
    });
    this.el("constrained-btn").addEventListener("click", () => {
      const text = (this.el("constraint-input") as HTMLInputElement).value;
      void this.stepConstrained(text);
    });
  }

  setModelText(text: string): void {
    (this.el("editor") as HTMLTextAreaElement).value = text;
    this.refreshHighlight();
  }

  private refreshHighlight(): void {
    const editor = this.el("editor") as HTMLTextAreaElement;
    this.el("editor-highlight").innerHTML = highlight(editor.value) + "\n";
  }

  async loadModel(text: string): Promise<LoadResponse> {
    clearToast(this.el("toast-area"));
    let loaded: LoadResponse;
    try {
      loaded = await this.client.expectOk<LoadResponse>({ cmd: "load", model: text });
    } catch (err) {
      this.showError(err);
      throw err;
    }
    this.instanceTypes = loaded.instance_types;
    this.session = null;
    this.trace = [];
    this.current = null;

    const warnings = this.el("warnings-panel");
    warnings.innerHTML = "";
    for (const w of loaded.warnings) {
      const line = document.createElement("div");
      line.className = "warning-line";
      line.textContent = `warning[${w.code}] ${w.message}`;
      warnings.appendChild(line);
    }

    const automata = await this.client.expectOk<WireResponse & { automata: AutomatonDump[] }>(
      { cmd: "automata" },
    );
    this.automata = automata.automata;
    const row = this.el("automata-row");
    row.innerHTML = "";
    for (const dump of this.automata) {
      const panel = document.createElement("div");
      panel.className = "automaton-panel";
      renderAutomaton(panel, dump);
      row.appendChild(panel);
    }
    (this.el("new-session-btn") as HTMLButtonElement).disabled = false;
    return loaded;
  }

  async newSession(seed: number): Promise<void> {
    clearToast(this.el("toast-area"));
    const out = await this.client.expectOk<WireResponse & { inspect: InspectPayload }>(
      { cmd: "new", seed },
    );
    this.session = out.session ?? null;
    this.seed = seed;
    this.trace = [];
    this.current = null;
    this.showSnapshot(out.inspect);
    (this.el("random-btn") as HTMLButtonElement).disabled = false;
    (this.el("constrained-btn") as HTMLButtonElement).disabled = false;
  }

  async stepRandom(): Promise<StepResponse> {
    return this.step({ mode: "random" });
  }

  async stepConstrained(constraint: string): Promise<StepResponse> {
    return this.step({ mode: "constrained", constraint });
  }

  private async step(command: StepCommand): Promise<StepResponse> {
    if (!this.session) throw new Error("no live session");
    clearToast(this.el("toast-area"));
    let out: StepResponse;
    try {
      out = await this.client.expectOk<StepResponse>({
        cmd: "step",
        session: this.session,
        mode: command.mode,
        ...(command.constraint !== undefined
          ? { constraint: command.constraint }
          : {}),
      });
    } catch (err) {
      this.showError(err);
      throw err;
    }
    const description = out.fired
      ? `${out.fired.sender}.${out.fired.label}` +
        (out.fired.received.length ? ` -> ${out.fired.received.join(", ")}` : "")
      : "(stutter)";
    this.trace.push({
      command,
      snapshot: out.inspect,
      description,
      stutter: out.stutter,
    });
    this.showSnapshot(out.inspect);
    if (out.fired) {
      const fired = [
        { agent: this.agentOf(out.fired.sender), label: out.fired.label },
        ...out.fired.received.map((entry) => {
          const [instance, label] = splitQualified(entry);
          return { agent: this.agentOf(instance), label };
        }),
      ];
      highlightFired(this.el("automata-row"), fired);
    } else {
      highlightFired(this.el("automata-row"), []);
    }
    return out;
  }

  /** Server-side replay: run the recorded commands up to `index` on a
   * fresh session with the same seed, then display that inspect. */
  async replayTo(index: number): Promise<boolean> {
    const upto = this.trace.slice(0, index + 1);
    const fresh = await this.client.expectOk<WireResponse & { inspect: InspectPayload }>(
      { cmd: "new", seed: this.seed },
    );
    const sid = fresh.session;
    let snapshot = fresh.inspect;
    for (const entry of upto) {
      const out = await this.client.expectOk<StepResponse>({
        cmd: "step",
        session: sid,
        mode: entry.command.mode,
        ...(entry.command.constraint !== undefined
          ? { constraint: entry.command.constraint }
          : {}),
      });
      snapshot = out.inspect;
    }
    const recorded = upto[upto.length - 1].snapshot;
    const matches = JSON.stringify(snapshot.state) === JSON.stringify(recorded.state);
    const panel = this.el("replay-panel");
    panel.innerHTML = "";
    const note = document.createElement("div");
    note.className = matches ? "replay-ok" : "replay-mismatch";
    note.textContent = matches
      ? `replay of step ${index} matches the recorded state`
      : `replay of step ${index} DIVERGES from the recorded state`;
    panel.appendChild(note);
    const grid = document.createElement("div");
    renderStateGrid(grid, snapshot, null);
    panel.appendChild(grid);
    return matches;
  }

  private showSnapshot(snapshot: InspectPayload): void {
    const previous = this.current;
    this.current = snapshot;
    renderStateGrid(this.el("state-grid"), snapshot, previous);
    renderEnabled(this.el("enabled-panel"), snapshot.enabled, (step) => {
      void this.stepConstrained(`${step.sender}-${step.label}`);
    });
    renderTrace(
      this.el("trace-panel"),
      this.trace.map((t) => ({ description: t.description, stutter: t.stutter })),
      (index) => {
        void this.replayTo(index);
      },
    );
    const occupied = Object.entries(snapshot.state).map(([instance, vars]) => ({
      agent: this.agentOf(instance),
      state: vars[`${instance}-st`],
    }));
    highlightStates(this.el("automata-row"), occupied);
  }

  private agentOf(instance: string): string {
    return this.instanceTypes[instance] ?? instance;
  }

  private showError(err: unknown): void {
    const area = this.el("toast-area");
    if (err instanceof WireFailure) {
      toast(area, `${err.code}: ${err.message}`, "error", err.nearMisses);
    } else {
      toast(area, String(err), "error");
    }
  }

  inspectSnapshot(): InspectPayload | null {
    return this.current;
  }

  traceLength(): number {
    return this.trace.length;
  }
}

function splitQualified(entry: string): [string, string] {
  const i = entry.indexOf("-");
  return [entry.slice(0, i), entry.slice(i + 1)];
}

export function initApp(root: HTMLElement, endpoint: string,
                        fetchImpl?: typeof fetch): App {
  return new App(root, endpoint, fetchImpl);
}
