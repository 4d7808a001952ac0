// State grid, enabled-transition list, trace timeline and toasts.
// Everything rendered here came from a protocol response.

import type { EnabledStep, InspectPayload } from "./types";

export function renderStateGrid(
  container: HTMLElement,
  snapshot: InspectPayload,
  previous: InspectPayload | null,
): void {
  container.innerHTML = "";
  const table = document.createElement("table");
  table.className = "state-grid";
  for (const [instance, vars] of Object.entries(snapshot.state)) {
    const row = document.createElement("tr");
    const head = document.createElement("th");
    head.textContent = instance;
    row.appendChild(head);
    for (const [qualified, value] of Object.entries(vars)) {
      const cell = document.createElement("td");
      cell.dataset.var = qualified;
      const name = qualified.slice(instance.length + 1);
      cell.textContent = `${name} = ${value}`;
      const before = previous?.state[instance]?.[qualified];
      if (before !== undefined && before !== value) {
        cell.classList.add("changed");
        cell.title = `was ${before}`;
      }
      row.appendChild(cell);
    }
    table.appendChild(row);
  }
  container.appendChild(table);
  if (snapshot.deadlock) {
    const note = document.createElement("div");
    note.className = "deadlock-note";
    note.textContent = "deadlock: no enabled transitions (system stutters)";
    container.appendChild(note);
  }
}

export function renderEnabled(
  container: HTMLElement,
  enabled: EnabledStep[],
  onPick: (step: EnabledStep) => void,
): void {
  container.innerHTML = "";
  if (!enabled.length) {
    const empty = document.createElement("div");
    empty.className = "enabled-empty";
    empty.textContent = "no enabled transitions";
    container.appendChild(empty);
    return;
  }
  const list = document.createElement("ul");
  list.className = "enabled-list";
  for (const step of enabled) {
    const item = document.createElement("li");
    const button = document.createElement("button");
    button.type = "button";
    button.dataset.step = `${step.sender}.${step.label}`;
    const data = Object.entries(step.data)
      .map(([k, v]) => `${k}=${v}`)
      .join(", ");
    button.textContent = `${step.sender}.${step.label} on ${step.channel} (${data})`;
    button.title = `admits receivers with ${step.admits}`;
    button.addEventListener("click", () => onPick(step));
    item.appendChild(button);
    list.appendChild(item);
  }
  container.appendChild(list);
}

export interface TraceEntry {
  description: string;
  stutter: boolean;
}

export function renderTrace(
  container: HTMLElement,
  entries: TraceEntry[],
  onReplay: (index: number) => void,
): void {
  container.innerHTML = "";
  if (!entries.length) {
    container.textContent = "trace: (empty)";
    return;
  }
  const list = document.createElement("ol");
  list.className = "trace-list";
  entries.forEach((entry, index) => {
    const item = document.createElement("li");
    const button = document.createElement("button");
    button.type = "button";
    button.dataset.traceIndex = String(index);
    button.textContent = entry.stutter ? "(stutter)" : entry.description;
    button.title = "replay to this point (server side)";
    button.addEventListener("click", () => onReplay(index));
    item.appendChild(button);
    list.appendChild(item);
  });
  container.appendChild(list);
}

export function toast(container: HTMLElement, message: string,
                      kind: "error" | "info", details: string[] = []): void {
  container.innerHTML = "";
  const box = document.createElement("div");
  box.className = `toast toast-${kind}`;
  const head = document.createElement("div");
  head.className = "toast-message";
  head.textContent = message;
  box.appendChild(head);
  if (details.length) {
    const list = document.createElement("ul");
    for (const line of details) {
      const item = document.createElement("li");
      item.textContent = line;
      list.appendChild(item);
    }
    box.appendChild(list);
  }
  container.appendChild(box);
}

export function clearToast(container: HTMLElement): void {
  container.innerHTML = "";
}
