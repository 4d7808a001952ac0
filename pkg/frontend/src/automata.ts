// Interactive SVG rendering of structure automata from the JSON dump.
// Nodes sit on a circle; parallel edges fan out; fired edges pulse.

import type { AutomatonDump } from "./types";

const SVG_NS = "http://www.w3.org/2000/svg";

interface Layout {
  cx: number;
  cy: number;
  radius: number;
  positions: Map<string, { x: number; y: number }>;
}

function layout(dump: AutomatonDump, size: number): Layout {
  const cx = size / 2;
  const cy = size / 2;
  const radius = size / 2 - 56;
  const positions = new Map<string, { x: number; y: number }>();
  const n = dump.states.length;
  dump.states.forEach((state, i) => {
    const angle = (2 * Math.PI * i) / n - Math.PI / 2;
    positions.set(state, {
      x: cx + (n === 1 ? 0 : radius * Math.cos(angle)),
      y: cy + (n === 1 ? 0 : radius * Math.sin(angle)),
    });
  });
  return { cx, cy, radius, positions };
}

function el<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  return node;
}

export function renderAutomaton(container: HTMLElement, dump: AutomatonDump): void {
  container.innerHTML = "";
  container.dataset.agent = dump.agent;

  const title = document.createElement("h3");
  title.textContent = `${dump.agent} — ${dump.states.length} states, ${dump.edges.length} edges`;
  container.appendChild(title);

  const size = Math.max(240, dump.states.length * 78);
  const svg = el("svg", {
    viewBox: `0 0 ${size} ${size}`,
    width: "100%",
    role: "img",
  });
  svg.dataset.agent = dump.agent;
  const lay = layout(dump, size);

  // group parallel edges so their curves fan out
  const groups = new Map<string, number>();
  for (const edge of dump.edges) {
    const key = `${edge.source}->${edge.target}`;
    groups.set(key, (groups.get(key) ?? 0) + 1);
  }
  const seen = new Map<string, number>();

  for (const edge of dump.edges) {
    const key = `${edge.source}->${edge.target}`;
    const index = seen.get(key) ?? 0;
    seen.set(key, index + 1);
    const from = lay.positions.get(edge.source)!;
    const to = lay.positions.get(edge.target)!;
    const group = el("g", { class: `edge edge-${edge.kind}` });
    group.dataset.edge = edge.label;
    group.dataset.agent = dump.agent;

    let labelX: number;
    let labelY: number;
    if (edge.source === edge.target) {
      const loopR = 22 + index * 12;
      group.appendChild(el("path", {
        d: `M ${from.x} ${from.y - 18} a ${loopR} ${loopR} 0 1 1 ${0.1} 0`,
        fill: "none",
        class: "edge-line",
      }));
      labelX = from.x;
      labelY = from.y - 2 * loopR - 24;
    } else {
      const mx = (from.x + to.x) / 2;
      const my = (from.y + to.y) / 2;
      const dx = to.x - from.x;
      const dy = to.y - from.y;
      const len = Math.hypot(dx, dy) || 1;
      const bend = 18 + index * 16;
      const ox = (-dy / len) * bend;
      const oy = (dx / len) * bend;
      group.appendChild(el("path", {
        d: `M ${from.x} ${from.y} Q ${mx + ox} ${my + oy} ${to.x} ${to.y}`,
        fill: "none",
        class: "edge-line",
        "marker-end": "url(#arrow)",
      }));
      labelX = mx + ox * 0.9;
      labelY = my + oy * 0.9;
    }
    const label = el("text", {
      x: String(labelX),
      y: String(labelY),
      "text-anchor": "middle",
      class: "edge-label",
    });
    label.textContent = edge.label;
    const tip = el("title", {});
    tip.textContent = edge.text;
    group.appendChild(tip);
    group.appendChild(label);
    svg.appendChild(group);
  }

  const defs = el("defs", {});
  const marker = el("marker", {
    id: "arrow", viewBox: "0 0 10 10", refX: "9", refY: "5",
    markerWidth: "7", markerHeight: "7", orient: "auto-start-reverse",
  });
  marker.appendChild(el("path", { d: "M 0 0 L 10 5 L 0 10 z" }));
  defs.appendChild(marker);
  svg.appendChild(defs);

  for (const state of dump.states) {
    const pos = lay.positions.get(state)!;
    const group = el("g", { class: "node" });
    group.dataset.node = state;
    group.dataset.agent = dump.agent;
    group.appendChild(el("circle", {
      cx: String(pos.x), cy: String(pos.y), r: "16", class: "node-circle",
    }));
    if (state === dump.initial) {
      group.appendChild(el("circle", {
        cx: String(pos.x), cy: String(pos.y), r: "20", class: "node-initial",
        fill: "none",
      }));
    }
    const text = el("text", {
      x: String(pos.x), y: String(pos.y + 4), "text-anchor": "middle",
      class: "node-label",
    });
    text.textContent = state;
    group.appendChild(text);
    svg.appendChild(group);
  }

  container.appendChild(svg);
}

/** Badge the edges fired by the last joint step; clears previous badges. */
export function highlightFired(
  root: HTMLElement,
  fired: { agent: string; label: string }[],
): void {
  for (const old of Array.from(root.querySelectorAll(".edge.fired"))) {
    old.classList.remove("fired");
  }
  for (const { agent, label } of fired) {
    const selector = `[data-agent="${agent}"][data-edge="${label}"]`;
    for (const hit of Array.from(root.querySelectorAll(selector))) {
      hit.classList.add("fired");
    }
  }
}

/** Mark the control states currently occupied (one per instance). */
export function highlightStates(
  root: HTMLElement,
  occupied: { agent: string; state: string }[],
): void {
  for (const old of Array.from(root.querySelectorAll(".node.current"))) {
    old.classList.remove("current");
  }
  for (const { agent, state } of occupied) {
    const selector = `.node[data-agent="${agent}"][data-node="${state}"]`;
    for (const hit of Array.from(root.querySelectorAll(selector))) {
      hit.classList.add("current");
    }
  }
}
