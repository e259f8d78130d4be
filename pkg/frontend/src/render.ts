// SVG rendering of the loaded subgraph over the force layout.

import { nodeColor } from "./colors.js";
import { ForceLayout } from "./force.js";
import type { ViewState } from "./state.js";
import { edgeKey } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";

function shortLabel(state: ViewState, id: string): string {
  const node = state.nodes.get(id);
  if (!node) return id;
  if (node.kind === "doc") return (node.checksum ?? "").slice(0, 8);
  const value = node.value ?? "";
  return value.length > 18 ? value.slice(0, 16) + "…" : value;
}

export class GraphRenderer {
  private layout: ForceLayout;
  private running = false;
  private state: ViewState | null = null;

  constructor(
    private svg: SVGSVGElement,
    private onNodeClick: (id: string) => void,
  ) {
    const rect = svg.getBoundingClientRect();
    this.layout = new ForceLayout(rect.width || 900, rect.height || 600);
  }

  update(state: ViewState): void {
    this.state = state;
    const ids = [...state.nodes.keys()];
    const edges = [...state.edges.values()].map((e) => ({
      source: `doc:${e.doc}`,
      target: `${e.type}:${e.value}`,
    }));
    this.layout.sync(ids, edges);
    if (!this.running) {
      this.running = true;
      this.loop(240);
    }
  }

  private loop(ticksLeft: number): void {
    this.layout.tick();
    this.draw();
    if (ticksLeft > 0) {
      requestAnimationFrame(() => this.loop(ticksLeft - 1));
    } else {
      this.running = false;
    }
  }

  private draw(): void {
    const state = this.state;
    if (!state) return;
    this.svg.replaceChildren();
    const edgeLayer = document.createElementNS(SVG_NS, "g");
    const nodeLayer = document.createElementNS(SVG_NS, "g");
    this.svg.append(edgeLayer, nodeLayer);

    for (const edge of state.edges.values()) {
      const s = this.layout.nodes.get(`doc:${edge.doc}`);
      const t = this.layout.nodes.get(`${edge.type}:${edge.value}`);
      if (!s || !t) continue;
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(s.x));
      line.setAttribute("y1", String(s.y));
      line.setAttribute("x2", String(t.x));
      line.setAttribute("y2", String(t.y));
      line.setAttribute("stroke", nodeColor("ind", edge.type));
      line.setAttribute("stroke-width", edge.occurrences > 1 ? "2.5" : "1.4");
      line.setAttribute("opacity", "0.65");
      line.dataset.key = edgeKey(edge);
      edgeLayer.append(line);
    }

    for (const [id, node] of state.nodes) {
      const pos = this.layout.nodes.get(id);
      if (!pos) continue;
      const g = document.createElementNS(SVG_NS, "g");
      g.classList.add("node");
      g.dataset.id = id;
      const circle = document.createElementNS(SVG_NS, "circle");
      circle.setAttribute("cx", String(pos.x));
      circle.setAttribute("cy", String(pos.y));
      circle.setAttribute("r", node.kind === "doc" ? "16" : "11");
      circle.setAttribute("fill", nodeColor(node.kind, node.type));
      if (id === state.selected) circle.classList.add("selected");
      if (id === state.seedId) circle.classList.add("seed");
      g.append(circle);

      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("x", String(pos.x));
      label.setAttribute("y", String(pos.y + (node.kind === "doc" ? 30 : 24)));
      label.classList.add("label");
      label.textContent = shortLabel(state, id);
      g.append(label);

      if (node.kind === "ind" && node.degree != null) {
        const badge = document.createElementNS(SVG_NS, "text");
        badge.setAttribute("x", String(pos.x));
        badge.setAttribute("y", String(pos.y + 4));
        badge.classList.add("badge");
        badge.dataset.role = "degree-badge";
        badge.textContent = String(node.degree);
        g.append(badge);
      }
      if (state.truncatedExpansions.has(id)) {
        const warn = document.createElementNS(SVG_NS, "text");
        warn.setAttribute("x", String(pos.x + 14));
        warn.setAttribute("y", String(pos.y - 12));
        warn.classList.add("truncated");
        warn.textContent = "⚠";
        g.append(warn);
      }
      g.addEventListener("click", () => this.onNodeClick(id));
      nodeLayer.append(g);
    }
  }
}
