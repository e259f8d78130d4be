// Bootstrap: wire the toolbar, canvas, and inspector to the controller.

import { ApiClient } from "./api.js";
import { INDICATOR_TYPES, TYPE_COLORS, DOCUMENT_COLOR } from "./colors.js";
import { GraphController } from "./controller.js";
import { InspectorPanel } from "./panel.js";
import { GraphRenderer } from "./render.js";
import type { Filters } from "./types.js";
import { NO_FILTERS } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function readFilters(): Filters {
  const edgeTypes = [...document.querySelectorAll<HTMLInputElement>("#edge-filters input:checked")].map(
    (box) => box.value,
  );
  const language = el<HTMLInputElement>("filter-language").value.trim();
  const topic = el<HTMLSelectElement>("filter-topic").value;
  return {
    edgeTypes: edgeTypes.length ? edgeTypes : null,
    language: language || null,
    topic: topic || null,
    sourceTags: null,
  };
}

function main(): void {
  const controller = new GraphController(new ApiClient(""));
  const renderer = new GraphRenderer(el<HTMLElement>("canvas") as unknown as SVGSVGElement, (id) => {
    controller.select(id);
    void controller.expand(id);
  });
  const panel = new InspectorPanel(el("inspector"), controller);
  const status = el("status");

  controller.onChange((state) => {
    renderer.update(state);
    if (state.error) {
      status.textContent = state.error;
      status.classList.add("error");
    } else {
      const counts = `${state.nodes.size} nodes, ${state.edges.size} edges`;
      status.textContent = state.seed ? `${state.seed.type}:${state.seed.value} · ${counts}` : "";
      status.classList.remove("error");
    }
    const selected = state.selected ? state.nodes.get(state.selected) : null;
    if (selected) panel.show(selected);
    else panel.clear();
  });

  const typeSelect = el<HTMLSelectElement>("search-type");
  for (const t of INDICATOR_TYPES) {
    const opt = document.createElement("option");
    opt.value = t;
    opt.textContent = t;
    typeSelect.append(opt);
  }

  const legend = el("legend");
  const docSwatch = document.createElement("span");
  docSwatch.className = "swatch";
  docSwatch.style.background = DOCUMENT_COLOR;
  legend.append(docSwatch, "document ");
  const edgeFilterBox = el("edge-filters");
  for (const [type, color] of Object.entries(TYPE_COLORS)) {
    const swatch = document.createElement("span");
    swatch.className = "swatch";
    swatch.style.background = color;
    legend.append(swatch, `${type} `);
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.value = type;
    label.append(box, type);
    edgeFilterBox.append(label);
  }

  el<HTMLFormElement>("search-form").addEventListener("submit", (ev) => {
    ev.preventDefault();
    const value = el<HTMLInputElement>("search-value").value.trim();
    if (value) void controller.search(typeSelect.value, value);
  });

  el<HTMLButtonElement>("apply-filters").addEventListener("click", () => {
    void controller.setFilters(readFilters());
  });
  el<HTMLButtonElement>("clear-filters").addEventListener("click", () => {
    for (const box of document.querySelectorAll<HTMLInputElement>("#edge-filters input")) box.checked = false;
    el<HTMLInputElement>("filter-language").value = "";
    el<HTMLSelectElement>("filter-topic").value = "";
    void controller.setFilters({ ...NO_FILTERS });
  });
}

main();
