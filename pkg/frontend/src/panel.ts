// Side panel: node details, document metadata/enrichment, full-text fetch.

import type { GraphController } from "./controller.js";
import type { GraphNode } from "./types.js";

function row(dl: HTMLElement, term: string, value: string): void {
  const dt = document.createElement("dt");
  dt.textContent = term;
  const dd = document.createElement("dd");
  dd.textContent = value;
  dl.append(dt, dd);
}

export class InspectorPanel {
  constructor(
    private root: HTMLElement,
    private controller: GraphController,
  ) {}

  clear(): void {
    this.root.replaceChildren();
  }

  show(node: GraphNode): void {
    this.clear();
    const title = document.createElement("h2");
    title.textContent = node.kind === "doc" ? "document" : (node.type ?? "indicator");
    this.root.append(title);

    const dl = document.createElement("dl");
    if (node.kind === "ind") {
      row(dl, "value", node.value ?? "");
      row(dl, "degree", String(node.degree ?? "?"));
      this.root.append(dl);
      return;
    }

    row(dl, "checksum", node.checksum ?? "");
    row(dl, "source", node.source_kind ?? "");
    if (node.source_tag) row(dl, "source tag", node.source_tag);
    if (node.language) row(dl, "language", node.language);
    if (node.topic) row(dl, "topic", node.topic);
    this.root.append(dl);

    const preview = document.createElement("pre");
    preview.textContent = node.raw_text ?? "";
    this.root.append(preview);

    if (node.text_truncated) {
      const btn = document.createElement("button");
      btn.textContent = "fetch full text";
      btn.addEventListener("click", async () => {
        const doc = await this.controller.document(node.checksum!);
        preview.textContent = doc.raw_text;
        btn.remove();
      });
      this.root.append(btn);
    }

    void this.appendDetails(node);
  }

  private async appendDetails(node: GraphNode): Promise<void> {
    try {
      const doc = await this.controller.document(node.checksum!);
      const dl = document.createElement("dl");
      if (doc.crawler_meta) {
        row(dl, "url", String(doc.crawler_meta["url"] ?? ""));
        const kw = doc.crawler_meta["keywords"];
        if (Array.isArray(kw) && kw.length) row(dl, "keywords", kw.join(", "));
      }
      if (doc.avscan_meta) {
        const verdicts = doc.avscan_meta["engine_verdicts"] as Record<string, string> | undefined;
        if (verdicts) {
          row(dl, "verdicts", Object.entries(verdicts).map(([k, v]) => `${k}: ${v}`).join("; "));
        }
        const fname = doc.avscan_meta["scanned_file_name"];
        if (fname) row(dl, "scanned file", String(fname));
      }
      if (doc.enrichment) {
        const techs = doc.enrichment.techniques.map((t) => t.technique_id).join(", ");
        if (techs) row(dl, "techniques", techs);
      }
      if (dl.childNodes.length) this.root.append(dl);
    } catch {
      // details are best-effort; the preview already rendered
    }
  }
}
