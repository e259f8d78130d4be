// Orchestrates API calls against the pure state: deduplicates in-flight
// expansions per node and discards responses that arrive for stale
// filter settings.

import { ApiClient, ApiError } from "./api.js";
import * as state from "./state.js";
import type { Filters } from "./types.js";
import type { ViewState } from "./state.js";

function filterSignature(filters: Filters): string {
  return JSON.stringify(filters);
}

export class GraphController {
  state: ViewState = state.initialState();
  private pending = new Set<string>();
  private listeners: ((s: ViewState) => void)[] = [];

  constructor(private api: ApiClient) {}

  onChange(fn: (s: ViewState) => void): void {
    this.listeners.push(fn);
  }

  private commit(next: ViewState): void {
    this.state = next;
    for (const fn of this.listeners) fn(next);
  }

  async search(type: string, value: string): Promise<void> {
    this.commit(state.startSearch(this.state, type, value));
    const sig = filterSignature(this.state.filters);
    try {
      const resp = await this.api.indicatorNeighborhood(type, value, 1, this.state.filters);
      if (!this.sameInvestigation(type, value, sig)) return; // superseded
      this.commit(state.applySearchResult(this.state, resp));
    } catch (err) {
      if (!this.sameInvestigation(type, value, sig)) return;
      this.commit(state.applyError(this.state, describe(err)));
    }
  }

  private sameInvestigation(type: string, value: string, sig: string): boolean {
    return (
      this.state.seed !== null &&
      this.state.seed.type === type &&
      this.state.seed.value === value &&
      filterSignature(this.state.filters) === sig
    );
  }

  /** Expand a clicked node's depth-1 halo; a no-op while one is in flight. */
  async expand(nodeId: string): Promise<void> {
    if (state.isExpanded(this.state, nodeId)) return;
    const sig = filterSignature(this.state.filters);
    const key = `${nodeId}@${sig}`;
    if (this.pending.has(key)) return;
    this.pending.add(key);
    try {
      const resp = await this.fetchHalo(nodeId);
      if (filterSignature(this.state.filters) !== sig) return; // stale
      this.commit(state.applyExpandResult(this.state, nodeId, resp));
    } catch (err) {
      if (filterSignature(this.state.filters) !== sig) return;
      this.commit(state.applyError(this.state, describe(err)));
    } finally {
      this.pending.delete(key);
    }
  }

  private fetchHalo(nodeId: string) {
    const node = this.state.nodes.get(nodeId);
    if (!node) throw new ApiError(0, "BadRequest", `unknown node ${nodeId}`);
    if (node.kind === "doc") {
      return this.api.documentNeighborhood(node.checksum!, 1, this.state.filters);
    }
    return this.api.indicatorNeighborhood(node.type!, node.value!, 1, this.state.filters);
  }

  select(nodeId: string | null): void {
    this.commit(state.selectNode(this.state, nodeId));
  }

  /** Apply new filters and replay the seed plus every expansion under them. */
  async setFilters(filters: Filters): Promise<void> {
    const { state: next, requery } = state.setFilters(this.state, filters);
    this.commit(next);
    if (!next.seed) return;
    await this.search(next.seed.type, next.seed.value);
    for (const nodeId of requery) {
      if (nodeId !== next.seedId && this.state.nodes.has(nodeId)) {
        await this.expand(nodeId);
      }
    }
  }

  document(checksum: string) {
    return this.api.document(checksum);
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    return err.notFound ? "not found" : err.message;
  }
  return String(err);
}
