// Pure view state: a fold over user actions and API responses.
// Nothing here fabricates graph data; every node and edge comes from a
// neighborhood response, and re-applying the same response is a no-op.

import type { Filters, GraphEdge, GraphNode, NeighborhoodResponse } from "./types.js";
import { NO_FILTERS } from "./types.js";

export interface ViewState {
  seed: { type: string; value: string } | null;
  seedId: string | null;
  nodes: Map<string, GraphNode>;
  edges: Map<string, GraphEdge>;
  expanded: Set<string>;
  truncatedExpansions: Set<string>;
  filters: Filters;
  selected: string | null;
  error: string | null;
}

export function initialState(): ViewState {
  return {
    seed: null,
    seedId: null,
    nodes: new Map(),
    edges: new Map(),
    expanded: new Set(),
    truncatedExpansions: new Set(),
    filters: { ...NO_FILTERS },
    selected: null,
    error: null,
  };
}

export function edgeKey(edge: GraphEdge): string {
  return `${edge.doc}|${edge.type}|${edge.value}`;
}

function cloned(state: ViewState): ViewState {
  return {
    seed: state.seed,
    seedId: state.seedId,
    nodes: new Map(state.nodes),
    edges: new Map(state.edges),
    expanded: new Set(state.expanded),
    truncatedExpansions: new Set(state.truncatedExpansions),
    filters: state.filters,
    selected: state.selected,
    error: state.error,
  };
}

/** Begin a fresh investigation; the canvas empties until the search lands. */
export function startSearch(state: ViewState, type: string, value: string): ViewState {
  const next = initialState();
  next.filters = state.filters;
  next.seed = { type, value };
  return next;
}

function mergeResponse(state: ViewState, resp: NeighborhoodResponse, origin: string): ViewState {
  const next = cloned(state);
  for (const node of resp.nodes) {
    // Server values win: counts shown must always equal server values.
    next.nodes.set(node.id, node);
  }
  for (const edge of resp.edges) {
    next.edges.set(edgeKey(edge), edge);
  }
  next.expanded.add(origin);
  if (resp.truncated) {
    next.truncatedExpansions.add(origin);
  } else {
    next.truncatedExpansions.delete(origin);
  }
  next.error = null;
  return next;
}

/** Degree-1 halo of the searched seed. */
export function applySearchResult(state: ViewState, resp: NeighborhoodResponse): ViewState {
  const next = mergeResponse(state, resp, resp.seed);
  next.seedId = resp.seed;
  return next;
}

/** Merge one clicked node's depth-1 halo. Idempotent per response. */
export function applyExpandResult(state: ViewState, nodeId: string, resp: NeighborhoodResponse): ViewState {
  return mergeResponse(state, resp, nodeId);
}

export function applyError(state: ViewState, message: string): ViewState {
  const next = cloned(state);
  next.error = message;
  return next;
}

export function selectNode(state: ViewState, nodeId: string | null): ViewState {
  const next = cloned(state);
  next.selected = nodeId;
  return next;
}

/**
 * Change active filters. The loaded subgraph came from the old filter
 * settings, so everything except the seed is dropped; the controller
 * re-queries the seed and previously expanded nodes under the new
 * filters and the results merge back in.
 */
export function setFilters(state: ViewState, filters: Filters): {
  state: ViewState;
  requery: string[];
} {
  const requery = [...state.expanded];
  const next = initialState();
  next.seed = state.seed;
  next.seedId = state.seedId;
  next.filters = filters;
  next.selected = null;
  return { state: next, requery };
}

export function isExpanded(state: ViewState, nodeId: string): boolean {
  return state.expanded.has(nodeId);
}

/** Degree badge for an indicator node; always the server's number. */
export function degreeBadge(state: ViewState, nodeId: string): number | null {
  const node = state.nodes.get(nodeId);
  if (!node || node.kind !== "ind") return null;
  return node.degree ?? null;
}

export function graphCounts(state: ViewState): { nodes: number; edges: number } {
  return { nodes: state.nodes.size, edges: state.edges.size };
}
