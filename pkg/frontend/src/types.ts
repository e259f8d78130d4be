// Payload shapes of the /v1 API. The UI never invents fields beyond these.

export type NodeKind = "doc" | "ind";

export interface GraphNode {
  id: string;
  kind: NodeKind;
  // indicator fields
  type?: string | null;
  value?: string | null;
  degree?: number | null;
  // document fields
  checksum?: string | null;
  source_kind?: string | null;
  raw_text?: string | null;
  text_truncated?: boolean | null;
  language?: string | null;
  topic?: string | null;
  source_tag?: string | null;
}

export interface GraphEdge {
  doc: string;
  type: string;
  value: string;
  occurrences: number;
}

export interface NeighborhoodResponse {
  seed: string;
  depth: number;
  nodes: GraphNode[];
  edges: GraphEdge[];
  frontier: string[];
  truncated: boolean;
}

export interface IndicatorSummary {
  type: string;
  value: string;
  degree: number;
}

export interface DocumentPayload {
  checksum: string;
  source_kind: string;
  raw_text: string;
  ingested_at?: string | null;
  crawler_meta?: Record<string, unknown> | null;
  avscan_meta?: Record<string, unknown> | null;
  enrichment?: {
    language: { language: string | null; confidence: number; sufficient: boolean };
    topic: string;
    techniques: { technique_id: string; confidence: number; mapper: string }[];
  } | null;
  match_summary: [string, string, number][];
}

export interface ApiErrorBody {
  code: string;
  message: string;
}

export interface Filters {
  edgeTypes: string[] | null;
  language: string | null;
  topic: string | null;
  sourceTags: string[] | null;
}

export const NO_FILTERS: Filters = {
  edgeTypes: null,
  language: null,
  topic: null,
  sourceTags: null,
};
