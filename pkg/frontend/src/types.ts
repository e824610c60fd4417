/** Wire types for the session service. Field names match the JSON exactly. */

export type BorderStyle = "thick" | "thin" | "none" | "default";

export interface RenderNode {
  code: string;
  label: string;
  visit_count: number;
  depth: number;
  border_style: BorderStyle;
}

/** [parent_code, child_code] */
export type RenderEdge = [string, string];

export interface CohortStats {
  size: number;
  node_count: number;
  provenance_counts: Record<string, number>;
  hops_executed: number;
  terminated_early: boolean;
}

export interface ProvenanceRow {
  code: string;
  origin: string;
  hop: number;
  min_kl: number | null;
}

export interface RenderPayload {
  session_id: string;
  nodes: RenderNode[];
  edges: RenderEdge[];
  summary: { node_count: number; visit_count: number };
  bar_chart: { code: string; visit_count: number }[];
  pie_chart: { phenotype: string; share: number }[];
  cohort?: CohortStats;
  provenance?: ProvenanceRow[];
}

export interface FilterResponse {
  warnings: string[];
  qualifying_count: number;
  descendant_count: number;
  render: RenderPayload;
}

export interface AugmentResponse {
  render: RenderPayload;
}

export interface SessionSummary {
  session_id: string;
  node_count: number;
  visit_count: number;
  filtered: boolean;
  augmented: boolean;
  history_length: number;
  warnings: string[];
}

export interface NodeDetail {
  code: string;
  label: string;
  visit_count: number;
  depth: number;
  phenotype_dist: { phenotypes: string[]; probs: number[]; support_count: number };
  kl_to_selected: Record<string, number | null>;
}

export interface SaveResponse {
  path: string;
  manifest_path: string;
  visit_count: number;
  parameters: Record<string, unknown>;
}

/** Request bodies; one field per form control. */
export interface FilterRequest {
  codes: string[];
  phenotypes: string[];
  min_visits: number;
  min_phenotype_count: number;
}

export interface AugmentRequest {
  hops: number;
  kl_threshold: number;
  sampling_rate: number;
  rng_seed: number;
}
