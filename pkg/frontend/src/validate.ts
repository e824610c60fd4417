/**
 * Runtime schemas for every payload the UI consumes.
 *
 * Rendering code trusts its inputs, so everything coming off the wire is
 * checked here first. A payload that fails produces a SchemaError and the
 * caller must show a banner instead of rendering anything partial.
 */
import { z } from "zod";

import type {
  AugmentResponse,
  FilterResponse,
  NodeDetail,
  RenderPayload,
  SaveResponse,
  SessionSummary,
} from "./types";

export class SchemaError extends Error {
  constructor(what: string, issues: string) {
    super(`${what}: ${issues}`);
    this.name = "SchemaError";
  }
}

const count = z.number().int().nonnegative();

const renderNodeSchema = z.object({
  code: z.string(),
  label: z.string(),
  visit_count: count,
  depth: count,
  border_style: z.enum(["thick", "thin", "none", "default"]),
});

const renderPayloadSchema = z.object({
  session_id: z.string(),
  nodes: z.array(renderNodeSchema),
  edges: z.array(z.tuple([z.string(), z.string()])),
  summary: z.object({ node_count: count, visit_count: count }),
  bar_chart: z.array(z.object({ code: z.string(), visit_count: count })),
  pie_chart: z.array(z.object({ phenotype: z.string(), share: z.number().min(0).max(1) })),
  cohort: z
    .object({
      size: count,
      node_count: count,
      provenance_counts: z.record(z.string(), count),
      hops_executed: count,
      terminated_early: z.boolean(),
    })
    .optional(),
  provenance: z
    .array(
      z.object({
        code: z.string(),
        origin: z.string(),
        hop: count,
        min_kl: z.number().nullable(),
      }),
    )
    .optional(),
});

const filterResponseSchema = z.object({
  warnings: z.array(z.string()),
  qualifying_count: count,
  descendant_count: count,
  render: renderPayloadSchema,
});

const augmentResponseSchema = z.object({ render: renderPayloadSchema });

const sessionSummarySchema = z.object({
  session_id: z.string(),
  node_count: count,
  visit_count: count,
  filtered: z.boolean(),
  augmented: z.boolean(),
  history_length: count,
  warnings: z.array(z.string()),
});

const nodeDetailSchema = z.object({
  code: z.string(),
  label: z.string(),
  visit_count: count,
  depth: count,
  phenotype_dist: z.object({
    phenotypes: z.array(z.string()),
    probs: z.array(z.number()),
    support_count: count,
  }),
  kl_to_selected: z.record(z.string(), z.number().nullable()),
});

const saveResponseSchema = z.object({
  path: z.string(),
  manifest_path: z.string(),
  visit_count: count,
  parameters: z.record(z.string(), z.unknown()),
});

function parse<T>(schema: z.ZodType<T>, raw: unknown, what: string): T {
  const out = schema.safeParse(raw);
  if (!out.success) {
    const issues = out.error.issues
      .map((i) => `${i.path.join(".") || "(root)"}: ${i.message}`)
      .join("; ");
    throw new SchemaError(what, issues);
  }
  return out.data;
}

export const parseRenderPayload = (raw: unknown): RenderPayload =>
  parse(renderPayloadSchema, raw, "render payload");
export const parseFilterResponse = (raw: unknown): FilterResponse =>
  parse(filterResponseSchema, raw, "filter response");
export const parseAugmentResponse = (raw: unknown): AugmentResponse =>
  parse(augmentResponseSchema, raw, "augment response");
export const parseSessionSummary = (raw: unknown): SessionSummary =>
  parse(sessionSummarySchema, raw, "session summary");
export const parseNodeDetail = (raw: unknown): NodeDetail =>
  parse(nodeDetailSchema, raw, "node detail");
export const parseSaveResponse = (raw: unknown): SaveResponse =>
  parse(saveResponseSchema, raw, "save response");
