/** Loaders for the recorded service payloads under tests/fixtures/. */
import { readFileSync } from "node:fs";
import { join } from "node:path";

import type {
  AugmentResponse,
  FilterResponse,
  NodeDetail,
  RenderPayload,
  SessionSummary,
} from "../src/types";

export function fixture<T>(name: string): T {
  const path = join(process.cwd(), "tests", "fixtures", name);
  return JSON.parse(readFileSync(path, "utf8")) as T;
}

export const sessionFixture = () => fixture<SessionSummary>("session.json");
export const filterFrozen = () => fixture<FilterResponse>("filter_frozen.json");
export const filterLoose = () => fixture<FilterResponse>("filter_loose.json");
export const filterSmall = () => fixture<FilterResponse>("filter_small.json");
export const augmentZero = () => fixture<AugmentResponse>("augment_zero.json");
export const augmentFirst = () => fixture<AugmentResponse>("augment_seed3_first.json");
export const augmentSecond = () => fixture<AugmentResponse>("augment_seed3_second.json");
export const nodeDetailFixture = () => fixture<NodeDetail>("node_detail.json");
export const emptyRender = () => fixture<RenderPayload>("empty_render.json");
export const unknownSeedError = () =>
  fixture<{ status: number; body: { code: string; message: string; detail: unknown } }>(
    "error_unknown_seed.json",
  );
