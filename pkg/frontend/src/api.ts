/**
 * Thin fetch wrapper for the session service.
 *
 * Mutations (filter/augment/save/reset) are serialized: the service holds a
 * single session, so the client refuses to start a second mutation while one
 * is in flight. Callers key button disabling off `busy`.
 */
import type {
  AugmentRequest,
  AugmentResponse,
  FilterRequest,
  FilterResponse,
  NodeDetail,
  SaveResponse,
  SessionSummary,
} from "./types";
import {
  parseAugmentResponse,
  parseFilterResponse,
  parseNodeDetail,
  parseSaveResponse,
  parseSessionSummary,
} from "./validate";

/** Error body shape the service guarantees: {code, message, detail}. */
export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly detail: unknown = null,
  ) {
    super(message);
    this.name = "ServiceError";
  }
}

export class MutationInFlight extends Error {
  constructor() {
    super("another request is still running");
    this.name = "MutationInFlight";
  }
}

async function toServiceError(resp: Response): Promise<ServiceError> {
  let body: unknown = null;
  try {
    body = await resp.json();
  } catch {
    // non-JSON error body; fall through to the generic message
  }
  if (body && typeof body === "object" && "code" in body && "message" in body) {
    const b = body as { code: unknown; message: unknown; detail?: unknown };
    return new ServiceError(resp.status, String(b.code), String(b.message), b.detail ?? null);
  }
  return new ServiceError(resp.status, "HttpError", `request failed with status ${resp.status}`);
}

export class Client {
  private inFlight = false;

  constructor(private readonly base: string = "") {}

  get busy(): boolean {
    return this.inFlight;
  }

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const resp = await fetch(this.base + path, init);
    if (!resp.ok) throw await toServiceError(resp);
    return resp.json();
  }

  private post(path: string, body: unknown): Promise<unknown> {
    return this.request(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  /** Run a state-changing call, holding the single mutation slot. */
  private async mutate<T>(path: string, body: unknown, parse: (raw: unknown) => T): Promise<T> {
    if (this.inFlight) throw new MutationInFlight();
    this.inFlight = true;
    try {
      return parse(await this.post(path, body));
    } finally {
      this.inFlight = false;
    }
  }

  session(): Promise<SessionSummary> {
    return this.request("/session").then(parseSessionSummary);
  }

  nodeDetail(code: string): Promise<NodeDetail> {
    return this.request(`/nodes/${encodeURIComponent(code)}`).then(parseNodeDetail);
  }

  filter(req: FilterRequest): Promise<FilterResponse> {
    return this.mutate("/filter", req, parseFilterResponse);
  }

  augment(req: AugmentRequest): Promise<AugmentResponse> {
    return this.mutate("/augment", req, parseAugmentResponse);
  }

  save(path: string): Promise<SaveResponse> {
    return this.mutate("/save", { path }, parseSaveResponse);
  }

  reset(): Promise<SessionSummary> {
    return this.mutate("/reset", {}, parseSessionSummary);
  }
}
