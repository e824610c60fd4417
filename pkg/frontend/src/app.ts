/**
 * Wires panels, graph, charts and the detail pane to the service client.
 *
 * The app keeps no numbers of its own: every render starts from the most
 * recent payload and redraws everything from it. Service errors (4xx) show
 * inline next to the form that caused them and leave the current view
 * alone; payload schema errors raise the banner and nothing is redrawn.
 */
import { MutationInFlight, ServiceError } from "./api";
import { renderBar, renderPie, renderSummary } from "./charts";
import { renderGraph } from "./graphView";
import { formatKl, renderKlTable } from "./klTable";
import { augmentPanel, filterPanel, type AugmentPanel, type FilterPanel } from "./panels";
import type {
  AugmentRequest,
  AugmentResponse,
  FilterRequest,
  FilterResponse,
  NodeDetail,
  RenderPayload,
  SaveResponse,
  SessionSummary,
} from "./types";
import { SchemaError } from "./validate";

/** What the app needs from the transport; the real Client satisfies this. */
export interface ServiceClient {
  readonly busy: boolean;
  session(): Promise<SessionSummary>;
  nodeDetail(code: string): Promise<NodeDetail>;
  filter(req: FilterRequest): Promise<FilterResponse>;
  augment(req: AugmentRequest): Promise<AugmentResponse>;
  save(path: string): Promise<SaveResponse>;
  reset(): Promise<SessionSummary>;
}

const SHELL = `
<header class="topbar">
  <h1>cohort workbench</h1>
  <div class="summary"></div>
</header>
<div class="banner" role="alert" hidden></div>
<main class="layout">
  <aside class="controls"></aside>
  <section class="graph-pane"><div class="graph-host"></div></section>
  <aside class="side">
    <div class="warnings"></div>
    <section><h2>visits per node</h2><div class="bar-host"></div></section>
    <section><h2>phenotype coverage</h2><div class="pie-host"></div></section>
    <section><h2>growth provenance</h2><div class="kl-host"></div></section>
    <section><h2>node detail</h2><div class="detail-host"></div></section>
  </aside>
</main>`;

export class App {
  readonly filter: FilterPanel;
  readonly augment: AugmentPanel;

  private readonly banner: HTMLElement;
  private readonly summaryEl: HTMLElement;
  private readonly warningsEl: HTMLElement;
  private readonly graphHost: HTMLElement;
  private readonly barHost: HTMLElement;
  private readonly pieHost: HTMLElement;
  private readonly klHost: HTMLElement;
  private readonly detailHost: HTMLElement;

  private lastRender: RenderPayload | null = null;
  private pending: Promise<void> = Promise.resolve();

  constructor(
    root: HTMLElement,
    private readonly client: ServiceClient,
  ) {
    root.innerHTML = SHELL;
    const pick = (sel: string) => root.querySelector<HTMLElement>(sel)!;
    this.banner = pick(".banner");
    this.summaryEl = pick(".summary");
    this.warningsEl = pick(".warnings");
    this.graphHost = pick(".graph-host");
    this.barHost = pick(".bar-host");
    this.pieHost = pick(".pie-host");
    this.klHost = pick(".kl-host");
    this.detailHost = pick(".detail-host");

    this.filter = filterPanel();
    this.augment = augmentPanel();
    pick(".controls").append(this.filter.root, this.augment.root);

    this.filter.onSubmit(() => this.track(this.runFilter()));
    this.augment.onSample(() => this.track(this.runAugment()));
    this.augment.onSave(() => this.track(this.runSave()));
    this.augment.onReset(() => this.track(this.runReset()));
  }

  /** Resolves once every operation started so far has settled. */
  idle(): Promise<void> {
    return this.pending;
  }

  init(): Promise<void> {
    return this.track(this.loadSession());
  }

  /** The payload currently on screen, exactly as the service sent it. */
  get currentRender(): RenderPayload | null {
    return this.lastRender;
  }

  private track(op: Promise<void>): Promise<void> {
    this.pending = this.pending.then(() => op);
    return this.pending;
  }

  private async loadSession(): Promise<void> {
    try {
      const summary = await this.client.session();
      renderSummary(this.summaryEl, summary);
      this.renderWarnings(summary.warnings);
      this.clearBanner();
    } catch (err) {
      this.fail(err, (m) => this.showBanner(m));
    }
  }

  private applyRender(payload: RenderPayload): void {
    this.lastRender = payload;
    renderGraph(this.graphHost, payload, {
      onSelect: (code) => this.track(this.showDetail(code)),
    });
    renderSummary(this.summaryEl, payload.summary);
    renderBar(this.barHost, payload.bar_chart);
    renderPie(this.pieHost, payload.pie_chart);
    renderKlTable(this.klHost, payload.provenance ?? []);
    this.augment.setCohortSize(payload.cohort?.size ?? null);
    this.filter.addCodeOptions(payload.nodes.map((n) => n.code));
    this.filter.addPhenotypeOptions(payload.pie_chart.map((s) => s.phenotype));
  }

  private async runFilter(): Promise<void> {
    if (this.client.busy) return;
    this.setBusy(true);
    this.filter.setError(null);
    try {
      const resp = await this.client.filter(this.filter.values());
      this.renderWarnings(resp.warnings);
      this.applyRender(resp.render);
      this.augment.setStatus(null);
      this.clearBanner();
    } catch (err) {
      this.fail(err, (m) => this.filter.setError(m));
    } finally {
      this.setBusy(false);
    }
  }

  private async runAugment(): Promise<void> {
    if (this.client.busy) return;
    this.setBusy(true);
    this.augment.setError(null);
    try {
      const resp = await this.client.augment(this.augment.values());
      this.applyRender(resp.render);
      this.augment.setStatus(null);
      this.clearBanner();
    } catch (err) {
      this.fail(err, (m) => this.augment.setError(m));
    } finally {
      this.setBusy(false);
    }
  }

  private async runSave(): Promise<void> {
    if (this.client.busy) return;
    this.setBusy(true);
    this.augment.setError(null);
    try {
      const resp = await this.client.save(this.augment.savePath());
      this.augment.setStatus(`saved ${resp.visit_count} visits to ${resp.path}`);
    } catch (err) {
      this.fail(err, (m) => this.augment.setError(m));
    } finally {
      this.setBusy(false);
    }
  }

  /** Reset the session, then re-apply the visible filter form. */
  private async runReset(): Promise<void> {
    if (this.client.busy) return;
    this.setBusy(true);
    this.augment.setError(null);
    try {
      await this.client.reset();
      const resp = await this.client.filter(this.filter.values());
      this.renderWarnings(resp.warnings);
      this.applyRender(resp.render);
      this.augment.setStatus(null);
      this.clearBanner();
    } catch (err) {
      this.fail(err, (m) => this.augment.setError(m));
    } finally {
      this.setBusy(false);
    }
  }

  private async showDetail(code: string): Promise<void> {
    try {
      const detail = await this.client.nodeDetail(code);
      this.renderDetail(detail);
    } catch (err) {
      this.fail(err, (m) => {
        this.detailHost.innerHTML = "";
        const p = document.createElement("p");
        p.className = "inline-error";
        p.textContent = m;
        this.detailHost.appendChild(p);
      });
    }
  }

  private renderDetail(detail: NodeDetail): void {
    this.detailHost.innerHTML = "";
    const head = document.createElement("p");
    head.className = "detail-head";
    head.dataset.code = detail.code;
    head.textContent =
      `${detail.label} (${detail.code}), depth ${detail.depth}, ` +
      `${detail.visit_count} visits, ${detail.phenotype_dist.support_count} with phenotypes`;
    this.detailHost.appendChild(head);

    const dist = document.createElement("table");
    dist.className = "detail-dist";
    for (const [i, name] of detail.phenotype_dist.phenotypes.entries()) {
      const prob = detail.phenotype_dist.probs[i] ?? 0;
      const tr = document.createElement("tr");
      tr.dataset.prob = String(prob);
      const nameTd = document.createElement("td");
      nameTd.textContent = name;
      const probTd = document.createElement("td");
      probTd.textContent = prob.toFixed(3);
      tr.append(nameTd, probTd);
      dist.appendChild(tr);
    }
    this.detailHost.appendChild(dist);

    const kl = document.createElement("table");
    kl.className = "detail-kl";
    for (const [seed, value] of Object.entries(detail.kl_to_selected)) {
      const tr = document.createElement("tr");
      tr.dataset.seed = seed;
      tr.dataset.kl = value === null ? "null" : String(value);
      const seedTd = document.createElement("td");
      seedTd.textContent = `KL to ${seed}`;
      const valTd = document.createElement("td");
      valTd.textContent = formatKl(value);
      tr.append(seedTd, valTd);
      kl.appendChild(tr);
    }
    this.detailHost.appendChild(kl);
  }

  private renderWarnings(warnings: string[]): void {
    this.warningsEl.innerHTML = "";
    if (warnings.length === 0) return;
    const ul = document.createElement("ul");
    ul.className = "warning-list";
    for (const w of warnings) {
      const li = document.createElement("li");
      li.textContent = w;
      ul.appendChild(li);
    }
    this.warningsEl.appendChild(ul);
  }

  private setBusy(busy: boolean): void {
    this.filter.setBusy(busy);
    this.augment.setBusy(busy);
  }

  private showBanner(message: string): void {
    this.banner.hidden = false;
    this.banner.textContent = message;
  }

  private clearBanner(): void {
    this.banner.hidden = true;
    this.banner.textContent = "";
  }

  /** Route an error: 4xx inline next to its form, schema problems to the banner. */
  private fail(err: unknown, inline: (message: string) => void): void {
    if (err instanceof ServiceError) {
      inline(`${err.status} ${err.code}: ${err.message}`);
    } else if (err instanceof SchemaError) {
      this.showBanner(err.message);
    } else if (err instanceof MutationInFlight) {
      inline(err.message);
    } else {
      this.showBanner(err instanceof Error ? err.message : String(err));
    }
  }
}

export function createApp(root: HTMLElement, client: ServiceClient): App {
  return new App(root, client);
}
