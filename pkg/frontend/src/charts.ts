/**
 * Summary readout, visits-per-node bar chart and phenotype-coverage pie.
 *
 * Every number shown is copied straight from the payload; each element also
 * carries the raw value in a data attribute so tests can compare without
 * parsing formatted text.
 */
import * as d3 from "d3";

import type { RenderPayload } from "./types";

export const BAR_TOP_N = 15;

export function formatShare(share: number): string {
  return `${(100 * share).toFixed(1)}%`;
}

function span(cls: string, text: string): HTMLSpanElement {
  const s = document.createElement("span");
  s.className = cls;
  s.textContent = text;
  return s;
}

export function renderSummary(el: HTMLElement, summary: RenderPayload["summary"]): void {
  el.innerHTML = "";
  const mk = (label: string, field: string, value: number) => {
    const span = document.createElement("span");
    span.className = "stat";
    span.innerHTML = `${label} <b data-field="${field}">${value}</b>`;
    el.appendChild(span);
  };
  mk("nodes", "node_count", summary.node_count);
  mk("visits", "visit_count", summary.visit_count);
}

export function renderBar(
  el: HTMLElement,
  rows: RenderPayload["bar_chart"],
  topN: number = BAR_TOP_N,
): void {
  el.innerHTML = "";
  const ordered = [...rows].sort(
    (a, b) => b.visit_count - a.visit_count || a.code.localeCompare(b.code),
  );
  const shown = ordered.slice(0, topN);
  const max = shown.length ? shown[0]!.visit_count : 0;
  for (const row of shown) {
    const div = document.createElement("div");
    div.className = "bar-row";
    div.dataset.code = row.code;
    div.dataset.count = String(row.visit_count);
    const pct = max > 0 ? (100 * row.visit_count) / max : 0;
    const label = span("bar-label", row.code);
    const track = span("bar-track", "");
    const fill = span("bar-fill", "");
    fill.style.width = `${pct}%`;
    track.appendChild(fill);
    div.append(label, track, span("bar-value", String(row.visit_count)));
    el.appendChild(div);
  }
  if (ordered.length > topN) {
    const note = document.createElement("div");
    note.className = "bar-overflow";
    note.dataset.hidden = String(ordered.length - topN);
    note.textContent = `showing top ${topN} of ${ordered.length} nodes`;
    el.appendChild(note);
  }
}

export function renderPie(el: HTMLElement, slices: RenderPayload["pie_chart"]): void {
  el.innerHTML = "";
  const size = 180;
  const svg = d3
    .select(el)
    .append("svg")
    .attr("class", "pie")
    .attr("viewBox", `0 0 ${size} ${size}`);
  const g = svg.append("g").attr("transform", `translate(${size / 2},${size / 2})`);
  const color = d3.scaleOrdinal<string>(d3.schemeTableau10);
  const arcs = d3
    .pie<RenderPayload["pie_chart"][number]>()
    .value((s) => s.share)
    .sort(null)(slices.filter((s) => s.share > 0));
  const arc = d3
    .arc<d3.PieArcDatum<RenderPayload["pie_chart"][number]>>()
    .innerRadius(0)
    .outerRadius(size / 2 - 4);
  g.selectAll("path")
    .data(arcs)
    .join("path")
    .attr("class", "slice")
    .attr("data-phenotype", (a) => a.data.phenotype)
    .attr("data-share", (a) => String(a.data.share))
    .attr("fill", (a) => color(a.data.phenotype))
    .attr("d", (a) => arc(a));

  const legend = document.createElement("ul");
  legend.className = "pie-legend";
  for (const s of slices) {
    const li = document.createElement("li");
    li.dataset.phenotype = s.phenotype;
    li.dataset.share = String(s.share);
    const swatch = document.createElement("i");
    swatch.style.background = color(s.phenotype);
    li.append(swatch, span("name", s.phenotype), span("pct", formatShare(s.share)));
    legend.appendChild(li);
  }
  el.appendChild(legend);
}
