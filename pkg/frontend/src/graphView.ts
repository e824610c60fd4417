/**
 * SVG graph view.
 *
 * Layout is a force simulation run synchronously for a fixed number of
 * ticks, so rendering needs no timers and works headless. Border classes
 * come verbatim from the payload's border_style; nothing is recomputed
 * client side. Color encodes visit_count, radius encodes inverted depth
 * (general concepts draw largest).
 */
import * as d3 from "d3";

import type { RenderNode, RenderPayload } from "./types";

const WIDTH = 900;
const HEIGHT = 620;
const TICKS = 150;
const R_MAX = 18;
const R_MIN = 6;
const LABEL_LIMIT = 40; // draw code labels only on small graphs

type SimNode = RenderNode & d3.SimulationNodeDatum;
interface SimLink extends d3.SimulationLinkDatum<SimNode> {
  parent: string;
  child: string;
}

export interface GraphHooks {
  onSelect?: (code: string) => void;
}

export function renderGraph(
  container: HTMLElement,
  payload: RenderPayload,
  hooks: GraphHooks = {},
): void {
  container.innerHTML = "";
  const svg = d3
    .select(container)
    .append("svg")
    .attr("class", "graph")
    .attr("viewBox", `0 0 ${WIDTH} ${HEIGHT}`)
    .attr("preserveAspectRatio", "xMidYMid meet");
  const viewport = svg.append("g").attr("class", "viewport");
  const edgeLayer = viewport.append("g").attr("class", "edges");
  const nodeLayer = viewport.append("g").attr("class", "nodes");

  svg.call(
    d3
      .zoom<SVGSVGElement, unknown>()
      .scaleExtent([0.2, 8])
      .on("zoom", (event) => viewport.attr("transform", event.transform)),
  );

  if (payload.nodes.length === 0) return;

  const nodes: SimNode[] = payload.nodes.map((n) => ({ ...n }));
  const links: SimLink[] = payload.edges.map(([parent, child]) => ({
    parent,
    child,
    source: parent,
    target: child,
  }));

  const maxDepth = d3.max(nodes, (n) => n.depth) ?? 0;
  const radius = (n: SimNode) =>
    maxDepth === 0 ? R_MAX : R_MAX - (n.depth / maxDepth) * (R_MAX - R_MIN);
  const maxVisits = d3.max(nodes, (n) => n.visit_count) ?? 0;
  const color = d3.scaleSequential(d3.interpolateBlues).domain([0, Math.max(maxVisits, 1)]);

  const sim = d3
    .forceSimulation(nodes)
    .force(
      "link",
      d3
        .forceLink<SimNode, SimLink>(links)
        .id((n) => n.code)
        .distance(45)
        .strength(0.6),
    )
    .force("charge", d3.forceManyBody().strength(-90))
    .force("center", d3.forceCenter(WIDTH / 2, HEIGHT / 2))
    .force("collide", d3.forceCollide<SimNode>((n) => radius(n) + 2))
    .stop();
  sim.tick(TICKS);

  edgeLayer
    .selectAll("line")
    .data(links)
    .join("line")
    .attr("class", "edge")
    .attr("data-parent", (l) => l.parent)
    .attr("data-child", (l) => l.child)
    .attr("x1", (l) => (l.source as SimNode).x ?? 0)
    .attr("y1", (l) => (l.source as SimNode).y ?? 0)
    .attr("x2", (l) => (l.target as SimNode).x ?? 0)
    .attr("y2", (l) => (l.target as SimNode).y ?? 0);

  const nodeG = nodeLayer
    .selectAll("g")
    .data(nodes)
    .join("g")
    .attr("class", (n) => `node border-${n.border_style}`)
    .attr("data-code", (n) => n.code)
    .attr("data-border", (n) => n.border_style)
    .attr("transform", (n) => `translate(${n.x ?? 0},${n.y ?? 0})`)
    .on("click", (_event, n) => hooks.onSelect?.(n.code));

  nodeG
    .append("circle")
    .attr("r", (n) => radius(n))
    .attr("fill", (n) => color(n.visit_count));
  nodeG.append("title").text((n) => `${n.label} (${n.code}), ${n.visit_count} visits`);

  if (nodes.length <= LABEL_LIMIT) {
    nodeG
      .append("text")
      .attr("class", "node-code")
      .attr("dy", (n) => -radius(n) - 3)
      .attr("text-anchor", "middle")
      .text((n) => n.code);
  }
}

/** Codes with a non-default border, keyed to their border style. */
export function highlightedCodes(container: HTMLElement): Record<string, string> {
  const out: Record<string, string> = {};
  for (const el of container.querySelectorAll<HTMLElement>(".node")) {
    const border = el.dataset.border ?? "default";
    if (border !== "default") out[el.dataset.code ?? ""] = border;
  }
  return out;
}
