/**
 * Growth provenance as a sortable table: one row per cohort node with its
 * origin, admission hop and the divergence score it was gated on. Clicking
 * a column header sorts by that column; clicking again flips direction.
 * Nodes without a score (seeds and carried-along descendants) sort last.
 */
import type { ProvenanceRow } from "./types";

type SortKey = "code" | "origin" | "hop" | "min_kl";

const COLUMNS: { key: SortKey; label: string }[] = [
  { key: "code", label: "code" },
  { key: "origin", label: "origin" },
  { key: "hop", label: "hop" },
  { key: "min_kl", label: "min KL" },
];

export function formatKl(value: number | null): string {
  return value === null ? "n/a" : value.toFixed(4);
}

function compare(a: ProvenanceRow, b: ProvenanceRow, key: SortKey): number {
  if (key === "code" || key === "origin") return a[key].localeCompare(b[key]);
  if (key === "hop") return a.hop - b.hop;
  const av = a.min_kl ?? Number.POSITIVE_INFINITY;
  const bv = b.min_kl ?? Number.POSITIVE_INFINITY;
  return av - bv;
}

export function renderKlTable(el: HTMLElement, rows: ProvenanceRow[]): void {
  el.innerHTML = "";
  if (rows.length === 0) {
    const p = document.createElement("p");
    p.className = "kl-empty";
    p.textContent = "no cohort yet; run a sample to see growth provenance";
    el.appendChild(p);
    return;
  }

  const table = document.createElement("table");
  table.className = "kl-table";
  table.dataset.sortKey = "code";
  table.dataset.sortDir = "asc";

  const thead = document.createElement("thead");
  const headRow = document.createElement("tr");
  for (const col of COLUMNS) {
    const th = document.createElement("th");
    th.textContent = col.label;
    th.dataset.key = col.key;
    th.addEventListener("click", () => {
      const dir =
        table.dataset.sortKey === col.key && table.dataset.sortDir === "asc" ? "desc" : "asc";
      table.dataset.sortKey = col.key;
      table.dataset.sortDir = dir;
      fillBody();
    });
    headRow.appendChild(th);
  }
  thead.appendChild(headRow);
  table.appendChild(thead);

  const tbody = document.createElement("tbody");
  table.appendChild(tbody);

  const fillBody = () => {
    const key = table.dataset.sortKey as SortKey;
    const sign = table.dataset.sortDir === "desc" ? -1 : 1;
    const ordered = [...rows].sort((a, b) => {
      if (key === "min_kl") {
        // unscored rows stay at the bottom in either direction
        const an = a.min_kl === null;
        const bn = b.min_kl === null;
        if (an !== bn) return an ? 1 : -1;
        if (an && bn) return a.code.localeCompare(b.code);
      }
      return sign * compare(a, b, key);
    });
    tbody.innerHTML = "";
    for (const row of ordered) {
      const tr = document.createElement("tr");
      tr.dataset.code = row.code;
      tr.dataset.kl = row.min_kl === null ? "null" : String(row.min_kl);
      const cells = [row.code, row.origin, String(row.hop), formatKl(row.min_kl)];
      for (const text of cells) {
        const td = document.createElement("td");
        td.textContent = text;
        tr.appendChild(td);
      }
      tbody.appendChild(tr);
    }
  };
  fillBody();
  el.appendChild(table);
}
