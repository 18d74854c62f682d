/**
 * DOM construction for the review console. Everything here is plain
 * createElement so the console ships as static files with no runtime
 * dependencies.
 */

import { PendingMatchRow, Profile, SearchHit, SimilarityEdge } from "./api.js";
import { ComparisonRow } from "./compare.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function errorBanner(message: string, onRetry?: () => void): HTMLElement {
  const banner = el("div", "banner error");
  banner.appendChild(el("span", "", message));
  if (onRetry) {
    const retry = el("button", "retry", "Retry");
    retry.addEventListener("click", onRetry);
    banner.appendChild(retry);
  }
  return banner;
}

export function toast(message: string): HTMLElement {
  const node = el("div", "toast", message);
  setTimeout(() => node.remove(), 4000);
  return node;
}

export interface QueueHandlers {
  onVerdict(row: PendingMatchRow, verdict: "match" | "nonmatch"): void;
  onCompare(row: PendingMatchRow): void;
}

export function renderQueue(
  rows: PendingMatchRow[],
  handlers: QueueHandlers,
): HTMLElement {
  const section = el("section", "queue");
  section.appendChild(el("h2", "", "Pending matches"));
  if (rows.length === 0) {
    section.appendChild(el("p", "empty", "Nothing waiting for review."));
    return section;
  }
  const table = el("table", "queue-table");
  const head = el("tr");
  for (const title of ["Pair", "Left", "Right", "simsc", "rejsc", "Verdict"]) {
    head.appendChild(el("th", "", title));
  }
  table.appendChild(head);
  for (const row of rows) {
    const tr = el("tr", "queue-row");
    tr.dataset.pair = `${row.id1}-${row.id2}`;

    const pair = el("td", "pair");
    const link = el("a", "", `${row.id1} × ${row.id2}`);
    link.href = `#/compare/${row.id1}/${row.id2}`;
    link.addEventListener("click", (ev) => {
      ev.preventDefault();
      handlers.onCompare(row);
    });
    pair.appendChild(link);
    tr.appendChild(pair);

    tr.appendChild(el("td", "snippet", row.snippet1));
    tr.appendChild(el("td", "snippet", row.snippet2));
    tr.appendChild(el("td", "num", row.simsc.toFixed(3)));
    tr.appendChild(el("td", "num", String(row.rejsc)));

    const actions = el("td", "actions");
    const confirm = el("button", "confirm", "Match");
    confirm.addEventListener("click", () => handlers.onVerdict(row, "match"));
    const reject = el("button", "reject", "No match");
    reject.addEventListener("click", () => handlers.onVerdict(row, "nonmatch"));
    actions.append(confirm, reject);
    tr.appendChild(actions);
    table.appendChild(tr);
  }
  section.appendChild(table);
  return section;
}

export function renderComparison(
  left: Profile,
  right: Profile,
  rows: ComparisonRow[],
  edge: SimilarityEdge | null,
): HTMLElement {
  const section = el("section", "comparison");
  const heading = el("h2", "", `${left.id} × ${right.id}`);
  section.appendChild(heading);
  if (edge) {
    const meta = el(
      "p",
      "edge-meta",
      `simsc ${edge.simsc.toFixed(3)} · rejsc ${edge.rejsc} · ` +
        `${edge.cfm ? "confirmed" : "unconfirmed"} · ${edge.decision}`,
    );
    section.appendChild(meta);
  }
  const table = el("table", "compare-table");
  const head = el("tr");
  for (const title of ["Key", left.id, right.id]) {
    head.appendChild(el("th", "", title));
  }
  table.appendChild(head);
  for (const row of rows) {
    const tr = el("tr", row.unmatched ? "unmatched" : "matched");
    const keyCell = el("td", "key", row.key);
    if (row.unmatched) {
      keyCell.appendChild(el("span", "flag", " (one side only)"));
    }
    tr.appendChild(keyCell);
    for (const cells of [row.left, row.right]) {
      const td = el("td", "values");
      for (const cell of cells) {
        const stack = el("div", `value ${cell.kind}`);
        stack.appendChild(el("span", "", cell.value));
        for (const badge of cell.badges) {
          stack.appendChild(el("span", "badge", badge));
        }
        td.appendChild(stack);
      }
      tr.appendChild(td);
    }
    table.appendChild(tr);
  }
  section.appendChild(table);
  return section;
}

export interface SearchHandlers {
  onOpen(id: string): void;
}

export function renderSearchResults(
  hits: SearchHit[],
  handlers: SearchHandlers,
): HTMLElement {
  const section = el("section", "search-results");
  if (hits.length === 0) {
    section.appendChild(el("p", "empty", "No profiles match."));
    return section;
  }
  const list = el("ul", "hits");
  for (const hit of hits) {
    const item = el("li");
    const link = el("a", "", `${hit.id}`);
    link.href = `#/profile/${hit.id}`;
    link.addEventListener("click", (ev) => {
      ev.preventDefault();
      handlers.onOpen(hit.id);
    });
    item.appendChild(link);
    item.appendChild(el("span", "score", ` ${hit.score.toFixed(3)}`));
    list.appendChild(item);
  }
  section.appendChild(list);
  return section;
}

export function renderProfile(
  profile: Profile,
  edges: SimilarityEdge[],
  handlers: SearchHandlers,
): HTMLElement {
  const section = el("section", "profile");
  section.appendChild(el("h2", "", profile.id));
  const table = el("table", "profile-table");
  for (const a of profile.attributes) {
    const tr = el("tr");
    tr.appendChild(el("td", "key", a.key));
    const td = el("td", "values");
    td.appendChild(el("span", "", a.value));
    for (const pp of a.prov ?? []) {
      td.appendChild(el("span", "badge", `${pp.pkey} ${pp.pvalue}`));
    }
    tr.appendChild(td);
    table.appendChild(tr);
  }
  for (const r of profile.relations) {
    const tr = el("tr");
    tr.appendChild(el("td", "key", r.key));
    const td = el("td", "values");
    const link = el("a", "", r.target);
    link.href = `#/profile/${r.target}`;
    link.addEventListener("click", (ev) => {
      ev.preventDefault();
      handlers.onOpen(r.target);
    });
    td.appendChild(link);
    for (const pp of r.prov ?? []) {
      td.appendChild(el("span", "badge", `${pp.pkey} ${pp.pvalue}`));
    }
    tr.appendChild(td);
    table.appendChild(tr);
  }
  section.appendChild(table);
  if (edges.length > 0) {
    section.appendChild(el("h3", "", "Similar profiles"));
    const list = el("ul", "similar");
    for (const e of edges) {
      const other = e.id1 === profile.id ? e.id2 : e.id1;
      const item = el("li");
      const link = el("a", "", other);
      link.href = `#/profile/${other}`;
      link.addEventListener("click", (ev) => {
        ev.preventDefault();
        handlers.onOpen(other);
      });
      item.appendChild(link);
      item.appendChild(
        el("span", "score", ` simsc ${e.simsc.toFixed(3)} · ${e.decision}`),
      );
      list.appendChild(item);
    }
    section.appendChild(list);
  }
  return section;
}
