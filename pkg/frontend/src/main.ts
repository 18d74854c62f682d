/**
 * App wiring: hash routing between the review queue, keyword search,
 * profile detail, and the side-by-side comparison view.
 */

import { ApiClient, PendingMatchRow } from "./api.js";
import { buildComparison } from "./compare.js";
import { ReviewQueue } from "./queue.js";
import {
  el,
  errorBanner,
  renderComparison,
  renderProfile,
  renderQueue,
  renderSearchResults,
  toast,
} from "./render.js";

const api = new ApiClient("");
const queue = new ReviewQueue(api);

function content(): HTMLElement {
  return document.getElementById("content") as HTMLElement;
}

function show(node: HTMLElement): void {
  const root = content();
  root.replaceChildren(node);
}

function notify(message: string): void {
  document.body.appendChild(toast(message));
}

function renderQueueView(): void {
  show(
    renderQueue(queue.rows, {
      onVerdict: (row, verdict) => void handleVerdict(row, verdict),
      onCompare: (row) => openCompare(row.id1, row.id2),
    }),
  );
}

async function showQueue(): Promise<void> {
  try {
    await queue.load();
  } catch {
    show(errorBanner(`Cannot reach the service: ${queue.lastError}`, () => void showQueue()));
    return;
  }
  renderQueueView();
}

async function handleVerdict(
  row: PendingMatchRow,
  verdict: "match" | "nonmatch",
): Promise<void> {
  const outcome = await queue.submit(row.id1, row.id2, verdict);
  if (outcome.kind === "confirmed") {
    notify(
      verdict === "match"
        ? `Confirmed match ${row.id1} × ${row.id2}`
        : `Confirmed non-match ${row.id1} × ${row.id2}`,
    );
  } else if (outcome.kind === "error") {
    notify(`Could not confirm (${outcome.status}): ${outcome.message}`);
  }
  if (outcome.kind !== "duplicate") {
    // The queue model already holds the optimistic (or rolled-back) rows.
    renderQueueView();
  }
}

function openCompare(id1: string, id2: string): void {
  window.location.hash = `#/compare/${id1}/${id2}`;
}

async function showCompare(id1: string, id2: string): Promise<void> {
  try {
    const [left, right] = await Promise.all([
      api.getProfile(id1),
      api.getProfile(id2),
    ]);
    const edges = await api.similar(id1);
    const edge =
      edges.find(
        (e) =>
          (e.id1 === id1 && e.id2 === id2) || (e.id1 === id2 && e.id2 === id1),
      ) ?? null;
    show(renderComparison(left, right, buildComparison(left, right), edge));
  } catch (err) {
    show(errorBanner(String(err), () => void showCompare(id1, id2)));
  }
}

async function showProfile(id: string): Promise<void> {
  try {
    const [profile, edges] = await Promise.all([api.getProfile(id), api.similar(id)]);
    show(
      renderProfile(profile, edges, {
        onOpen: (next) => {
          window.location.hash = `#/profile/${next}`;
        },
      }),
    );
  } catch (err) {
    show(errorBanner(String(err), () => void showProfile(id)));
  }
}

async function showSearch(q: string): Promise<void> {
  const wrapper = el("section");
  const form = el("form", "search-form");
  const input = el("input") as HTMLInputElement;
  input.type = "search";
  input.value = q;
  input.placeholder = "keyword search";
  const button = el("button", "", "Search");
  form.append(input, button);
  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    window.location.hash = `#/search/${encodeURIComponent(input.value)}`;
  });
  wrapper.appendChild(form);
  if (q) {
    try {
      const hits = await api.search(q);
      wrapper.appendChild(
        renderSearchResults(hits, {
          onOpen: (id) => {
            window.location.hash = `#/profile/${id}`;
          },
        }),
      );
    } catch (err) {
      wrapper.appendChild(errorBanner(String(err), () => void showSearch(q)));
    }
  }
  show(wrapper);
}

async function route(): Promise<void> {
  const hash = window.location.hash || "#/queue";
  const parts = hash.replace(/^#\//, "").split("/");
  switch (parts[0]) {
    case "queue":
      await showQueue();
      break;
    case "search":
      await showSearch(decodeURIComponent(parts[1] ?? ""));
      break;
    case "profile":
      await showProfile(decodeURIComponent(parts[1] ?? ""));
      break;
    case "compare":
      await showCompare(
        decodeURIComponent(parts[1] ?? ""),
        decodeURIComponent(parts[2] ?? ""),
      );
      break;
    default:
      await showQueue();
  }
}

window.addEventListener("hashchange", () => void route());
window.addEventListener("DOMContentLoaded", () => void route());
