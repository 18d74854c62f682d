/**
 * Side-by-side comparison model: attribute and relation values of two
 * profiles aligned by key, multiplicity kept as stacked cells, provenance
 * rendered verbatim as badges. Pure data transformation; rendering lives
 * in render.ts.
 */

import { Profile, ProvPair } from "./api.js";

export interface ValueCell {
  value: string;
  kind: "attribute" | "relation";
  badges: string[];
}

export interface ComparisonRow {
  key: string;
  left: ValueCell[];
  right: ValueCell[];
  /** key present on only one side */
  unmatched: boolean;
}

function badges(prov?: ProvPair[]): string[] {
  return (prov ?? []).map((pp) => `${pp.pkey} ${pp.pvalue}`);
}

function cellsFor(profile: Profile, key: string): ValueCell[] {
  const cells: ValueCell[] = [];
  for (const a of profile.attributes) {
    if (a.key === key) {
      cells.push({ value: a.value, kind: "attribute", badges: badges(a.prov) });
    }
  }
  for (const r of profile.relations) {
    if (r.key === key) {
      cells.push({ value: r.target, kind: "relation", badges: badges(r.prov) });
    }
  }
  return cells;
}

function keysOf(profile: Profile): string[] {
  const keys: string[] = [];
  for (const obj of [...profile.attributes, ...profile.relations]) {
    if (!keys.includes(obj.key)) {
      keys.push(obj.key);
    }
  }
  return keys;
}

/** Shared keys first (alphabetical), then left-only, then right-only. */
export function buildComparison(left: Profile, right: Profile): ComparisonRow[] {
  const leftKeys = keysOf(left);
  const rightKeys = keysOf(right);
  const shared = leftKeys.filter((k) => rightKeys.includes(k)).sort();
  const leftOnly = leftKeys.filter((k) => !rightKeys.includes(k)).sort();
  const rightOnly = rightKeys.filter((k) => !leftKeys.includes(k)).sort();
  const rows: ComparisonRow[] = [];
  for (const key of [...shared, ...leftOnly, ...rightOnly]) {
    rows.push({
      key,
      left: cellsFor(left, key),
      right: cellsFor(right, key),
      unmatched: !shared.includes(key),
    });
  }
  return rows;
}
