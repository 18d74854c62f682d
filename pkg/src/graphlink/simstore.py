"""Similarity-edge storage under three pluggable physical layouts.

All layouts sit on the ordered key-value substrate and expose identical
logical behavior; they differ in how many physical records one logical
edge costs and in how neighbor lookups are answered:

* indexed_table - one primary record per pair plus two secondary index
  records (id1-major and id2-major), like a relational table with two
  indexes.
* kv_single     - one record keyed ID1+"-"+ID2. Neighbor search from the
  second id needs a full scan; that trade-off is the point of the layout.
* kv_dual       - two records, one per key order, so neighbors either way
  are a prefix scan.

The module also carries the update-transaction benchmark used to compare
the layouts (search + delete + insert per pair, averaged over iterations).
"""

from __future__ import annotations

import csv
import math
import random
import shutil
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

from .errors import BelowThreshold, NotFound, SameId
from .kvlog import OrderedKV
from .model import PENDING, SimilarityEdge, pair_key

LAYOUTS = ("indexed_table", "kv_single", "kv_dual")

DEFAULT_TAU_STORE = 0.5

_PAIR_SEP = "-"


def _encode(e: SimilarityEdge) -> str:
    return f"{e.simsc!r}|{e.rejsc}|{int(e.cfm)}|{e.decision}"


def _decode(id1: str, id2: str, blob: str) -> SimilarityEdge:
    simsc, rejsc, cfm, decision = blob.split("|")
    return SimilarityEdge(id1, id2, float(simsc), int(rejsc), cfm == "1", decision)


class SimilarityStore:
    """Common logical contract; subclasses define the physical key scheme."""

    variant = ""

    def __init__(self, directory: str | Path | None = None, tau_store: float = DEFAULT_TAU_STORE):
        self._kv = OrderedKV(directory)
        self.tau_store = tau_store

    def close(self) -> None:
        self._kv.close()

    def flush(self) -> None:
        self._kv.flush()

    def record_count(self) -> int:
        """Physical records held by the substrate."""
        return len(self._kv)

    def _check(self, e: SimilarityEdge) -> None:
        if e.simsc < self.tau_store:
            raise BelowThreshold(
                f"simsc {e.simsc} below store threshold {self.tau_store}"
            )

    def upsert_edge(self, e: SimilarityEdge) -> None:
        self._check(e)
        self._replace(e)

    def get_edge(self, a: str, b: str) -> SimilarityEdge:
        """The canonical edge for the pair, regardless of argument order."""
        if a == b:
            raise SameId(f"edge lookup needs two distinct ids, got {a!r}")
        edge = self.find_edge(a, b)
        if edge is None:
            raise NotFound(f"no similarity edge ({a}, {b})")
        return edge

    def find_edge(self, a: str, b: str) -> SimilarityEdge | None:
        id1, id2 = pair_key(a, b)
        blob = self._kv.get(self._primary_key(id1, id2))
        if blob is None:
            return None
        return _decode(id1, id2, blob)

    def delete_edge(self, a: str, b: str) -> None:
        """Remove the pair's entry under every key order; idempotent."""
        id1, id2 = pair_key(a, b)
        self._remove(id1, id2)

    def edges(self) -> list[SimilarityEdge]:
        """All logical edges, canonical order, ascending pair."""
        raise NotImplementedError

    def neighbors(self, profile_id: str) -> list[SimilarityEdge]:
        """Every stored edge containing the id, ascending pair order."""
        raise NotImplementedError

    def update_transaction(
        self, batch: list[SimilarityEdge], phases: dict[str, float] | None = None
    ) -> float:
        """Per edge: search the entry, delete it if present, insert the new one.

        Returns wall-clock seconds for the whole batch. When `phases` is
        given, per-operation time is accumulated into it under the keys
        "search", "delete", and "insert" (adds timer overhead).
        """
        clock = time.perf_counter
        started = clock()
        if phases is None:
            for e in batch:
                if e.simsc < self.tau_store:
                    raise BelowThreshold(
                        f"simsc {e.simsc} below store threshold {self.tau_store}"
                    )
                self._replace(e)
        else:
            search = delete = insert = 0.0
            for e in batch:
                if e.simsc < self.tau_store:
                    raise BelowThreshold(
                        f"simsc {e.simsc} below store threshold {self.tau_store}"
                    )
                t0 = clock()
                present = self._present(e.id1, e.id2)
                t1 = clock()
                if present:
                    self._remove(e.id1, e.id2)
                t2 = clock()
                self._insert(e)
                t3 = clock()
                search += t1 - t0
                delete += t2 - t1
                insert += t3 - t2
            phases["search"] = phases.get("search", 0.0) + search
            phases["delete"] = phases.get("delete", 0.0) + delete
            phases["insert"] = phases.get("insert", 0.0) + insert
        return clock() - started

    # -- physical scheme hooks ---------------------------------------------

    def _primary_key(self, id1: str, id2: str) -> str:
        raise NotImplementedError

    def _present(self, id1: str, id2: str) -> bool:
        return self._primary_key(id1, id2) in self._kv

    def _replace(self, e: SimilarityEdge) -> None:
        """Search + delete + insert for one canonical edge."""
        if self._present(e.id1, e.id2):
            self._remove(e.id1, e.id2)
        self._insert(e)

    def _insert(self, e: SimilarityEdge) -> None:
        raise NotImplementedError

    def _remove(self, id1: str, id2: str) -> None:
        raise NotImplementedError


class KVSingleStore(SimilarityStore):
    """One record per pair at key ID1+"-"+ID2 (canonical order only)."""

    variant = "kv_single"

    def _primary_key(self, id1: str, id2: str) -> str:
        return id1 + _PAIR_SEP + id2

    def _insert(self, e: SimilarityEdge) -> None:
        self._kv.put(e.id1 + _PAIR_SEP + e.id2, _encode(e))

    def _remove(self, id1: str, id2: str) -> None:
        self._kv.delete(id1 + _PAIR_SEP + id2)

    def edges(self) -> list[SimilarityEdge]:
        out = []
        for key, blob in self._kv.scan():
            id1, id2 = key.split(_PAIR_SEP)
            out.append(_decode(id1, id2, blob))
        return out

    def neighbors(self, profile_id: str) -> list[SimilarityEdge]:
        # First-position hits come from a prefix scan; second-position hits
        # need a full scan, the documented cost of the single-entry layout.
        out = []
        for key, blob in self._kv.scan(profile_id + _PAIR_SEP):
            id1, id2 = key.split(_PAIR_SEP)
            out.append(_decode(id1, id2, blob))
        suffix = _PAIR_SEP + profile_id
        for key, blob in self._kv.scan():
            if key.endswith(suffix):
                id1, id2 = key.split(_PAIR_SEP)
                out.append(_decode(id1, id2, blob))
        return sorted(out, key=lambda e: (e.id1, e.id2))


class KVDualStore(SimilarityStore):
    """Two records per pair, one per key order, mirroring each other."""

    variant = "kv_dual"

    def _primary_key(self, id1: str, id2: str) -> str:
        return id1 + _PAIR_SEP + id2

    def _insert(self, e: SimilarityEdge) -> None:
        blob = _encode(e)
        self._kv.put(e.id1 + _PAIR_SEP + e.id2, blob)
        self._kv.put(e.id2 + _PAIR_SEP + e.id1, blob)

    def _remove(self, id1: str, id2: str) -> None:
        self._kv.delete(id1 + _PAIR_SEP + id2)
        self._kv.delete(id2 + _PAIR_SEP + id1)

    def edges(self) -> list[SimilarityEdge]:
        out = []
        for key, blob in self._kv.scan():
            id1, id2 = key.split(_PAIR_SEP)
            if id1 < id2:
                out.append(_decode(id1, id2, blob))
        return out

    def neighbors(self, profile_id: str) -> list[SimilarityEdge]:
        out = []
        for key, blob in self._kv.scan(profile_id + _PAIR_SEP):
            a, b = key.split(_PAIR_SEP)
            id1, id2 = pair_key(a, b)
            out.append(_decode(id1, id2, blob))
        return sorted(out, key=lambda e: (e.id1, e.id2))


class IndexedTableStore(SimilarityStore):
    """Primary table keyed by the pair plus two persisted secondary indexes.

    Index records are keyed id-major in each direction ("x-A-B" holds the
    pair (A,B) under A, "y-B-A" holds it under B), so neighbors from either
    id is a prefix scan; the separator is safe because ids cannot contain
    "-".
    """

    variant = "indexed_table"

    _TABLE = "t-"
    _IDX1 = "x-"
    _IDX2 = "y-"

    def _primary_key(self, id1: str, id2: str) -> str:
        return self._TABLE + id1 + _PAIR_SEP + id2

    def _insert(self, e: SimilarityEdge) -> None:
        pair = e.id1 + _PAIR_SEP + e.id2
        self._kv.put(self._TABLE + pair, _encode(e))
        self._kv.put(self._IDX1 + pair, "")
        self._kv.put(self._IDX2 + e.id2 + _PAIR_SEP + e.id1, "")

    def _remove(self, id1: str, id2: str) -> None:
        pair = id1 + _PAIR_SEP + id2
        self._kv.delete(self._TABLE + pair)
        self._kv.delete(self._IDX1 + pair)
        self._kv.delete(self._IDX2 + id2 + _PAIR_SEP + id1)

    def edges(self) -> list[SimilarityEdge]:
        out = []
        for key, blob in self._kv.scan(self._TABLE):
            id1, id2 = key[len(self._TABLE) :].split(_PAIR_SEP)
            out.append(_decode(id1, id2, blob))
        return out

    def neighbors(self, profile_id: str) -> list[SimilarityEdge]:
        pairs = []
        for key, _ in self._kv.scan(self._IDX1 + profile_id + _PAIR_SEP):
            pairs.append((profile_id, key.rsplit(_PAIR_SEP, 1)[1]))
        for key, _ in self._kv.scan(self._IDX2 + profile_id + _PAIR_SEP):
            pairs.append((key.rsplit(_PAIR_SEP, 1)[1], profile_id))
        out = []
        for id1, id2 in sorted(pairs):
            blob = self._kv.get(self._TABLE + id1 + _PAIR_SEP + id2)
            if blob is not None:
                out.append(_decode(id1, id2, blob))
        return out


_STORE_CLASSES = {
    cls.variant: cls for cls in (IndexedTableStore, KVSingleStore, KVDualStore)
}


def open_store(
    variant: str,
    directory: str | Path | None = None,
    tau_store: float = DEFAULT_TAU_STORE,
) -> SimilarityStore:
    try:
        cls = _STORE_CLASSES[variant]
    except KeyError:
        raise ValueError(f"unknown layout {variant!r}; pick one of {LAYOUTS}") from None
    return cls(directory, tau_store)


# -- benchmark -------------------------------------------------------------


@dataclass
class BenchReport:
    """Per-layout benchmark outcome across the configured pair counts."""

    layout: str
    pair_counts: list[int]
    avg_txn_seconds: list[float]
    ops_breakdown: list[dict[str, float]] = field(default_factory=list)
    samples: list[list[float]] = field(default_factory=list)
    iterations: int = 0

    def mean_at(self, count: int) -> float:
        return self.avg_txn_seconds[self.pair_counts.index(count)]


def generate_pairs(
    count: int, rng: random.Random, tau_store: float = DEFAULT_TAU_STORE
) -> list[SimilarityEdge]:
    """Synthetic canonical pairs with random scores.

    Ids are drawn uniformly from a pool of ~sqrt(2*count) profiles so the
    pair space is realistically dense (many repeats, ~capacity distinct).
    """
    pool = max(3, math.isqrt(2 * count) + 1)
    ids = [f"N{i}" for i in range(pool)]
    batch = []
    uniform = rng.uniform
    randrange = rng.randrange
    for _ in range(count):
        i = randrange(pool)
        j = randrange(pool - 1)
        if j >= i:
            j += 1
        a, b = (ids[i], ids[j]) if ids[i] < ids[j] else (ids[j], ids[i])
        batch.append(
            SimilarityEdge(a, b, round(uniform(tau_store, 10.0), 4), 0, False, PENDING)
        )
    return batch


def run_benchmark(
    layouts: list[str] | tuple[str, ...] = LAYOUTS,
    pair_counts: list[int] | tuple[int, ...] = (10_000, 100_000, 1_000_000),
    iterations: int = 5,
    base_dir: str | Path | None = None,
    seed: int = 0,
    tau_store: float = DEFAULT_TAU_STORE,
) -> list[BenchReport]:
    """Time update transactions per layout and pair count.

    Every layout replays the same synthetic batch, on a fresh store in its
    own directory (deleted afterwards), `iterations` times in a row. The
    first pass populates the store; later passes exercise the full
    search/delete/insert path.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    for layout in layouts:
        if layout not in _STORE_CLASSES:
            raise ValueError(f"unknown layout {layout!r}; pick one of {LAYOUTS}")
    own_tmp = base_dir is None
    root = Path(tempfile.mkdtemp(prefix="simbench-")) if own_tmp else Path(base_dir)
    root.mkdir(parents=True, exist_ok=True)
    reports = []
    try:
        for layout in layouts:
            report = BenchReport(layout, list(pair_counts), [], iterations=iterations)
            for count in pair_counts:
                # Seeded per count: every layout replays the identical batch.
                batch = generate_pairs(count, random.Random(seed + count), tau_store)
                store_dir = root / f"{layout}_{count}"
                store = open_store(layout, store_dir, tau_store)
                phases: dict[str, float] = {}
                times = []
                try:
                    for _ in range(iterations):
                        times.append(store.update_transaction(batch, phases))
                finally:
                    store.close()
                shutil.rmtree(store_dir, ignore_errors=True)
                report.samples.append(times)
                report.avg_txn_seconds.append(sum(times) / len(times))
                report.ops_breakdown.append(
                    {op: total / iterations for op, total in sorted(phases.items())}
                )
            reports.append(report)
    finally:
        if own_tmp:
            shutil.rmtree(root, ignore_errors=True)
    return reports


def write_csv(reports: list[BenchReport], path: str | Path) -> None:
    """Raw per-iteration rows plus a summary row per (layout, pairs)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["layout", "pairs", "iteration", "seconds", "op"])
        for report in reports:
            for count, times, breakdown in zip(
                report.pair_counts, report.samples, report.ops_breakdown
            ):
                for i, seconds in enumerate(times, 1):
                    writer.writerow([report.layout, count, i, f"{seconds:.6f}", "txn"])
                for op, seconds in breakdown.items():
                    writer.writerow([report.layout, count, "mean", f"{seconds:.6f}", op])
                mean = sum(times) / len(times)
                writer.writerow([report.layout, count, "mean", f"{mean:.6f}", "txn"])


def write_aggregate(reports: list[BenchReport], path: str | Path) -> None:
    """Gnuplot-friendly wide table: mean and log2(mean) per layout and size."""
    layouts = [r.layout for r in reports]
    counts = sorted({c for r in reports for c in r.pair_counts})
    with open(path, "w", encoding="utf-8") as fh:
        header = ["# pairs"]
        header += [f"{name}_s" for name in layouts]
        header += [f"{name}_log2s" for name in layouts]
        fh.write("\t".join(header) + "\n")
        for count in counts:
            row = [str(count)]
            means = []
            for report in reports:
                if count in report.pair_counts:
                    means.append(report.mean_at(count))
                else:
                    means.append(float("nan"))
            row += [f"{m:.6f}" for m in means]
            row += [f"{math.log2(m):.4f}" if m > 0 else "nan" for m in means]
            fh.write("\t".join(row) + "\n")
