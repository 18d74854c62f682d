"""Facade wiring the stores, indexes, and linker over one data directory.

Layout on disk: `<data>/kb` (profile rows), `<data>/idx` (index snapshot),
`<data>/sim` (similarity edges under the configured layout). Pass
data_dir=None for a fully in-memory engine.

All mutations funnel through one re-entrant lock (single-writer, readers
take it briefly for consistent snapshots). A long link run executes as a
single background job; starting a second one while the first is live is
refused.
"""

from __future__ import annotations

import threading
import time
from pathlib import Path

from .errors import NotFound
from .indexer import Indexer, NestedQuery
from .kb import ProfileStore
from .linker import Linker, LinkRunStats
from .model import PENDING, Profile, SimilarityEdge
from .scoring import MatchConfig
from .simstore import open_store


class Engine:
    def __init__(self, data_dir: str | Path | None = None, cfg: MatchConfig | None = None):
        self.cfg = cfg or MatchConfig()
        self.data_dir = Path(data_dir) if data_dir is not None else None
        self._lock = threading.RLock()
        # Job management has its own lock so a status/start probe is never
        # starved by a run that is holding the write lock.
        self._job_lock = threading.Lock()
        self._link_thread: threading.Thread | None = None
        self._last_link_stats: LinkRunStats | None = None
        self._link_error: str | None = None

        kb_dir = idx_dir = sim_dir = None
        if self.data_dir is not None:
            self.data_dir.mkdir(parents=True, exist_ok=True)
            kb_dir = self.data_dir / "kb"
            idx_dir = self.data_dir / "idx"
            sim_dir = self.data_dir / "sim"
        self.kb = ProfileStore(kb_dir)
        self.indexer = Indexer(self.cfg)
        self.sim = open_store(self.cfg.sim_layout, sim_dir, self.cfg.tau_store)
        self.linker = Linker(self.kb, self.indexer, self.sim, self.cfg)
        self._idx_dir = idx_dir

        if idx_dir is None or not self.indexer.load(idx_dir, self.kb.generation):
            self.indexer.rebuild(self.kb.scan_profiles(), self.resolve)

    # -- lifecycle ---------------------------------------------------------

    def close(self) -> None:
        with self._lock:
            if self._idx_dir is not None:
                self.indexer.save(self._idx_dir, self.kb.generation)
            self.kb.close()
            self.sim.close()

    def __enter__(self) -> "Engine":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- profiles ----------------------------------------------------------

    def resolve(self, profile_id: str) -> Profile | None:
        try:
            return self.kb.get_profile(profile_id)
        except NotFound:
            return None

    def put_profile(self, p: Profile) -> None:
        """Store and (re)index a profile, refreshing dependent summaries."""
        with self._lock:
            self.kb.put_profile(p)
            self.indexer.index_profile(p, resolve=self.resolve)
            for dep in self.indexer.dependents(p.id):
                if dep != p.id:
                    dependent = self.resolve(dep)
                    if dependent is not None:
                        self.indexer.index_profile(dependent, resolve=self.resolve)

    def put_and_relink(self, p: Profile) -> list[SimilarityEdge]:
        """Profile update path: store, re-index, re-link it and affected ids."""
        with self._lock:
            self.put_profile(p)
            affected = self.indexer.dependents(p.id)
            for edge in self.sim.neighbors(p.id):
                affected.add(edge.id2 if edge.id1 == p.id else edge.id1)
            affected.discard(p.id)
            edges = self.linker.link_profile(p.id)
            for other in sorted(affected):
                if self.kb.exists(other):
                    self.linker.link_profile(other)
            return edges

    def get_profile(self, profile_id: str) -> Profile:
        with self._lock:
            return self.kb.get_profile(profile_id)

    def delete_profile(self, profile_id: str) -> None:
        """Drop a profile, its postings, and every edge that mentions it."""
        with self._lock:
            for edge in self.sim.neighbors(profile_id):
                self.sim.delete_edge(edge.id1, edge.id2)
            self.indexer.remove_profile(profile_id)
            self.kb.delete_profile(profile_id)

    # -- queries -----------------------------------------------------------

    def search(self, q: str, k: int) -> list[tuple[str, float]]:
        with self._lock:
            return self.indexer.keyword_search(q, k)

    def nested_search(self, query: NestedQuery) -> list[str]:
        with self._lock:
            return self.indexer.nested_search(query)

    def similar(self, profile_id: str) -> list[SimilarityEdge]:
        with self._lock:
            if not self.kb.exists(profile_id):
                raise NotFound(f"no profile {profile_id!r}")
            return self.sim.neighbors(profile_id)

    def word_stats(self) -> dict[str, int]:
        with self._lock:
            return self.indexer.stats.counts()

    def pending_matches(
        self, min_score: float = 0.0, limit: int = 100
    ) -> list[SimilarityEdge]:
        """Review queue: pending edges, best score first, pair as tiebreak."""
        with self._lock:
            edges = [
                e
                for e in self.sim.edges()
                if e.decision == PENDING and e.simsc >= min_score
            ]
        edges.sort(key=lambda e: (-e.simsc, e.id1, e.id2))
        return edges[:limit]

    # -- linking -----------------------------------------------------------

    def link_profile(self, profile_id: str) -> list[SimilarityEdge]:
        with self._lock:
            return self.linker.link_profile(profile_id)

    def link_all(self) -> LinkRunStats:
        """Link every profile, taking the write lock per profile so that
        reads and confirmations interleave with a long run; a confirmation
        landing mid-run wins over the run's earlier upsert."""
        started = time.perf_counter()
        stats = LinkRunStats()
        seen: set[tuple[str, str]] = set()
        with self._lock:
            profile_ids = self.kb.profile_ids()
        for profile_id in profile_ids:
            with self._lock:
                if self.kb.exists(profile_id):
                    self.linker.link_profile(profile_id, seen=seen, stats=stats)
                    stats.profiles_processed += 1
        with self._lock:
            self.sim.flush()
        stats.elapsed_seconds = time.perf_counter() - started
        self._last_link_stats = stats
        return stats

    def confirm(self, a: str, b: str, verdict: str) -> SimilarityEdge:
        with self._lock:
            return self.linker.confirm(a, b, verdict)

    def start_link_run(self) -> bool:
        """Kick off link_all in the background; False when one is running."""
        with self._job_lock:
            if self._link_thread is not None and self._link_thread.is_alive():
                return False
            self._link_error = None

            def job() -> None:
                try:
                    self.link_all()
                except Exception as exc:  # surfaced through link_status
                    self._link_error = f"{type(exc).__name__}: {exc}"

            self._link_thread = threading.Thread(target=job, daemon=True)
            self._link_thread.start()
            return True

    def link_status(self) -> dict:
        running = self._link_thread is not None and self._link_thread.is_alive()
        return {
            "running": running,
            "last": self._last_link_stats.to_obj() if self._last_link_stats else None,
            "error": self._link_error,
        }

    def wait_for_link_run(self, timeout: float | None = None) -> None:
        thread = self._link_thread
        if thread is not None:
            thread.join(timeout)
