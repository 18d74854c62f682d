"""The linking pipeline: blocking, pairwise scoring, edge maintenance,
match prediction, and human confirmation.

Prediction is a pluggable threshold rule: a pair auto-matches only when
its similarity clears the match threshold and it has no more than the
allowed number of key-attribute disagreements. Confirmed edges are
sticky: linking refreshes their scores but never their verdict.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

from .errors import NotFound
from .indexer import Indexer
from .kb import ProfileStore
from .model import MATCH, NONMATCH, PENDING, SimilarityEdge, make_edge, pair_key
from .scoring import MatchConfig, rejsc, simsc
from .simstore import SimilarityStore

VERDICTS = (MATCH, NONMATCH)


@dataclass
class LinkRunStats:
    profiles_processed: int = 0
    pairs_scored: int = 0
    edges_upserted: int = 0
    edges_pruned: int = 0
    elapsed_seconds: float = 0.0

    def to_obj(self) -> dict:
        return {
            "profiles_processed": self.profiles_processed,
            "pairs_scored": self.pairs_scored,
            "edges_upserted": self.edges_upserted,
            "edges_pruned": self.edges_pruned,
            "elapsed_seconds": self.elapsed_seconds,
        }


def predict(score: float, penalties: int, cfg: MatchConfig) -> str:
    """Threshold decision rule: monotone in score, antitone in penalties.

    Any key-attribute disagreement beyond the allowance blocks an
    automatic match no matter how high the score is.
    """
    if score < cfg.tau_store:
        return NONMATCH
    if score >= cfg.tau_match and penalties <= cfg.rho_max:
        return MATCH
    return PENDING


class Linker:
    """Scores candidate pairs and maintains the similarity-edge store."""

    def __init__(
        self,
        kb: ProfileStore,
        indexer: Indexer,
        sim: SimilarityStore,
        cfg: MatchConfig | None = None,
    ):
        self.kb = kb
        self.indexer = indexer
        self.sim = sim
        self.cfg = cfg or MatchConfig()

    def _target_bag(self, profile_id: str):
        return self.indexer.bag_if_indexed(profile_id)

    def link_profile(
        self,
        profile_id: str,
        seen: set[tuple[str, str]] | None = None,
        stats: LinkRunStats | None = None,
    ) -> list[SimilarityEdge]:
        """Score the profile against its candidates and refresh its edges.

        Existing neighbors are re-scored as well, so edges invalidated by
        a profile change are updated or dropped. Confirmed edges keep
        their cfm/decision; an unconfirmed edge whose refreshed score
        falls under the store threshold is deleted.
        """
        p = self.kb.get_profile(profile_id)
        cfg = self.cfg
        targets = set(self.indexer.candidates(p, cfg.candidate_k))
        for edge in self.sim.neighbors(profile_id):
            targets.add(edge.id2 if edge.id1 == profile_id else edge.id1)
        targets.discard(profile_id)
        stats = stats if stats is not None else LinkRunStats()
        upserted: list[SimilarityEdge] = []
        for other_id in sorted(targets):
            pair = pair_key(profile_id, other_id)
            if seen is not None:
                if pair in seen:
                    continue
                seen.add(pair)
            try:
                other = self.kb.get_profile(other_id)
            except NotFound:
                continue
            score = simsc(p, other, self.indexer.stats, cfg, target_bags=self._target_bag)
            penalties = rejsc(p, other, cfg)
            stats.pairs_scored += 1
            existing = self.sim.find_edge(profile_id, other_id)
            if score >= cfg.tau_store:
                if existing is not None and existing.cfm:
                    edge = replace(existing, simsc=score, rejsc=penalties)
                else:
                    edge = make_edge(
                        profile_id,
                        other_id,
                        score,
                        penalties,
                        cfm=False,
                        decision=predict(score, penalties, cfg),
                    )
                self.sim.upsert_edge(edge)
                stats.edges_upserted += 1
                upserted.append(edge)
            else:
                stats.edges_pruned += 1
                if existing is not None and not existing.cfm:
                    self.sim.delete_edge(profile_id, other_id)
        return upserted

    def link_all(self) -> LinkRunStats:
        """Link every stored profile; each unordered pair scored once."""
        started = time.perf_counter()
        stats = LinkRunStats()
        seen: set[tuple[str, str]] = set()
        for profile_id in self.kb.profile_ids():
            self.link_profile(profile_id, seen=seen, stats=stats)
            stats.profiles_processed += 1
        self.sim.flush()
        stats.elapsed_seconds = time.perf_counter() - started
        return stats

    def confirm(self, a: str, b: str, verdict: str) -> SimilarityEdge:
        """Record a human verdict on an existing edge; sticky afterwards."""
        if verdict not in VERDICTS:
            raise ValueError(f"verdict must be one of {VERDICTS}, got {verdict!r}")
        edge = self.sim.get_edge(a, b)
        confirmed = replace(edge, cfm=True, decision=verdict)
        self.sim.upsert_edge(confirmed)
        self.sim.flush()
        return confirmed
