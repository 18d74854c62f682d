"""Linking pipeline: prediction rule, edge maintenance, confirmations."""

import pytest

from graphlink.engine import Engine
from graphlink.errors import NotFound
from graphlink.linker import predict
from graphlink.model import AttributeObject as A, make_profile
from graphlink.scoring import MatchConfig


@pytest.fixture
def engine(corpus):
    eng = Engine()
    for p in corpus.values():
        eng.put_profile(p)
    yield eng
    eng.close()


class TestPredict:
    @pytest.fixture
    def cfg(self):
        return MatchConfig()

    def test_match_boundary_inclusive(self, cfg):
        assert predict(cfg.tau_match, 0, cfg) == "match"

    def test_penalties_block_automatch(self, cfg):
        assert predict(99.0, cfg.rho_max + 1, cfg) == "pending"

    def test_below_store_threshold_is_nonmatch(self, cfg):
        assert predict(cfg.tau_store - 0.01, 0, cfg) == "nonmatch"

    def test_between_thresholds_is_pending(self, cfg):
        assert predict((cfg.tau_store + cfg.tau_match) / 2, 0, cfg) == "pending"

    def test_monotone_in_score_antitone_in_penalties(self, cfg):
        order = {"nonmatch": 0, "pending": 1, "match": 2}
        scores = [0.0, cfg.tau_store, 1.0, cfg.tau_match, 5.0]
        for penalties in (0, 1, 3):
            ranks = [order[predict(s, penalties, cfg)] for s in scores]
            assert ranks == sorted(ranks)
        for score in scores:
            ranks = [order[predict(score, r, cfg)] for r in (0, 1, 2)]
            assert ranks == sorted(ranks, reverse=True)


class TestLinkProfile:
    def test_shared_name_produces_edge(self, engine):
        edges = engine.link_profile("P1")
        assert {(e.id1, e.id2) for e in edges} >= {("P1", "P2")}
        stored = engine.sim.get_edge("P1", "P2")
        assert stored.simsc >= engine.cfg.tau_store

    def test_no_candidates_no_edges(self, engine):
        engine.put_profile(make_profile("Q9", [A("name", "xyzzyx")]))
        assert engine.link_profile("Q9") == []

    def test_unknown_profile(self, engine):
        with pytest.raises(NotFound):
            engine.link_profile("GHOST")

    def test_no_self_edges(self, engine):
        for pid in ("P1", "P2", "L1", "L2"):
            for e in engine.link_profile(pid):
                assert e.id1 != e.id2

    def test_stale_edge_dropped_when_profile_changes(self, engine):
        engine.link_all()
        assert engine.sim.find_edge("P1", "P2") is not None
        # P1 loses everything that made it similar to P2.
        engine.put_and_relink(make_profile("P1", [A("type", "person"), A("name", "Zzz")]))
        assert engine.sim.find_edge("P1", "P2") is None


class TestLinkAll:
    def test_worked_corpus(self, engine):
        stats = engine.link_all()
        assert stats.profiles_processed == 4
        assert stats.pairs_scored >= 1
        assert engine.sim.find_edge("P1", "P2") is not None
        assert stats.edges_upserted + stats.edges_pruned <= stats.pairs_scored

    def test_empty_kb(self):
        with Engine() as eng:
            stats = eng.link_all()
        assert stats.profiles_processed == 0
        assert stats.pairs_scored == 0

    def test_idempotent_rerun(self, engine):
        engine.link_all()
        first = {(e.id1, e.id2, e.simsc, e.rejsc, e.decision) for e in engine.sim.edges()}
        engine.link_all()
        second = {(e.id1, e.id2, e.simsc, e.rejsc, e.decision) for e in engine.sim.edges()}
        assert first == second

    def test_each_pair_scored_once(self, engine):
        stats = engine.link_all()
        pairs = {(e.id1, e.id2) for e in engine.sim.edges()}
        assert stats.pairs_scored >= len(pairs)
        # Scoring both orientations would double this count.
        assert stats.pairs_scored <= 4 * 3 / 2

    def test_persisted_edge_floor(self, engine):
        engine.link_all()
        assert all(e.simsc >= engine.cfg.tau_store for e in engine.sim.edges())


class TestConfirm:
    def test_confirm_flips_cfm(self, engine):
        engine.link_all()
        edge = engine.confirm("L1", "L2", "nonmatch")
        assert edge.cfm is True and edge.decision == "nonmatch"
        assert engine.sim.get_edge("L2", "L1").cfm is True

    def test_confirm_absent_pair(self, engine):
        with pytest.raises(NotFound):
            engine.confirm("P1", "L2", "match")

    def test_bad_verdict(self, engine):
        engine.link_all()
        with pytest.raises(ValueError):
            engine.confirm("P1", "P2", "maybe")

    def test_confirmation_sticky_across_runs(self, engine):
        engine.link_all()
        engine.confirm("P1", "P2", "match")
        for _ in range(3):
            engine.link_all()
        edge = engine.sim.get_edge("P1", "P2")
        assert edge.cfm is True and edge.decision == "match"

    def test_scores_refresh_while_verdict_sticks(self, engine):
        engine.link_all()
        before = engine.confirm("P1", "P2", "match")
        richer = make_profile(
            "P2",
            [
                A("type", "person"),
                A("name", "Bob"),
                A("name", "John"),
                A("name", "Peter"),
                A("sex", "m"),
                A("bdate", "1980.12.12"),
            ],
            list(engine.get_profile("P2").relations),
        )
        engine.put_and_relink(richer)
        after = engine.sim.get_edge("P1", "P2")
        assert after.cfm is True and after.decision == "match"
        assert after.simsc != before.simsc


class TestBackgroundRun:
    def test_single_run_at_a_time(self, engine):
        # The lock-per-profile design makes runs fast here; rely on the flag.
        assert engine.start_link_run() is True
        engine.wait_for_link_run(timeout=30)
        assert engine.link_status()["running"] is False
        assert engine.link_status()["last"]["profiles_processed"] == 4

    def test_second_start_refused_while_running(self, engine, monkeypatch):
        import threading

        gate = threading.Event()
        original = engine.linker.link_profile

        def slow(*args, **kwargs):
            gate.wait(5)
            return original(*args, **kwargs)

        monkeypatch.setattr(engine.linker, "link_profile", slow)
        assert engine.start_link_run() is True
        try:
            assert engine.start_link_run() is False
        finally:
            gate.set()
            engine.wait_for_link_run(timeout=30)
        assert engine.start_link_run() is True
        engine.wait_for_link_run(timeout=30)
