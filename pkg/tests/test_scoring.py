"""Scoring: rarity weight, match level, information level, simsc, rejsc."""

import math

import pytest
from hypothesis import given, settings, strategies as st

from graphlink.analyzers import AliasDictionary, StreetTypeDictionary
from graphlink.errors import SameId, SchemaError
from graphlink.model import (
    AttributeObject as A,
    ProvPair as PP,
    RelationObject as R,
    make_profile,
)
from graphlink.scoring import (
    MatchConfig,
    MatchedPair,
    inf,
    info_level,
    match_level,
    provenance_factor,
    rejsc,
    simsc,
)

from .oracles import inf_ref, simsc_ref


@pytest.fixture(scope="module")
def cfg():
    return MatchConfig()


class DictStats:
    def __init__(self, counts):
        self._counts = counts

    def word_count(self, word):
        return self._counts.get(word, 0)


class TestInf:
    def test_midpoint_exact(self, cfg):
        assert inf(600, cfg) == 0.5

    def test_left_asymptote(self, cfg):
        assert abs(inf(0, cfg) - 1.0) < 1e-12

    def test_common_word_vanishes(self, cfg):
        assert inf(700, cfg) == pytest.approx(1.0 / (1.0 + math.exp(10.0)))

    def test_monotone_decreasing(self, cfg):
        # Below m~226 the true values differ from 1.0 by ~1e-27, under the
        # float64 spacing at 1.0, so ties at exactly 1.0 are inevitable
        # there; the sequence must never increase and must be strictly
        # decreasing wherever doubles can tell the values apart.
        values = [inf(m, cfg) for m in range(0, 1201)]
        assert all(a >= b for a, b in zip(values, values[1:]))
        distinguishable = values[300:]
        assert all(a > b for a, b in zip(distinguishable, distinguishable[1:]))

    def test_positive_and_bounded(self, cfg):
        for m in (0, 600, 10_000, 10_000_000, 10**12):
            assert 0.0 < inf(m, cfg) <= 1.0

    def test_matches_direct_formula(self, cfg):
        for m in (0, 1, 59, 600, 601, 1200):
            assert inf(m, cfg) == pytest.approx(inf_ref(m), abs=0)


def _vals(*items):
    return [(v, tuple(p)) for v, p in items]


class TestMatchLevel:
    def test_near_name_goes_through_edit_similarity(self, cfg):
        score, pairs = match_level("name", _vals(("peter", ())), _vals(("pete", ())), cfg)
        assert score == pytest.approx(0.8)
        assert pairs == [MatchedPair("pete", "peter", 0.8)] or pairs == [
            MatchedPair("peter", "pete", 0.8)
        ]

    def test_exact_match(self, cfg):
        score, pairs = match_level("name", _vals(("john", ())), _vals(("john", ())), cfg)
        assert score == 1.0
        assert MatchedPair("john", "john", 1.0) in pairs

    def test_alias_expansion_makes_exact_match(self, cfg):
        score, _ = match_level("name", _vals(("richard", ())), _vals(("dick", ())), cfg)
        assert score >= 0.9

    def test_empty_side_contributes_nothing(self, cfg):
        assert match_level("name", [], _vals(("john", ())), cfg) == (0.0, [])

    def test_phonetic_route(self, cfg):
        score, _ = match_level("name", _vals(("smyth", ())), _vals(("smith", ())), cfg)
        assert score == pytest.approx(cfg.phonetic_weight)

    def test_initial_route_below_default_threshold(self, cfg):
        # Initials score 0.6 and the default retention threshold is 0.7,
        # so they only count under a loosened config.
        score, pairs = match_level("name", _vals(("j", ())), _vals(("john", ())), cfg)
        assert (score, pairs) == (0.0, [])
        loose = MatchConfig(value_match_threshold=0.6)
        score, _ = match_level("name", _vals(("j", ())), _vals(("john", ())), loose)
        assert score == pytest.approx(0.6)

    def test_dates_compare_atomically(self, cfg):
        exact, _ = match_level(
            "bdate", _vals(("1980.12.12", ())), _vals(("1980-12-12", ())), cfg
        )
        assert exact == 1.0
        # Shared day/month tokens must not make different dates match.
        off, pairs = match_level(
            "bdate", _vals(("1980.12.12", ())), _vals(("1985.12.12", ())), cfg
        )
        assert (off, pairs) == (0.0, [])

    def test_disjoint_provenance_damps_score(self, cfg):
        score, _ = match_level(
            "name",
            _vals(("john", (PP("until", "1990"),))),
            _vals(("john", (PP("since", "2005"),))),
            cfg,
        )
        assert score == pytest.approx(cfg.provenance_damping)

    def test_overlapping_provenance_undamped(self, cfg):
        score, _ = match_level(
            "name",
            _vals(("john", (PP("from", "1989"), PP("to", "1995")))),
            _vals(("john", (PP("from", "1990"), PP("to", "2000")))),
            cfg,
        )
        assert score == 1.0

    def test_best_combination_wins(self, cfg):
        # A second undamped value combination outweighs a damped exact one.
        score, _ = match_level(
            "name",
            _vals(("john", (PP("until", "1990"),)), ("john", ())),
            _vals(("john", (PP("since", "2005"),))),
            cfg,
        )
        assert score == 1.0


class TestInfoLevel:
    def test_worked_expression(self, cfg):
        stats = DictStats({"john": 650, "jones": 30, "smith": 500, "smiths": 20})
        pairs = [MatchedPair("john", "jones", 1.0), MatchedPair("smith", "smiths", 0.83)]
        expected = max(
            (inf_ref(650) + inf_ref(30)) / 2.0,
            (inf_ref(500) + inf_ref(20)) / 2.0,
        )
        assert info_level(pairs, stats, cfg) == expected

    def test_empty_pairs(self, cfg):
        assert info_level([], DictStats({}), cfg) == 0.0

    def test_midpoint_both_sides(self, cfg):
        stats = DictStats({"w1": 600, "w2": 600})
        assert info_level([MatchedPair("w1", "w2", 1.0)], stats, cfg) == pytest.approx(0.5)


class TestProvenanceFactor:
    def test_unconstrained_side(self, cfg):
        assert provenance_factor((), (PP("from", "1989"),), cfg) == 1.0

    def test_disjoint(self, cfg):
        assert provenance_factor(
            (PP("until", "1991"),), (PP("since", "2005"),), cfg
        ) == pytest.approx(0.8)

    def test_overlap(self, cfg):
        assert (
            provenance_factor(
                (PP("from", "1989"), PP("to", "1995")),
                (PP("from", "1990"), PP("to", "2000")),
                cfg,
            )
            == 1.0
        )


class TestSimsc:
    def test_zero_when_keys_disjoint(self, cfg, p1, l1):
        assert simsc(p1, l1, DictStats({}), cfg) == 0.0

    def test_positive_on_copy(self, cfg, p1):
        clone = make_profile("P9", list(p1.attributes), list(p1.relations))
        assert simsc(p1, clone, DictStats({}), cfg) > 0.0

    def test_same_id_rejected(self, cfg, p1):
        with pytest.raises(SameId):
            simsc(p1, p1, DictStats({}), cfg)

    def test_name_term_hand_evaluation(self, cfg, p1, p2):
        # Shared exact name with m(john)=2 contributes ~1.0.
        score, pairs = match_level(
            "name",
            [(a.value.lower(), a.prov) for a in p1.attributes if a.key == "name"],
            [(a.value.lower(), a.prov) for a in p2.attributes if a.key == "name"],
            cfg,
        )
        stats = DictStats({"john": 2})
        term = score * info_level(pairs, stats, cfg)
        assert term == pytest.approx((inf_ref(2) + inf_ref(2)) / 2.0)
        assert term == pytest.approx(1.0, abs=1e-6)

    def test_rare_word_dominance(self, cfg):
        a = make_profile("A1", [A("name", "cherith")])
        b = make_profile("B1", [A("name", "cherith")])
        common = simsc(a, b, DictStats({"cherith": 700}), cfg)
        rare = simsc(a, b, DictStats({"cherith": 3}), cfg)
        assert rare > common

    def test_relation_values_compared_as_target_bags(self, cfg):
        a = make_profile("A1", [A("type", "person")], [R("lives_at", "L8")])
        b = make_profile("B1", [A("type", "person")], [R("lives_at", "L9")])
        bags = {"L8": frozenset({"brown", "1"}), "L9": frozenset({"brown", "69"})}
        with_bags = simsc(a, b, DictStats({}), cfg, target_bags=bags.get)
        assert with_bags > 0.0
        assert simsc(a, b, DictStats({}), cfg) == 0.0  # no resolver, no contribution

    def test_matches_brute_force_oracle_on_corpus(self, cfg, corpus):
        counts: dict[str, int] = {}
        bags = {
            "L1": frozenset({"1", "brown", "blvd", "boulevard", "2000"}),
            "L2": frozenset({"69", "brown", "ave", "avenue", "5000"}),
            "P1": frozenset({"john", "peter", "m"}),
            "P2": frozenset({"bob", "john", "robert"}),
        }
        for bag in bags.values():
            for w in bag:
                counts[w] = counts.get(w, 0) + 1
        stats = DictStats(counts)
        ids = sorted(corpus)
        for i, x in enumerate(ids):
            for y in ids[i + 1 :]:
                mine = simsc(corpus[x], corpus[y], stats, cfg, target_bags=bags.get)
                ref = simsc_ref(corpus[x], corpus[y], counts, cfg, target_bags=bags)
                assert mine == pytest.approx(ref, abs=1e-9), (x, y)


words = st.sampled_from(
    ["john", "jon", "peter", "pete", "smith", "smyth", "brown", "2000", "m", "x"]
)
small_profiles = st.builds(
    lambda pid, names, extra: make_profile(
        pid,
        [A("type", "person")]
        + [A("name", n) for n in names]
        + ([A("city", extra)] if extra else []),
    ),
    st.sampled_from(["A1", "B2", "C3"]),
    st.lists(words, min_size=0, max_size=3),
    st.one_of(st.none(), words),
)


class TestSymmetry:
    @settings(max_examples=80, deadline=None)
    @given(small_profiles, small_profiles)
    def test_simsc_symmetric(self, a, b):
        if a.id == b.id:
            return
        cfg = MatchConfig()
        stats = DictStats({"john": 2, "smith": 650})
        assert simsc(a, b, stats, cfg) == simsc(b, a, stats, cfg)


class TestRejsc:
    def test_bdate_disagreement(self, cfg):
        a = make_profile("A1", [A("type", "person"), A("name", "ann"), A("bdate", "1980-12-12")])
        b = make_profile("B1", [A("type", "person"), A("name", "ann"), A("bdate", "1990-01-01")])
        assert rejsc(a, b, cfg) == 1

    def test_equal_bdate(self, cfg):
        a = make_profile("A1", [A("type", "person"), A("bdate", "1980-12-12")])
        b = make_profile("B1", [A("type", "person"), A("bdate", "1980-12-12")])
        assert rejsc(a, b, cfg) == 0

    def test_postcode_is_location_key(self, cfg, l1, l2):
        assert rejsc(l1, l2, cfg) == 1  # post 2000 vs 5000

    def test_different_types_no_penalty(self, cfg, p1, l1):
        assert rejsc(p1, l1, cfg) == 0

    def test_missing_key_attribute_no_penalty(self, cfg, p1):
        other = make_profile("P7", [A("type", "person"), A("name", "John")])
        assert rejsc(p1, other, cfg) == 0  # p1 carries no bdate

    def test_bounded_by_configured_keys(self):
        cfg = MatchConfig(key_attributes={"person": ("bdate", "ssn")})
        a = make_profile(
            "A1", [A("type", "person"), A("bdate", "1980-01-01"), A("ssn", "123")]
        )
        b = make_profile(
            "B1", [A("type", "person"), A("bdate", "1990-01-01"), A("ssn", "999")]
        )
        assert rejsc(a, b, cfg) == 2 <= len(cfg.key_attributes["person"])


class TestMatchConfig:
    def test_defaults_load_packaged_dictionaries(self, cfg):
        assert cfg.aliases.lookup("dick") == {"richard"}
        assert cfg.streets.lookup("blvd") == "boulevard"

    def test_invalid_values_rejected(self):
        with pytest.raises(SchemaError):
            MatchConfig(alpha=0.0)
        with pytest.raises(SchemaError):
            MatchConfig(phonetic_weight=1.5)
        with pytest.raises(SchemaError):
            MatchConfig(rho_max=-1)

    def test_from_file(self, tmp_path):
        aliases = tmp_path / "aliases.txt"
        aliases.write_text("peter\tpete\n")
        path = tmp_path / "match.conf"
        path.write_text(
            "# overrides\n"
            "alpha=0.2\n"
            "tau_match=2.0\n"
            "candidate_k=10\n"
            "sim_layout=kv_dual\n"
            "key_attributes.person=bdate,ssn\n"
            f"aliases={aliases}\n"
        )
        cfg = MatchConfig.from_file(path)
        assert cfg.alpha == 0.2 and cfg.tau_match == 2.0 and cfg.candidate_k == 10
        assert cfg.sim_layout == "kv_dual"
        assert cfg.key_attributes["person"] == ("bdate", "ssn")
        assert cfg.key_attributes["location"] == ("post",)  # defaults kept
        assert cfg.aliases.lookup("pete") == {"peter"}

    def test_from_file_rejects_unknown_keys(self, tmp_path):
        path = tmp_path / "match.conf"
        path.write_text("nonsense=1\n")
        with pytest.raises(SchemaError):
            MatchConfig.from_file(path)
