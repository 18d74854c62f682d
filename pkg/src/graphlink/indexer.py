"""Keyword/blocking index, nested structured index, and word statistics.

The keyword index works over per-profile summary bags: normalized own
attribute values plus the values of relation targets of a different
entity type, with provenance, attribute names, and the type label all
excluded. Rankings weight matched words by rarity, with phonetic-code
hits discounted.

The nested index answers structured queries whose clauses must each be
satisfied inside a single attribute- or relation-object, which is what
keeps value multiplicity and provenance semantics intact. A flat index
would happily pair one object's value with another object's provenance.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

from .errors import MalformedQuery, NotFound
from .kb import NodeRow, assemble_profile, profile_rows
from .kvlog import read_records, write_record
from .model import (
    Profile,
    ProvPair,
    TEMPORAL_END_KEYS,
    TEMPORAL_KEYS,
    TEMPORAL_START_KEYS,
    TYPE_KEY,
    intervals_overlap,
    parse_date_key,
    temporal_interval,
)
from .analyzers import phonetic_codes, tokenize
from .scoring import MatchConfig, inf, value_words

Resolver = Callable[[str], Profile | None]

_SNAPSHOT_FILE = "snapshot"


def _own_values(p: Profile, cfg: MatchConfig) -> set[str]:
    """Normalized words of a profile's own attribute values, type excluded."""
    words: set[str] = set()
    for a in p.attributes:
        if a.key != TYPE_KEY:
            words.update(value_words(a.value, cfg))
    return words


def summarize(p: Profile, resolve: Resolver, cfg: MatchConfig) -> frozenset[str]:
    """Summary bag: own values plus one-hop values of cross-type targets.

    Relation targets of the same entity type are left out (a person's
    friends' names do not describe the person); unresolvable targets
    contribute nothing.
    """
    bag = _own_values(p, cfg)
    own_type = p.type_label()
    for r in p.relations:
        target = resolve(r.target)
        if target is not None and target.type_label() != own_type:
            bag.update(_own_values(target, cfg))
    return frozenset(bag)


@dataclass(frozen=True)
class NestedClause:
    """One conjunct: key, optional value words, optional provenance constraints."""

    key: str
    value: str = ""
    prov_constraints: tuple[ProvPair, ...] = ()


@dataclass(frozen=True)
class NestedQuery:
    """Conjunction of clauses, each to be satisfied within a single object."""

    clauses: tuple[NestedClause, ...]

    @classmethod
    def from_obj(cls, obj: dict) -> "NestedQuery":
        try:
            clauses = []
            for c in obj["clauses"]:
                prov = tuple(
                    ProvPair(pp["pkey"], pp["pvalue"]) for pp in c.get("prov", [])
                )
                clauses.append(NestedClause(c.get("key", ""), c.get("value", ""), prov))
        except (KeyError, TypeError) as exc:
            raise MalformedQuery(f"bad structured query: {exc}") from exc
        return cls(tuple(clauses))


class WordStats:
    """Live view of word -> m(w): profiles whose summary bag holds the word."""

    def __init__(self, postings: dict[str, set[str]], bags: dict[str, frozenset[str]]):
        self._postings = postings
        self._bags = bags

    def word_count(self, word: str) -> int:
        return len(self._postings.get(word, ()))

    @property
    def total_profiles(self) -> int:
        return len(self._bags)

    def counts(self) -> dict[str, int]:
        return {w: len(pids) for w, pids in self._postings.items() if pids}


class Indexer:
    """In-memory indexes, rebuildable from the profile store, snapshottable."""

    def __init__(self, cfg: MatchConfig | None = None):
        self.cfg = cfg or MatchConfig()
        self._bags: dict[str, frozenset[str]] = {}
        self._objects: dict[str, Profile] = {}
        self._postings: dict[str, set[str]] = defaultdict(set)
        self._phonetic: dict[str, set[str]] = defaultdict(set)
        self._by_key: dict[str, set[str]] = defaultdict(set)
        self._targets: dict[str, frozenset[str]] = {}
        self._dependents: dict[str, set[str]] = defaultdict(set)
        self.stats = WordStats(self._postings, self._bags)

    def __len__(self) -> int:
        return len(self._bags)

    def __contains__(self, profile_id: str) -> bool:
        return profile_id in self._bags

    # -- maintenance --------------------------------------------------------

    def index_profile(self, p: Profile, resolve: Resolver | None = None) -> None:
        """(Re)index one profile; replaces any previous postings for its id."""
        resolve = resolve or self.resolve
        bag = summarize(p, resolve, self.cfg)
        self.remove_profile(p.id)
        self._bags[p.id] = bag
        self._objects[p.id] = p
        for word in bag:
            self._postings[word].add(p.id)
            for code in phonetic_codes(word):
                self._phonetic[code].add(p.id)
        for obj in (*p.attributes, *p.relations):
            self._by_key[obj.key].add(p.id)
        targets = frozenset(r.target for r in p.relations)
        self._targets[p.id] = targets
        for t in targets:
            self._dependents[t].add(p.id)

    def remove_profile(self, profile_id: str) -> None:
        bag = self._bags.pop(profile_id, None)
        if bag is None:
            return
        for word in bag:
            self._discard(self._postings, word, profile_id)
            for code in phonetic_codes(word):
                self._discard(self._phonetic, code, profile_id)
        p = self._objects.pop(profile_id)
        for obj in (*p.attributes, *p.relations):
            self._discard(self._by_key, obj.key, profile_id)
        for t in self._targets.pop(profile_id, ()):
            self._discard(self._dependents, t, profile_id)

    @staticmethod
    def _discard(index: dict[str, set[str]], key: str, pid: str) -> None:
        pids = index.get(key)
        if pids is not None:
            pids.discard(pid)
            if not pids:
                del index[key]

    def rebuild(self, profiles: Iterable[Profile], resolve: Resolver) -> None:
        """Drop everything and re-index the given profiles."""
        self.__init__(self.cfg)
        for p in profiles:
            self.index_profile(p, resolve)

    def resolve(self, profile_id: str) -> Profile | None:
        """Resolver over the indexed profiles themselves."""
        return self._objects.get(profile_id)

    def dependents(self, profile_id: str) -> set[str]:
        """Profiles whose summaries may embed the given profile's values."""
        return set(self._dependents.get(profile_id, ()))

    def word_count(self, word: str) -> int:
        """Current m(word); 0 for unseen words."""
        return self.stats.word_count(word)

    def bag(self, profile_id: str) -> frozenset[str]:
        try:
            return self._bags[profile_id]
        except KeyError:
            raise NotFound(f"profile {profile_id!r} is not indexed") from None

    def bag_if_indexed(self, profile_id: str) -> frozenset[str] | None:
        return self._bags.get(profile_id)

    # -- keyword search and blocking -----------------------------------------

    def keyword_search(self, q: str, k: int) -> list[tuple[str, float]]:
        """Profiles ranked by summed rarity weight of matched query words.

        Exact word hits score inf(m(word)); profiles matched only through
        a shared phonetic code get the configured discount. Ties break on
        ascending id.
        """
        if k < 1:
            raise MalformedQuery(f"k must be >= 1, got {k}")
        return self._rank(sorted(set(tokenize(q))), k)

    def candidates(self, p: Profile, k: int) -> list[str]:
        """Top-k ids sharing summary words with p, p itself excluded."""
        ranked = self._rank(sorted(self.bag(p.id)), k, exclude=p.id)
        return [pid for pid, _ in ranked]

    def _rank(
        self, words: list[str], k: int, exclude: str | None = None
    ) -> list[tuple[str, float]]:
        scores: dict[str, float] = defaultdict(float)
        discount = self.cfg.search_phonetic_discount
        for word in words:
            weight = inf(self.word_count(word), self.cfg)
            exact = self._postings.get(word, set())
            for pid in exact:
                scores[pid] += weight
            phonetic_hits: set[str] = set()
            for code in phonetic_codes(word):
                phonetic_hits |= self._phonetic.get(code, set())
            for pid in phonetic_hits - exact:
                scores[pid] += discount * weight
        if exclude is not None:
            scores.pop(exclude, None)
        ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
        return ranked[:k]

    # -- nested structured search --------------------------------------------

    def nested_search(self, query: NestedQuery) -> list[str]:
        """Ids of profiles satisfying every clause within a single object."""
        result: set[str] | None = None
        for clause in query.clauses:
            if not clause.key:
                raise MalformedQuery("clause key must be non-empty")
            candidates = self._by_key.get(clause.key, set())
            if result is not None:
                candidates = candidates & result
            satisfied = {
                pid
                for pid in candidates
                if self._clause_matches(self._objects[pid], clause)
            }
            result = satisfied
            if not result:
                return []
        return sorted(result or ())

    def _clause_matches(self, p: Profile, clause: NestedClause) -> bool:
        for a in p.attributes:
            if a.key == clause.key and self._attr_value_matches(a.value, clause.value):
                if _constraints_match(a.prov, clause.prov_constraints):
                    return True
        for r in p.relations:
            if r.key == clause.key and self._target_matches(r.target, clause.value):
                if _constraints_match(r.prov, clause.prov_constraints):
                    return True
        return False

    @staticmethod
    def _attr_value_matches(value: str, wanted: str) -> bool:
        if not wanted:
            return True
        return set(tokenize(wanted)) <= set(tokenize(value))

    def _target_matches(self, target: str, wanted: str) -> bool:
        """A relation clause value is either the target id or words found
        among the target profile's own attribute values."""
        if not wanted:
            return True
        if wanted == target:
            return True
        profile = self._objects.get(target)
        if profile is None:
            return False
        target_words: set[str] = set()
        for a in profile.attributes:
            target_words.update(tokenize(a.value))
        return set(tokenize(wanted)) <= target_words

    # -- snapshot persistence --------------------------------------------------

    def save(self, directory: str | Path, kb_generation: int) -> None:
        """Write a loadable snapshot stamped with the store generation."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        with open(directory / _SNAPSHOT_FILE, "wb") as fh:
            write_record(fh, ["meta", {"kb_generation": kb_generation, "n": len(self)}])
            for pid in sorted(self._bags):
                rows = [row.to_record() for row in profile_rows(self._objects[pid])]
                write_record(
                    fh, ["profile", {"pid": pid, "bag": sorted(self._bags[pid]), "rows": rows}]
                )

    def load(self, directory: str | Path, kb_generation: int) -> bool:
        """Restore from a snapshot; False when missing or stale."""
        path = Path(directory) / _SNAPSHOT_FILE
        if not path.exists():
            return False
        loaded: list[tuple[str, frozenset[str], Profile]] = []
        with open(path, "rb") as fh:
            records = iter(read_records(fh))
            meta = next(records, None)
            if not meta or meta[0] != "meta" or meta[1]["kb_generation"] != kb_generation:
                return False
            for record in records:
                body = record[1]
                rows = [NodeRow.from_record(r) for r in body["rows"]]
                loaded.append(
                    (body["pid"], frozenset(body["bag"]), assemble_profile(body["pid"], rows))
                )
            if len(loaded) != meta[1]["n"]:
                return False
        self.__init__(self.cfg)
        for pid, bag, profile in loaded:
            self._bags[pid] = bag
            self._objects[pid] = profile
            for word in bag:
                self._postings[word].add(pid)
                for code in phonetic_codes(word):
                    self._phonetic[code].add(pid)
            for obj in (*profile.attributes, *profile.relations):
                self._by_key[obj.key].add(pid)
            targets = frozenset(r.target for r in profile.relations)
            self._targets[pid] = targets
            for t in targets:
                self._dependents[t].add(pid)
        return True


def _constraints_match(
    prov: tuple[ProvPair, ...], constraints: tuple[ProvPair, ...]
) -> bool:
    """Check clause constraints against one object's provenance.

    A constraint whose pkey the object carries must match that value
    exactly. A temporal constraint against an object with other temporal
    keys matches when the intervals overlap ("from"/"since" open-ended to
    the right, "to"/"until" to the left). Objects with no provenance at
    all never satisfy a constraint; that asymmetry is what keeps a value
    from borrowing a sibling object's validity period.
    """
    for constraint in constraints:
        same_key = [pp.pvalue for pp in prov if pp.pkey == constraint.pkey]
        if same_key:
            if constraint.pvalue not in same_key:
                return False
            continue
        if constraint.pkey not in TEMPORAL_KEYS:
            return False
        bound = parse_date_key(constraint.pvalue)
        if bound is None:
            return False
        interval = temporal_interval(prov)
        if interval is None:
            return False
        if constraint.pkey in TEMPORAL_START_KEYS:
            wanted = (bound, None)
        else:
            wanted = (None, bound)
        if not intervals_overlap(interval, wanted):
            return False
    return True
