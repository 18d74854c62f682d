"""Pair similarity machinery: match level, information level, and scores.

The similarity of two profiles sums, over every key present in both, the
approximate match level of the key's values weighted by how informative
the matching words are. Word informativeness decays with the number of
profiles sharing the word through a sigmoid, so rare words dominate.

A separate integer rejection score counts disagreements on the key
attributes configured per entity type (for instance birth date for
persons); downstream decision rules use it to veto automatic matches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Callable, Protocol

from .analyzers import (
    AliasDictionary,
    StreetTypeDictionary,
    edit_sim,
    expand_aliases,
    ngram_sim,
    normalize_address,
    phonetic_codes,
    tokenize,
)
from .errors import SameId, SchemaError
from .model import (
    Profile,
    ProvPair,
    intervals_overlap,
    parse_date_key,
    temporal_interval,
    values_of,
)

_EXP_MAX = 700.0
_TINY = 5e-324


def _packaged_aliases() -> AliasDictionary:
    with resources.as_file(
        resources.files("graphlink") / "data" / "name_aliases.txt"
    ) as path:
        return AliasDictionary.load(path)


def _packaged_streets() -> StreetTypeDictionary:
    with resources.as_file(
        resources.files("graphlink") / "data" / "street_types.txt"
    ) as path:
        return StreetTypeDictionary.load(path)


@dataclass
class MatchConfig:
    """Tunable knobs for scoring, blocking, and linking."""

    alpha: float = 0.1
    beta: float = 60.0
    ngram_n: int = 2
    value_match_threshold: float = 0.7
    phonetic_weight: float = 0.9
    initial_weight: float = 0.6
    provenance_damping: float = 0.8
    search_phonetic_discount: float = 0.7
    key_attributes: dict[str, tuple[str, ...]] = field(
        default_factory=lambda: {"person": ("bdate",), "location": ("post",)}
    )
    tau_store: float = 0.5
    tau_match: float = 1.5
    rho_max: int = 0
    candidate_k: int = 50
    sim_layout: str = "kv_single"
    aliases: AliasDictionary = field(default_factory=_packaged_aliases)
    streets: StreetTypeDictionary = field(default_factory=_packaged_streets)

    def __post_init__(self) -> None:
        if self.alpha <= 0:
            raise SchemaError("alpha must be positive")
        for name in (
            "value_match_threshold",
            "phonetic_weight",
            "initial_weight",
            "provenance_damping",
            "search_phonetic_discount",
        ):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise SchemaError(f"{name} must be in [0, 1], got {value}")
        for name in ("tau_store", "tau_match"):
            if getattr(self, name) < 0:
                raise SchemaError(f"{name} must be non-negative")
        if self.ngram_n < 1:
            raise SchemaError("ngram_n must be >= 1")
        if self.rho_max < 0:
            raise SchemaError("rho_max must be non-negative")

    @classmethod
    def from_file(cls, path: str | Path) -> "MatchConfig":
        """Load overrides from a key=value file.

        Map entries use dotted keys (`key_attributes.person=bdate,post`);
        `aliases` and `streets` take dictionary file paths. Unknown keys
        are rejected.
        """
        kwargs: dict = {}
        key_attrs: dict[str, tuple[str, ...]] = {}
        scalar_types = {
            f.name: f.type for f in fields(cls) if f.name not in ("key_attributes", "aliases", "streets")
        }
        for lineno, raw in enumerate(
            Path(path).read_text(encoding="utf-8").splitlines(), 1
        ):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise SchemaError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key.startswith("key_attributes."):
                entity_type = key.removeprefix("key_attributes.")
                key_attrs[entity_type] = tuple(
                    v.strip() for v in value.split(",") if v.strip()
                )
            elif key == "aliases":
                kwargs["aliases"] = AliasDictionary.load(value)
            elif key == "streets":
                kwargs["streets"] = StreetTypeDictionary.load(value)
            elif key in scalar_types:
                kind = scalar_types[key]
                if kind in ("int", int):
                    kwargs[key] = int(value)
                elif kind in ("float", float):
                    kwargs[key] = float(value)
                else:
                    kwargs[key] = value
            else:
                raise SchemaError(f"{path}:{lineno}: unknown setting {key!r}")
        cfg = cls(**kwargs)
        if key_attrs:
            cfg.key_attributes = {**cfg.key_attributes, **key_attrs}
        return cfg


class WordStatsLike(Protocol):
    def word_count(self, word: str) -> int: ...


@dataclass(frozen=True, slots=True)
class MatchedPair:
    """A retained matching word pair and its match level."""

    w1: str
    w2: str
    level: float


def inf(m_count: int, cfg: MatchConfig) -> float:
    """Rarity weight of a word shared by m_count profiles; in (0, 1).

    Sigmoid-shaped decay: ~1 for rare words, 0.5 at alpha*m == beta,
    vanishing for very common words. Strictly decreasing in m_count.
    """
    x = cfg.alpha * m_count - cfg.beta
    if x > _EXP_MAX:
        # 1/(1+e^x) ~ e^-x; keep the result positive even past underflow.
        return math.exp(-x) if x < 745.0 else _TINY
    return 1.0 / (1.0 + math.exp(x))


def value_words(value: str | frozenset, cfg: MatchConfig) -> frozenset[str]:
    """Word bag of one value: tokenized, street-type and alias expanded.

    Pre-built bags (relation targets summarized elsewhere) pass through.
    """
    if isinstance(value, frozenset):
        return value
    words = normalize_address(tokenize(value), cfg.streets)
    out = set()
    for w in words:
        out.update(expand_aliases(w, cfg.aliases))
    return frozenset(out)


def word_pair_level(w1: str, w2: str, cfg: MatchConfig) -> float:
    """Match level of a single word pair.

    Exact wins outright; otherwise intersecting phonetic codes, then a
    single-letter initial against a word starting with it, then edit
    similarity gated by n-gram similarity.
    """
    if w1 == w2:
        return 1.0
    if phonetic_codes(w1) & phonetic_codes(w2):
        return cfg.phonetic_weight
    if len(w1) == 1 or len(w2) == 1:
        short, other = (w1, w2) if len(w1) == 1 else (w2, w1)
        if short.isalpha() and other.startswith(short):
            return cfg.initial_weight
        return 0.0
    if ngram_sim(w1, w2, cfg.ngram_n) >= cfg.value_match_threshold:
        return edit_sim(w1, w2)
    return 0.0


def provenance_factor(
    prov1: tuple[ProvPair, ...] | list[ProvPair],
    prov2: tuple[ProvPair, ...] | list[ProvPair],
    cfg: MatchConfig,
) -> float:
    """Damping applied to a value match whose validity periods cannot meet.

    1.0 when either side has no temporal provenance or the intervals
    overlap; the configured damping factor when they are disjoint.
    """
    a = temporal_interval(prov1)
    b = temporal_interval(prov2)
    if a is None or b is None or intervals_overlap(a, b):
        return 1.0
    return cfg.provenance_damping


ValueList = list[tuple[str | frozenset, tuple[ProvPair, ...]]]


def match_level(
    key: str,
    vals1: ValueList,
    vals2: ValueList,
    cfg: MatchConfig,
) -> tuple[float, list[MatchedPair]]:
    """Approximate match between two value lists for the same key.

    Every value combination is compared word-by-word; pairs at or above
    the match threshold are retained. The score is the best retained
    level, damped per combination when both values carry disjoint
    temporal provenance. Date-shaped values compare atomically (equal
    calendar date or nothing) rather than as token bags.
    """
    if not vals1 or not vals2:
        return 0.0, []
    threshold = cfg.value_match_threshold
    score = 0.0
    retained: dict[tuple[str, str], float] = {}
    for v1, prov1 in vals1:
        date1 = parse_date_key(v1) if isinstance(v1, str) else None
        bag1 = None if date1 is not None else value_words(v1, cfg)
        for v2, prov2 in vals2:
            date2 = parse_date_key(v2) if isinstance(v2, str) else None
            best: tuple[str, str, float] | None = None
            if date1 is not None and date2 is not None:
                if date1 == date2:
                    best = (v1, v2, 1.0)
            elif date1 is None and date2 is None:
                bag2 = value_words(v2, cfg)
                for w1 in sorted(bag1):
                    for w2 in sorted(bag2):
                        level = word_pair_level(w1, w2, cfg)
                        if level >= threshold and (best is None or level > best[2]):
                            best = (w1, w2, level)
            if best is None:
                continue
            w1, w2, level = best
            prior = retained.get((w1, w2))
            if prior is None or level > prior:
                retained[(w1, w2)] = level
            score = max(score, level * provenance_factor(prov1, prov2, cfg))
    pairs = [MatchedPair(w1, w2, level) for (w1, w2), level in sorted(retained.items())]
    return score, pairs


def info_level(
    pairs: list[MatchedPair], stats: WordStatsLike, cfg: MatchConfig
) -> float:
    """Highest information level among the retained matching pairs."""
    best = 0.0
    for pair in pairs:
        value = (inf(stats.word_count(pair.w1), cfg) + inf(stats.word_count(pair.w2), cfg)) / 2.0
        if value > best:
            best = value
    return best


def _values_for_scoring(
    p: Profile,
    key: str,
    target_bags: Callable[[str], frozenset[str] | None] | None,
) -> ValueList:
    """Attribute values verbatim; relation targets as their summary bags.

    Relation targets that cannot be summarized contribute nothing.
    """
    out: ValueList = [(a.value, a.prov) for a in p.attributes if a.key == key]
    for r in p.relations:
        if r.key != key:
            continue
        bag = target_bags(r.target) if target_bags is not None else None
        if bag:
            out.append((bag, r.prov))
    return out


def scoring_keys(p: Profile) -> set[str]:
    """Keys a profile exposes to pair scoring: everything but the type label."""
    keys = {a.key for a in p.attributes}
    keys.update(r.key for r in p.relations)
    keys.discard("type")
    return keys


def simsc(
    p1: Profile,
    p2: Profile,
    stats: WordStatsLike,
    cfg: MatchConfig,
    target_bags: Callable[[str], frozenset[str] | None] | None = None,
) -> float:
    """Similarity score: sum of match x information over the shared keys.

    The type label is the node label, not a matchable attribute, so it is
    excluded; every same-typed pair would otherwise gain a constant term.
    """
    if p1.id == p2.id:
        raise SameId(f"cannot score a profile against itself: {p1.id!r}")
    total = 0.0
    for key in sorted(scoring_keys(p1) & scoring_keys(p2)):
        vals1 = _values_for_scoring(p1, key, target_bags)
        vals2 = _values_for_scoring(p2, key, target_bags)
        score, pairs = match_level(key, vals1, vals2, cfg)
        if score > 0.0 and pairs:
            total += score * info_level(pairs, stats, cfg)
    return total


def rejsc(p1: Profile, p2: Profile, cfg: MatchConfig) -> int:
    """Penalty count: key attributes where both profiles disagree.

    Applies only when the profiles share an entity type; a key attribute
    counts when both sides have values and their match level stays under
    the match threshold.
    """
    entity_type = p1.type_label()
    if entity_type != p2.type_label():
        return 0
    penalties = 0
    for key in cfg.key_attributes.get(entity_type, ()):
        vals1: ValueList = values_of(p1, key)
        vals2: ValueList = values_of(p2, key)
        if not vals1 or not vals2:
            continue
        score, _ = match_level(key, vals1, vals2, cfg)
        if score < cfg.value_match_threshold:
            penalties += 1
    return penalties
