"""Logical data model: entity profiles as triples and the profiles graph.

A profile is an identifier plus ordered lists of attribute-objects and
relation-objects. Both kinds of object carry an ordered list of provenance
pairs, so the same attribute or relation key may appear many times with
different values and different validity context.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import EmptyKey, EmptyValue, InvalidId, SameId, SchemaError

# Provenance keys that describe a validity period. "from"/"since" open an
# interval, "to"/"until" close one.
TEMPORAL_START_KEYS = frozenset({"from", "since"})
TEMPORAL_END_KEYS = frozenset({"to", "until"})
TEMPORAL_KEYS = TEMPORAL_START_KEYS | TEMPORAL_END_KEYS

PENDING = "pending"
MATCH = "match"
NONMATCH = "nonmatch"
DECISIONS = frozenset({PENDING, MATCH, NONMATCH})

TYPE_KEY = "type"
UNKNOWN_TYPE = "unknown"

_DATE_RE = re.compile(r"^(\d{4})(?:[-.](\d{1,2}))?(?:[-.](\d{1,2}))?$")


def parse_date_key(text: str) -> tuple[int, ...] | None:
    """Parse a calendar string into a comparable tuple.

    Accepts year, year-month, and year-month-day forms ("1991",
    "1991-05", "1991-05-02"; "." is tolerated as a separator). Returns
    None when the string is not a date.
    """
    m = _DATE_RE.match(text.strip())
    if m is None:
        return None
    parts = tuple(int(g) for g in m.groups() if g is not None)
    if len(parts) >= 2 and not 1 <= parts[1] <= 12:
        return None
    if len(parts) == 3 and not 1 <= parts[2] <= 31:
        return None
    return parts


def validate_profile_id(value: str) -> str:
    """Check a profile id: non-empty and free of the reserved '-' separator."""
    if not isinstance(value, str) or not value:
        raise InvalidId("profile id must be a non-empty string")
    if "-" in value:
        raise InvalidId(f"profile id {value!r} contains reserved character '-'")
    return value


@dataclass(frozen=True, slots=True)
class ProvPair:
    """One provenance key-value pair attached to a value."""

    pkey: str
    pvalue: str

    def __post_init__(self) -> None:
        if not self.pkey:
            raise EmptyKey("provenance key must be non-empty")
        if self.pkey in TEMPORAL_KEYS and parse_date_key(self.pvalue) is None:
            raise SchemaError(
                f"temporal provenance {self.pkey}={self.pvalue!r} is not a date"
            )


@dataclass(frozen=True, slots=True)
class AttributeObject:
    """An attribute key-value pair followed by its provenance pairs."""

    key: str
    value: str
    prov: tuple[ProvPair, ...] = ()

    def __post_init__(self) -> None:
        if not self.key:
            raise EmptyKey("attribute key must be non-empty")
        if not self.value:
            raise EmptyValue(f"attribute {self.key!r} has an empty value")
        object.__setattr__(self, "prov", tuple(self.prov))


@dataclass(frozen=True, slots=True)
class RelationObject:
    """A relation key, its target profile id, and provenance pairs.

    The target may be dangling at ingest time; resolution is checked by
    the store, not here.
    """

    key: str
    target: str
    prov: tuple[ProvPair, ...] = ()

    def __post_init__(self) -> None:
        if not self.key:
            raise EmptyKey("relation key must be non-empty")
        validate_profile_id(self.target)
        object.__setattr__(self, "prov", tuple(self.prov))


@dataclass(frozen=True, slots=True)
class Profile:
    """An entity profile: id plus ordered attribute and relation objects.

    Immutable after construction; safe to share across threads. Use
    make_profile to build one with validation and duplicate removal.
    """

    id: str
    attributes: tuple[AttributeObject, ...] = ()
    relations: tuple[RelationObject, ...] = ()

    def type_label(self) -> str:
        """Node label: the value of the first "type" attribute, else "unknown"."""
        for a in self.attributes:
            if a.key == TYPE_KEY:
                return a.value
        return UNKNOWN_TYPE


@dataclass(frozen=True, slots=True)
class RelationEdge:
    """Graph edge derived from one relation-object of the source profile."""

    rel: str
    source: str
    target: str
    prov: tuple[ProvPair, ...] = ()


@dataclass(frozen=True, slots=True)
class SimilarityEdge:
    """Mutable link-state record for a profile pair, stored canonically.

    id1 < id2 lexicographically. cfm marks that a person has confirmed the
    decision; a confirmed edge never has a pending decision.
    """

    id1: str
    id2: str
    simsc: float
    rejsc: int = 0
    cfm: bool = False
    decision: str = PENDING

    def __post_init__(self) -> None:
        if self.id1 == self.id2:
            raise SameId(f"similarity edge needs two distinct ids, got {self.id1!r}")
        if self.id1 > self.id2:
            raise SchemaError(f"edge ids not canonical: {self.id1!r} > {self.id2!r}")
        if self.decision not in DECISIONS:
            raise SchemaError(f"unknown decision {self.decision!r}")
        if self.cfm and self.decision == PENDING:
            raise SchemaError("confirmed edge cannot be pending")
        if self.simsc < 0:
            raise SchemaError("simsc must be non-negative")
        if self.rejsc < 0:
            raise SchemaError("rejsc must be non-negative")


def make_edge(
    a: str,
    b: str,
    simsc: float,
    rejsc: int = 0,
    cfm: bool = False,
    decision: str = PENDING,
) -> SimilarityEdge:
    """Build a similarity edge in canonical id order regardless of argument order."""
    if a == b:
        raise SameId(f"similarity edge needs two distinct ids, got {a!r}")
    if a > b:
        a, b = b, a
    return SimilarityEdge(a, b, simsc, rejsc, cfm, decision)


def pair_key(a: str, b: str) -> tuple[str, str]:
    """Canonical (low, high) ordering of a profile pair."""
    if a == b:
        raise SameId(f"pair needs two distinct ids, got {a!r}")
    return (a, b) if a < b else (b, a)


def make_profile(
    id: str,
    attributes: list[AttributeObject] | tuple[AttributeObject, ...] = (),
    relations: list[RelationObject] | tuple[RelationObject, ...] = (),
) -> Profile:
    """Build a profile, dropping byte-identical duplicate objects.

    Objects that differ only in provenance are all kept: multiplicity is
    the point of the model. Order is otherwise preserved.
    """
    validate_profile_id(id)
    return Profile(id, _dedup(attributes), _dedup(relations))


def _dedup(objects):
    seen = set()
    out = []
    for obj in objects:
        if obj not in seen:
            seen.add(obj)
            out.append(obj)
    return tuple(out)


def relation_edges(p: Profile) -> list[RelationEdge]:
    """One edge per relation-object, provenance carried over, order preserved."""
    return [RelationEdge(r.key, p.id, r.target, r.prov) for r in p.relations]


def values_of(p: Profile, key: str) -> list[tuple[str, tuple[ProvPair, ...]]]:
    """All values (or relation targets) stored under a key, with provenance.

    Attribute hits come first, then relation hits, each in insertion order.
    Returns an empty list when the key is absent.
    """
    out = [(a.value, a.prov) for a in p.attributes if a.key == key]
    out.extend((r.target, r.prov) for r in p.relations if r.key == key)
    return out


def temporal_interval(
    prov: tuple[ProvPair, ...] | list[ProvPair],
) -> tuple[tuple[int, ...] | None, tuple[int, ...] | None] | None:
    """Derive the validity interval described by a provenance list.

    Returns (start, end) as comparable date tuples, None in a slot meaning
    unbounded on that side. Returns None when the list carries no temporal
    provenance at all.
    """
    start = None
    end = None
    found = False
    for pp in prov:
        key = parse_date_key(pp.pvalue) if pp.pkey in TEMPORAL_KEYS else None
        if key is None:
            continue
        found = True
        if pp.pkey in TEMPORAL_START_KEYS:
            start = key if start is None else min(start, key)
        else:
            end = key if end is None else max(end, key)
    return (start, end) if found else None


def intervals_overlap(
    a: tuple[tuple[int, ...] | None, tuple[int, ...] | None],
    b: tuple[tuple[int, ...] | None, tuple[int, ...] | None],
) -> bool:
    """Closed-interval overlap; a None bound is unbounded on that side."""
    a_start, a_end = a
    b_start, b_end = b
    if a_start is not None and b_end is not None and _after(a_start, b_end):
        return False
    if b_start is not None and a_end is not None and _after(b_start, a_end):
        return False
    return True


def _after(start: tuple[int, ...], end: tuple[int, ...]) -> bool:
    """True when a start key falls strictly after an end key.

    Partial dates are compared at the coarser precision, so 1991 does not
    fall after 1991-05 and vice versa.
    """
    n = min(len(start), len(end))
    return start[:n] > end[:n]


@dataclass
class ProfilesGraph:
    """The profiles graph: nodes plus derived relation edges and similarity edges."""

    nodes: dict[str, Profile] = field(default_factory=dict)
    similarity_edges: list[SimilarityEdge] = field(default_factory=list)

    @classmethod
    def from_profiles(cls, profiles) -> "ProfilesGraph":
        g = cls()
        for p in profiles:
            g.nodes[p.id] = p
        return g

    def relation_edges(self) -> list[RelationEdge]:
        """Recompute the relation-edge set from the nodes."""
        out = []
        for pid in sorted(self.nodes):
            out.extend(relation_edges(self.nodes[pid]))
        return out

    def dangling_targets(self) -> list[RelationEdge]:
        """Relation edges whose target is not a stored node."""
        return [e for e in self.relation_edges() if e.target not in self.nodes]
