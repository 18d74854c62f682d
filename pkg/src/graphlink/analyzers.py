"""Text normalization and string-similarity primitives.

All functions here are pure and operate on immutable dictionaries, so they
can be used from any number of threads at once.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

from .errors import InvalidN
from .metaphone import double_metaphone

_WORD_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Lowercase maximal runs of letters/digits, in order, duplicates kept."""
    return _WORD_RE.findall(text.lower())


@dataclass(frozen=True)
class PhoneticCode:
    """Primary/alternate double-metaphone codes for a word."""

    primary: str
    alternate: str

    def codes(self) -> frozenset[str]:
        """Non-empty codes as a set, for intersection tests."""
        return frozenset(c for c in (self.primary, self.alternate) if c)


def phonetic_code(word: str) -> PhoneticCode:
    """Double-metaphone codes of a tokenized word; numeric words encode empty."""
    primary, alternate = double_metaphone(word)
    return PhoneticCode(primary, alternate)


@lru_cache(maxsize=65536)
def phonetic_codes(word: str) -> frozenset[str]:
    """Cached non-empty code set; this sits on the pair-scoring hot path."""
    return phonetic_code(word).codes()


@dataclass(frozen=True)
class AliasDictionary:
    """Symmetric name-alias lookup built from canonical -> aliases entries."""

    entries: dict[str, frozenset[str]] = field(default_factory=dict)

    @classmethod
    def from_pairs(cls, pairs: dict[str, set[str] | frozenset[str]]) -> "AliasDictionary":
        links: dict[str, set[str]] = {}
        for canonical, aliases in pairs.items():
            canonical = canonical.lower()
            for alias in aliases:
                alias = alias.lower()
                links.setdefault(canonical, set()).add(alias)
                links.setdefault(alias, set()).add(canonical)
        return cls({w: frozenset(a) for w, a in links.items()})

    @classmethod
    def load(cls, path: str | Path) -> "AliasDictionary":
        """Read a dictionary file: `canonical<TAB>alias1,alias2,...`, `#` comments."""
        pairs: dict[str, set[str]] = {}
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            canonical, _, tail = line.partition("\t")
            aliases = {a.strip().lower() for a in tail.split(",") if a.strip()}
            if aliases:
                pairs.setdefault(canonical.strip().lower(), set()).update(aliases)
        return cls.from_pairs(pairs)

    def lookup(self, word: str) -> frozenset[str]:
        return self.entries.get(word, frozenset())


@dataclass(frozen=True)
class StreetTypeDictionary:
    """Bidirectional abbreviation <-> full-form lookup for street types."""

    entries: dict[str, str] = field(default_factory=dict)

    @classmethod
    def from_pairs(cls, pairs: dict[str, str]) -> "StreetTypeDictionary":
        both: dict[str, str] = {}
        for abbrev, full in pairs.items():
            both[abbrev.lower()] = full.lower()
            both[full.lower()] = abbrev.lower()
        return cls(both)

    @classmethod
    def load(cls, path: str | Path) -> "StreetTypeDictionary":
        """Read a dictionary file: `abbrev<TAB>full`, `#` comments."""
        pairs: dict[str, str] = {}
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            abbrev, _, full = line.partition("\t")
            if abbrev.strip() and full.strip():
                pairs[abbrev.strip()] = full.strip()
        return cls.from_pairs(pairs)

    def lookup(self, word: str) -> str | None:
        return self.entries.get(word)


def expand_aliases(word: str, aliases: AliasDictionary) -> list[str]:
    """The word followed by everything one dictionary step away."""
    return [word, *sorted(aliases.lookup(word))]


def normalize_address(words: list[str], streets: StreetTypeDictionary) -> list[str]:
    """Expand street-type words so both abbreviation and full form are present."""
    out = []
    for word in words:
        out.append(word)
        other = streets.lookup(word)
        if other is not None and other != word:
            out.append(other)
    return out


def ngram_sim(a: str, b: str, n: int) -> float:
    """Dice coefficient over the sets of character n-grams of both strings.

    Strings shorter than n fall back to plain equality.
    """
    if n < 1:
        raise InvalidN(f"n-gram size must be >= 1, got {n}")
    if len(a) < n or len(b) < n:
        return 1.0 if a == b else 0.0
    ga = {a[i : i + n] for i in range(len(a) - n + 1)}
    gb = {b[i : i + n] for i in range(len(b) - n + 1)}
    return 2.0 * len(ga & gb) / (len(ga) + len(gb))


def levenshtein(a: str, b: str) -> int:
    """Edit distance (insert/delete/substitute), two-row dynamic program."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        row = [i]
        for j, cb in enumerate(b, 1):
            row.append(min(row[-1] + 1, prev[j] + 1, prev[j - 1] + (ca != cb)))
        prev = row
    return prev[-1]


def edit_sim(a: str, b: str) -> float:
    """Levenshtein distance normalized to a [0,1] similarity; ("","") is 1."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest
