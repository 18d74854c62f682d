"""Persistent storage of profiles: one row per attribute/relation value.

Each profile occupies a header record plus one row per object, keyed so
that a full scan yields profiles grouped together in ascending id order.
Replacing a profile is delete-all-rows + insert under a single writer lock.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .errors import NotFound
from .kvlog import OrderedKV
from .model import (
    AttributeObject,
    Profile,
    ProvPair,
    RelationObject,
    make_profile,
)

ATTRIBUTE = "attribute"
RELATION = "relation"

_SEP = "\x00"
_HEADER_MARK = "!"


@dataclass(frozen=True, slots=True)
class NodeRow:
    """One stored line: an attribute or relation value pair with provenance."""

    profile_id: str
    kind: str
    key: str
    value_or_target: str
    prov: tuple[ProvPair, ...]
    seq: int

    def to_record(self) -> dict:
        return {
            "id": self.profile_id,
            "kind": self.kind,
            "key": self.key,
            "value": self.value_or_target,
            "prov": [[pp.pkey, pp.pvalue] for pp in self.prov],
            "seq": self.seq,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "NodeRow":
        return cls(
            rec["id"],
            rec["kind"],
            rec["key"],
            rec["value"],
            tuple(ProvPair(k, v) for k, v in rec.get("prov", [])),
            rec["seq"],
        )


def profile_rows(p: Profile) -> list[NodeRow]:
    """Flatten a profile into rows, attributes first, seq within the profile."""
    rows = []
    for a in p.attributes:
        rows.append(NodeRow(p.id, ATTRIBUTE, a.key, a.value, a.prov, len(rows)))
    for r in p.relations:
        rows.append(NodeRow(p.id, RELATION, r.key, r.target, r.prov, len(rows)))
    return rows


def assemble_profile(profile_id: str, rows: list[NodeRow]) -> Profile:
    """Rebuild a profile from its rows in seq order."""
    attributes = []
    relations = []
    for row in sorted(rows, key=lambda r: r.seq):
        if row.kind == ATTRIBUTE:
            attributes.append(AttributeObject(row.key, row.value_or_target, row.prov))
        else:
            relations.append(RelationObject(row.key, row.value_or_target, row.prov))
    return make_profile(profile_id, attributes, relations)


class ProfileStore:
    """Single-writer, multi-reader store of profiles over the ordered KV log."""

    def __init__(self, directory: str | Path | None = None):
        self._kv = OrderedKV(directory)
        self._lock = threading.RLock()

    @property
    def generation(self) -> int:
        return self._kv.generation

    def close(self) -> None:
        self._kv.close()

    def __len__(self) -> int:
        with self._lock:
            return sum(1 for _ in self.profile_ids())

    @staticmethod
    def _header_key(profile_id: str) -> str:
        return profile_id + _SEP + _HEADER_MARK

    @staticmethod
    def _row_key(profile_id: str, seq: int) -> str:
        return f"{profile_id}{_SEP}{seq:08d}"

    def put_profile(self, p: Profile) -> None:
        """Replace all rows for p.id; durable after return."""
        rows = profile_rows(p)
        with self._lock:
            self._delete_rows(p.id)
            for row in rows:
                self._kv.put(self._row_key(p.id, row.seq), row.to_record())
            self._kv.put(self._header_key(p.id), {"id": p.id, "n": len(rows)})
            self._kv.flush()

    def _delete_rows(self, profile_id: str) -> int:
        header = self._kv.get(self._header_key(profile_id))
        if header is None:
            return 0
        for seq in range(header["n"]):
            self._kv.delete(self._row_key(profile_id, seq))
        self._kv.delete(self._header_key(profile_id))
        return header["n"]

    def get_profile(self, profile_id: str) -> Profile:
        with self._lock:
            header = self._kv.get(self._header_key(profile_id))
            if header is None:
                raise NotFound(f"no profile {profile_id!r}")
            rows = [
                NodeRow.from_record(self._kv.get(self._row_key(profile_id, seq)))
                for seq in range(header["n"])
            ]
        return assemble_profile(profile_id, rows)

    def delete_profile(self, profile_id: str) -> None:
        """Remove a profile and its rows; a missing id is a no-op."""
        with self._lock:
            self._delete_rows(profile_id)
            self._kv.flush()

    def exists(self, profile_id: str) -> bool:
        return self._header_key(profile_id) in self._kv

    def row_count(self, profile_id: str) -> int:
        header = self._kv.get(self._header_key(profile_id))
        if header is None:
            raise NotFound(f"no profile {profile_id!r}")
        return header["n"]

    def profile_ids(self) -> list[str]:
        """All stored ids in ascending order."""
        with self._lock:
            return [
                value["id"]
                for key, value in self._kv.scan()
                if key.endswith(_SEP + _HEADER_MARK)
            ]

    def scan_profiles(self) -> Iterator[Profile]:
        """Every stored profile exactly once, ascending id order."""
        with self._lock:
            entries = list(self._kv.scan())
        current_id: str | None = None
        rows: list[NodeRow] = []
        for key, value in entries:
            if key.endswith(_SEP + _HEADER_MARK):
                if current_id is not None:
                    yield assemble_profile(current_id, rows)
                current_id = value["id"]
                rows = []
            elif current_id is not None:
                rows.append(NodeRow.from_record(value))
        if current_id is not None:
            yield assemble_profile(current_id, rows)
