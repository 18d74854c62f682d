"""Ingestion: JSONL profiles, mapped CSV rows, and pre-extracted text triples.

The JSONL schema is the canonical serialization of a profile:

    {"id": "P1",
     "attributes": [{"key": "name", "value": "Peter",
                     "prov": [{"pkey": "until", "pvalue": "1991"}]}],
     "relations": [{"key": "lives_at", "target": "L1",
                    "prov": [{"pkey": "from", "pvalue": "1989"}]}]}

"prov" is optional everywhere; array order is preserved. Bad input lines
are collected with their line numbers and skipped, never aborting a batch.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .analyzers import tokenize
from .engine import Engine
from .errors import GraphLinkError, MappingError, SchemaError
from .model import (
    AttributeObject,
    Profile,
    ProvPair,
    RelationObject,
    make_profile,
)


def _prov_from_obj(obj: dict) -> tuple[ProvPair, ...]:
    return tuple(ProvPair(pp["pkey"], pp["pvalue"]) for pp in obj.get("prov", []))


def profile_from_obj(obj: dict) -> Profile:
    """Parse one JSONL-schema object into a validated profile."""
    if not isinstance(obj, dict):
        raise SchemaError("profile must be a JSON object")
    if "id" not in obj:
        raise SchemaError('missing "id"')
    try:
        attributes = [
            AttributeObject(a["key"], a["value"], _prov_from_obj(a))
            for a in obj.get("attributes", [])
        ]
        relations = [
            RelationObject(r["key"], r["target"], _prov_from_obj(r))
            for r in obj.get("relations", [])
        ]
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed profile object: {exc}") from exc
    return make_profile(obj["id"], attributes, relations)


def profile_to_obj(p: Profile) -> dict:
    """Serialize a profile to the JSONL schema; empty prov lists are omitted."""

    def prov(pairs: tuple[ProvPair, ...]) -> dict:
        if not pairs:
            return {}
        return {"prov": [{"pkey": pp.pkey, "pvalue": pp.pvalue} for pp in pairs]}

    return {
        "id": p.id,
        "attributes": [
            {"key": a.key, "value": a.value, **prov(a.prov)} for a in p.attributes
        ],
        "relations": [
            {"key": r.key, "target": r.target, **prov(r.prov)} for r in p.relations
        ],
    }


@dataclass(frozen=True)
class IngestError:
    line: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"


@dataclass
class CsvMapping:
    """Column-to-profile mapping for CSV ingestion.

    provenance_columns maps a column to (owning column, provenance key);
    the provenance attaches to whatever object the owning column produced.
    """

    id_column: str
    attribute_columns: dict[str, str] = field(default_factory=dict)
    relation_columns: dict[str, str] = field(default_factory=dict)
    provenance_columns: dict[str, tuple[str, str]] = field(default_factory=dict)
    type_value: str | None = None

    def __post_init__(self) -> None:
        if not self.id_column:
            raise MappingError("id_column is required")
        seen: set[str] = set()
        for col in (
            self.id_column,
            *self.attribute_columns,
            *self.relation_columns,
            *self.provenance_columns,
        ):
            if col in seen:
                raise MappingError(f"column {col!r} mapped twice")
            seen.add(col)
        for col, (owner, _) in self.provenance_columns.items():
            if owner not in self.attribute_columns and owner not in self.relation_columns:
                raise MappingError(
                    f"provenance column {col!r} owned by unmapped column {owner!r}"
                )

    @classmethod
    def from_file(cls, path: str | Path) -> "CsvMapping":
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
        try:
            return cls(
                id_column=obj["id_column"],
                attribute_columns=dict(obj.get("attribute_columns", {})),
                relation_columns=dict(obj.get("relation_columns", {})),
                provenance_columns={
                    col: (owner, pkey)
                    for col, (owner, pkey) in obj.get("provenance_columns", {}).items()
                },
                type_value=obj.get("type_value"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MappingError(f"bad mapping file {path}: {exc}") from exc

    def check_header(self, header: list[str]) -> None:
        known = set(header)
        for col in (
            self.id_column,
            *self.attribute_columns,
            *self.relation_columns,
            *self.provenance_columns,
        ):
            if col not in known:
                raise MappingError(f"mapped column {col!r} not in CSV header {header}")


def mention_id(mention: str) -> str:
    """Deterministic id for a text mention: M_ plus a digest of its words."""
    normalized = " ".join(tokenize(mention))
    digest = hashlib.sha1(normalized.encode("utf-8")).hexdigest()[:12]
    return f"M_{digest}"


class Ingester:
    """Runs file ingestion against an engine, collecting per-line errors."""

    def __init__(self, engine: Engine):
        self.engine = engine
        self.last_errors: list[IngestError] = []

    def _fail(self, line: int, exc: Exception) -> None:
        self.last_errors.append(IngestError(line, str(exc)))

    def ingest_jsonl(self, path: str | Path) -> int:
        """One profile per line; returns the number accepted."""
        self.last_errors = []
        accepted = 0
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.strip()
                if not line:
                    continue
                try:
                    profile = profile_from_obj(json.loads(line))
                except (ValueError, GraphLinkError) as exc:
                    self._fail(lineno, exc)
                    continue
                self.engine.put_profile(profile)
                accepted += 1
        return accepted

    def ingest_csv(self, path: str | Path, mapping: CsvMapping) -> int:
        """One profile per row under the mapping; empty cells make no objects."""
        self.last_errors = []
        accepted = 0
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise SchemaError(f"{path}: missing header row")
            mapping.check_header(list(reader.fieldnames))
            for lineno, row in enumerate(reader, 2):
                try:
                    profile = self._row_to_profile(row, mapping)
                except GraphLinkError as exc:
                    self._fail(lineno, exc)
                    continue
                self.engine.put_profile(profile)
                accepted += 1
        return accepted

    @staticmethod
    def _row_to_profile(row: dict[str, str], mapping: CsvMapping) -> Profile:
        pid = (row.get(mapping.id_column) or "").strip()
        prov_by_owner: dict[str, list[ProvPair]] = {}
        for col, (owner, pkey) in mapping.provenance_columns.items():
            cell = (row.get(col) or "").strip()
            if cell:
                prov_by_owner.setdefault(owner, []).append(ProvPair(pkey, cell))
        attributes = []
        if mapping.type_value:
            attributes.append(AttributeObject("type", mapping.type_value))
        for col, key in mapping.attribute_columns.items():
            cell = (row.get(col) or "").strip()
            if cell:
                attributes.append(
                    AttributeObject(key, cell, tuple(prov_by_owner.get(col, ())))
                )
        relations = []
        for col, key in mapping.relation_columns.items():
            cell = (row.get(col) or "").strip()
            if cell:
                relations.append(
                    RelationObject(key, cell, tuple(prov_by_owner.get(col, ())))
                )
        return make_profile(pid, attributes, relations)

    def ingest_triples(self, path: str | Path) -> int:
        """Tab-separated (subject, relation, object) lines, optional provenance.

        Mentions become profiles named by the mention text with ids derived
        from it; repeated mentions accumulate relations on one profile.
        Returns the number of accepted triple lines (duplicates collapse
        into a single relation object).
        """
        self.last_errors = []
        accepted = 0
        pending: dict[str, tuple[str, list[RelationObject]]] = {}

        def ensure(mention: str) -> str:
            pid = mention_id(mention)
            if pid not in pending:
                pending[pid] = (mention, [])
            return pid

        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.rstrip("\n")
                if not line.strip():
                    continue
                parts = line.split("\t")
                if len(parts) < 3 or not parts[0].strip() or not parts[1].strip() or not parts[2].strip():
                    self._fail(lineno, SchemaError("expected subject<TAB>relation<TAB>object"))
                    continue
                subject, relation, obj = (p.strip() for p in parts[:3])
                try:
                    prov = _parse_triple_prov(parts[3]) if len(parts) > 3 else ()
                except GraphLinkError as exc:
                    self._fail(lineno, exc)
                    continue
                subject_id = ensure(subject)
                object_id = ensure(obj)
                pending[subject_id][1].append(RelationObject(relation, object_id, prov))
                accepted += 1

        for pid, (mention, new_relations) in pending.items():
            existing = self.engine.resolve(pid)
            if existing is not None:
                attributes = list(existing.attributes)
                relations = list(existing.relations) + new_relations
            else:
                attributes = [AttributeObject("name", mention)]
                relations = new_relations
            self.engine.put_profile(make_profile(pid, attributes, relations))
        return accepted


def _parse_triple_prov(tail: str) -> tuple[ProvPair, ...]:
    pairs = []
    for chunk in tail.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        key, sep, value = chunk.partition("=")
        if not sep or not key.strip() or not value.strip():
            raise SchemaError(f"bad provenance chunk {chunk!r}")
        pairs.append(ProvPair(key.strip(), value.strip()))
    return tuple(pairs)
