"""Ordered key-value substrate: a sorted map persisted by an append-only log.

One substrate serves both the node/relation store and every similarity-edge
layout. Keys are strings; values are any JSON-serializable object. Records
are length-prefixed UTF-8 JSON. A snapshot plus log truncation happens on
close and whenever the log grows well past the live data size.

Durability model: writes go to the OS buffer on flush(); fsync happens on
snapshot and close. Pass directory=None for a purely in-memory store.
"""

from __future__ import annotations

import bisect
import json
import os
import re
import struct
import threading
from pathlib import Path
from typing import Any, Iterator

from .errors import StorageFailure

_LEN = struct.Struct(">I")

# Compact once the log holds this many records more than 4x the live keys.
_COMPACT_MIN_RECORDS = 65536

# Printable ASCII minus '"' and '\': strings that serialize to JSON verbatim.
_JSON_SAFE = re.compile(r'^[ -!#-\[\]-~]*$')


def _encode_payload(payload: list) -> bytes:
    """JSON-encode a log record, hand-formatting the hot string-only shapes."""
    n = len(payload)
    if n == 3 and type(payload[2]) is str:
        op, key, value = payload
        if _JSON_SAFE.match(key) and _JSON_SAFE.match(value):
            return f'["{op}","{key}","{value}"]'.encode()
    elif n == 2 and type(payload[1]) is str and _JSON_SAFE.match(payload[1]):
        return f'["{payload[0]}","{payload[1]}"]'.encode()
    return json.dumps(payload, separators=(",", ":")).encode("utf-8")


class OrderedKV:
    """Sorted string-keyed map with append-only-log persistence."""

    def __init__(self, directory: str | Path | None = None):
        self._data: dict[str, Any] = {}
        self._sorted: list[str] | None = []
        self._lock = threading.RLock()
        self._dir = Path(directory) if directory is not None else None
        self._log = None
        self._log_records = 0
        self._generation = 0
        if self._dir is not None:
            try:
                self._dir.mkdir(parents=True, exist_ok=True)
                self._load()
                self._log = open(self._log_path, "ab")
            except OSError as exc:
                raise StorageFailure(f"cannot open store at {self._dir}: {exc}") from exc

    @property
    def _log_path(self) -> Path:
        return self._dir / "log"

    @property
    def _snapshot_path(self) -> Path:
        return self._dir / "snapshot"

    @property
    def generation(self) -> int:
        """Monotonic mutation counter, persisted across restarts."""
        return self._generation

    # -- persistence ------------------------------------------------------

    def _load(self) -> None:
        if self._snapshot_path.exists():
            with open(self._snapshot_path, "rb") as fh:
                for record in read_records(fh):
                    if record[0] == "meta":
                        self._generation = record[1]
                    else:
                        self._data[record[1]] = record[2]
        if self._log_path.exists():
            with open(self._log_path, "r+b") as fh:
                good = 0
                for record in read_records(fh):
                    op = record[0]
                    if op == "p":
                        self._data[record[1]] = record[2]
                    elif op == "d":
                        self._data.pop(record[1], None)
                    self._log_records += 1
                    self._generation += 1
                    good = fh.tell()
                fh.truncate(good)
        self._sorted = None

    def _append(self, payload: list) -> None:
        if self._log is None:
            return
        blob = _encode_payload(payload)
        try:
            self._log.write(_LEN.pack(len(blob)) + blob)
        except OSError as exc:
            raise StorageFailure(f"log append failed: {exc}") from exc
        self._log_records += 1
        if self._log_records > _COMPACT_MIN_RECORDS + 4 * len(self._data):
            self._compact_locked()

    def _compact_locked(self) -> None:
        if self._dir is None:
            return
        tmp = self._snapshot_path.with_suffix(".tmp")
        try:
            with open(tmp, "wb") as fh:
                write_record(fh, ["meta", self._generation])
                for key, value in self._data.items():
                    write_record(fh, ["p", key, value])
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, self._snapshot_path)
            self._log.close()
            self._log = open(self._log_path, "wb")
            self._log_records = 0
        except OSError as exc:
            raise StorageFailure(f"compaction failed: {exc}") from exc

    def compact(self) -> None:
        """Write a fresh snapshot and truncate the log."""
        with self._lock:
            self._compact_locked()

    def flush(self) -> None:
        """Push buffered log records to the OS."""
        with self._lock:
            if self._log is not None:
                try:
                    self._log.flush()
                except OSError as exc:
                    raise StorageFailure(f"flush failed: {exc}") from exc

    def close(self) -> None:
        with self._lock:
            if self._dir is not None and self._log is not None:
                self._compact_locked()
                self._log.flush()
                os.fsync(self._log.fileno())
                self._log.close()
                self._log = None

    # -- map operations ---------------------------------------------------

    def get(self, key: str, default: Any = None) -> Any:
        return self._data.get(key, default)

    def __contains__(self, key: str) -> bool:
        return key in self._data

    def __len__(self) -> int:
        return len(self._data)

    def put(self, key: str, value: Any) -> None:
        with self._lock:
            if self._sorted is not None and key not in self._data:
                self._sorted = None
            self._data[key] = value
            self._generation += 1
            self._append(["p", key, value])

    def delete(self, key: str) -> bool:
        """Remove a key; returns False when it was absent (no log record then)."""
        with self._lock:
            if key not in self._data:
                return False
            del self._data[key]
            self._sorted = None
            self._generation += 1
            self._append(["d", key])
            return True

    def _sorted_keys(self) -> list[str]:
        keys = self._sorted
        if keys is None:
            keys = self._sorted = sorted(self._data)
        return keys

    def scan(self, prefix: str = "") -> Iterator[tuple[str, Any]]:
        """All (key, value) pairs whose key starts with prefix, in key order.

        Takes a consistent snapshot of the matching keys before yielding.
        """
        with self._lock:
            keys = self._sorted_keys()
            if prefix:
                lo = bisect.bisect_left(keys, prefix)
                hi = lo
                while hi < len(keys) and keys[hi].startswith(prefix):
                    hi += 1
                selected = [(k, self._data[k]) for k in keys[lo:hi]]
            else:
                selected = [(k, self._data[k]) for k in keys]
        return iter(selected)

    def keys(self) -> list[str]:
        with self._lock:
            return list(self._sorted_keys())


def write_record(fh, payload: list) -> None:
    blob = _encode_payload(payload)
    fh.write(_LEN.pack(len(blob)) + blob)


def read_records(fh) -> Iterator[list]:
    """Yield complete records; stop silently at a torn tail."""
    while True:
        header = fh.read(_LEN.size)
        if len(header) < _LEN.size:
            return
        (size,) = _LEN.unpack(header)
        blob = fh.read(size)
        if len(blob) < size:
            return
        try:
            yield json.loads(blob)
        except ValueError:
            return
