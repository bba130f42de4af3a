"""Append-only hash-chained ledger over canonical payload documents.

Storage is one JSON-lines file, one entry per line, so the hashed payload
bytes are exactly the stored payload string. Each entry hash covers
``index|timestamp|payload|prev_hash`` with literal '|' separators; entry 0
links to sixty-four '0' characters. A corrupt chain refuses further appends
until the file is repaired.
"""
from __future__ import annotations

import hashlib
import os
import threading
from dataclasses import dataclass
from pathlib import Path

from .canonical import canonical_dumps, rfc3339, utc_now
from .errors import ChainCorruptError, NotFoundError, StorageError, ValidationError

GENESIS_PREV = "0" * 64

PAYLOAD_KINDS = ("Artifact", "ExecutionRecord")


@dataclass(frozen=True)
class LedgerEntry:
    index: int
    timestamp: str
    payload_kind: str
    payload: str
    prev_hash: str
    entry_hash: str

    def to_doc(self) -> dict:
        return {
            "index": self.index,
            "timestamp": self.timestamp,
            "payload_kind": self.payload_kind,
            "payload": self.payload,
            "prev_hash": self.prev_hash,
            "entry_hash": self.entry_hash,
        }


@dataclass(frozen=True)
class ChainStatus:
    ok: bool
    length: int
    bad_index: int | None = None
    reason: str | None = None

    def to_doc(self) -> dict:
        doc: dict = {"ok": self.ok, "length": self.length}
        if not self.ok:
            doc["bad_index"] = self.bad_index
            doc["reason"] = self.reason
        return doc


def entry_hash(index: int, timestamp: str, payload: str, prev_hash: str) -> str:
    preimage = f"{index}|{timestamp}|{payload}|{prev_hash}".encode("utf-8")
    return hashlib.sha256(preimage).hexdigest()


class Ledger:
    """Single-writer, durably appended hash chain backed by one JSONL file."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.RLock()
        self._entries: list[LedgerEntry] = []
        self._corrupt: ChainStatus | None = None
        self._load()

    def _load(self) -> None:
        if not self.path.exists():
            return
        entries = []
        try:
            raw = self.path.read_bytes()
        except OSError as exc:
            raise StorageError(f"cannot read ledger {self.path}: {exc}") from exc
        lines = raw.split(b"\n")
        if lines and lines[-1] == b"":
            lines.pop()
        for position, raw_line in enumerate(lines):
            if not raw_line.strip():
                continue
            try:
                line = raw_line.decode("utf-8")
            except UnicodeDecodeError:
                line = None
            entry, problem = (None, "undecodable entry line") if line is None \
                else _parse_line(position, line)
            if problem is not None:
                self._entries = entries
                self._corrupt = ChainStatus(ok=False, length=len(lines),
                                            bad_index=position, reason=problem)
                return
            entries.append(entry)
        self._entries = entries
        status = _verify(entries)
        self._corrupt = None if status.ok else status

    def __len__(self) -> int:
        with self._lock:
            return len(self._entries)

    def head_hash(self) -> str:
        with self._lock:
            return self._entries[-1].entry_hash if self._entries else GENESIS_PREV

    def append(self, payload: str, kind: str, timestamp: str | None = None) -> LedgerEntry:
        """Durably persist one entry before returning it."""
        if kind not in PAYLOAD_KINDS:
            raise ValidationError(f"payload_kind must be one of {PAYLOAD_KINDS}")
        if not isinstance(payload, str) or not payload:
            raise ValidationError("payload must be nonempty canonical text")
        with self._lock:
            if self._corrupt is not None:
                raise ChainCorruptError(
                    f"ledger corrupt at index {self._corrupt.bad_index} "
                    f"({self._corrupt.reason}); appends refused until repaired")
            index = len(self._entries)
            ts = timestamp if timestamp is not None else rfc3339(utc_now())
            prev = self.head_hash()
            entry = LedgerEntry(index=index, timestamp=ts, payload_kind=kind,
                                payload=payload, prev_hash=prev,
                                entry_hash=entry_hash(index, ts, payload, prev))
            line = canonical_dumps(entry.to_doc()) + "\n"
            try:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with open(self.path, "a", encoding="utf-8") as fh:
                    fh.write(line)
                    fh.flush()
                    os.fsync(fh.fileno())
            except OSError as exc:
                raise StorageError(f"cannot append to ledger {self.path}: {exc}") from exc
            self._entries.append(entry)
            return entry

    def get_entry(self, index: int) -> LedgerEntry:
        with self._lock:
            if not 0 <= index < len(self._entries):
                raise NotFoundError(f"ledger has no entry {index}")
            return self._entries[index]

    def list_entries(self, offset: int = 0, limit: int | None = None) -> list[LedgerEntry]:
        if offset < 0:
            raise ValidationError("offset must be >= 0")
        with self._lock:
            end = len(self._entries) if limit is None else offset + max(limit, 0)
            return self._entries[offset:end]

    def verify_chain(self) -> ChainStatus:
        """Recompute every hash and link from the on-disk file."""
        with self._lock:
            fresh = Ledger.__new__(Ledger)
            fresh.path = self.path
            fresh._lock = threading.RLock()
            fresh._entries = []
            fresh._corrupt = None
            fresh._load()
            if fresh._corrupt is not None:
                self._corrupt = fresh._corrupt
                return fresh._corrupt
            status = _verify(fresh._entries)
            self._corrupt = None if status.ok else status
            if status.ok:
                self._entries = fresh._entries
            return status


def _parse_line(position: int, line: str) -> tuple[LedgerEntry | None, str | None]:
    import json

    try:
        doc = json.loads(line)
    except json.JSONDecodeError:
        return None, "unparseable entry line"
    try:
        entry = LedgerEntry(index=doc["index"], timestamp=doc["timestamp"],
                            payload_kind=doc["payload_kind"], payload=doc["payload"],
                            prev_hash=doc["prev_hash"], entry_hash=doc["entry_hash"])
    except (KeyError, TypeError):
        return None, "entry missing required fields"
    return entry, None


def _verify(entries: list[LedgerEntry]) -> ChainStatus:
    prev = GENESIS_PREV
    for position, entry in enumerate(entries):
        if entry.index != position:
            return ChainStatus(ok=False, length=len(entries), bad_index=position,
                               reason=f"index {entry.index} at position {position}")
        if entry.payload_kind not in PAYLOAD_KINDS:
            return ChainStatus(ok=False, length=len(entries), bad_index=position,
                               reason=f"unknown payload_kind {entry.payload_kind!r}")
        if entry.prev_hash != prev:
            return ChainStatus(ok=False, length=len(entries), bad_index=position,
                               reason="previous-hash link broken")
        expected = entry_hash(entry.index, entry.timestamp, entry.payload, entry.prev_hash)
        if entry.entry_hash != expected:
            return ChainStatus(ok=False, length=len(entries), bad_index=position,
                               reason="entry hash mismatch")
        prev = entry.entry_hash
    return ChainStatus(ok=True, length=len(entries))
