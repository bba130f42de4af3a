"""Canonical document serialization.

Every externally visible document (execution records, artifacts, ledger
payloads, HTTP bodies) is serialized the same way: JSON with keys sorted
lexicographically, no insignificant whitespace, UTF-8, binary values as
lowercase hex. Hashes are computed over exactly these bytes, so any two
components that agree on the field values agree on the digest.
"""
from __future__ import annotations

import json
from datetime import datetime, timezone
from typing import Any


def canonical_dumps(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False, allow_nan=False)


def canonical_bytes(doc: Any) -> bytes:
    return canonical_dumps(doc).encode("utf-8")


def canonical_loads(data: str | bytes) -> Any:
    return json.loads(data)


def pretty_dumps(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False)


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


def rfc3339(ts: datetime) -> str:
    """Render a UTC timestamp as RFC 3339 with microseconds and 'Z'."""
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def parse_rfc3339(text: str) -> datetime:
    return datetime.strptime(text, "%Y-%m-%dT%H:%M:%S.%fZ").replace(tzinfo=timezone.utc)
