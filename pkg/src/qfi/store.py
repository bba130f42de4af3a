"""File-backed persistence for the gateway.

Five append-only logs live in the data directory: sessions.log (session
lifecycle plus keyset events), sentiment.log, ballots.log, executions.log
(one event per status transition), and ledger.log (the hash chain). Every
event carries a global sequence number, so startup replays all logs merged
in original order and rebuilds the exact in-memory state. Writes are flushed
and fsynced before a request is acknowledged.
"""
from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .canonical import canonical_dumps
from .devices import ExecutionRecord, ExecutionStatus
from .engage import EngagementService
from .entropy import EntropyClass, Seed256
from .errors import NotFoundError, StorageError
from .ledger import Ledger
from .pqsig import Artifact, MerkleLamportKeyset, keygen

SESSIONS_LOG = "sessions.log"
EXECUTIONS_LOG = "executions.log"
SENTIMENT_LOG = "sentiment.log"
BALLOTS_LOG = "ballots.log"
LEDGER_LOG = "ledger.log"

_ENGAGE_FILE_FOR_OP = {
    "create": SESSIONS_LOG,
    "page": SESSIONS_LOG,
    "consent": SESSIONS_LOG,
    "keyset": SESSIONS_LOG,
    "leaf": SESSIONS_LOG,
    "sentiment": SENTIMENT_LOG,
    "ballot": BALLOTS_LOG,
    "execution": EXECUTIONS_LOG,
}


class EventLog:
    """Append-only JSONL event file with durable writes."""

    def __init__(self, path: Path):
        self.path = path

    def append(self, event: dict) -> None:
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(canonical_dumps(event) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
        except OSError as exc:
            raise StorageError(f"cannot append to {self.path}: {exc}") from exc

    def read_all(self) -> list[dict]:
        if not self.path.exists():
            return []
        events = []
        with open(self.path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    events.append(json.loads(line))
        return events


@dataclass
class StoredExecution:
    session_id: str
    record: ExecutionRecord
    status_history: list[str] = field(default_factory=list)


class PersistentStore:
    """Materialized views over the event logs plus the provenance ledger."""

    def __init__(self, data_dir: str | Path, keyset_height: int = 4):
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.keyset_height = keyset_height
        self._logs = {name: EventLog(self.data_dir / name)
                      for name in (SESSIONS_LOG, EXECUTIONS_LOG, SENTIMENT_LOG, BALLOTS_LOG)}
        self._io_lock = threading.RLock()
        self._seq = 0

        self.engagement = EngagementService(on_event=self._persist_engage_event)
        self.ledger = Ledger(self.data_dir / LEDGER_LOG)
        self.executions: dict[str, StoredExecution] = {}
        self.keysets: dict[str, MerkleLamportKeyset] = {}
        self.keyset_meta: dict[str, dict] = {}
        self.artifacts: dict[str, dict] = {}
        self._replay()

    # -- persistence plumbing -------------------------------------------------

    def _next_seq(self) -> int:
        with self._io_lock:
            self._seq += 1
            return self._seq

    def _write(self, event: dict) -> None:
        log = self._logs[_ENGAGE_FILE_FOR_OP[event["op"]]]
        with self._io_lock:
            event = dict(event)
            event["seq"] = self._next_seq()
            log.append(event)

    def _persist_engage_event(self, event: dict) -> None:
        self._write(event)

    def _replay(self) -> None:
        events: list[dict] = []
        for log in self._logs.values():
            events.extend(log.read_all())
        events.sort(key=lambda e: e.get("seq", 0))
        for event in events:
            self._seq = max(self._seq, event.get("seq", 0))
            op = event["op"]
            if op in ("create", "page", "consent", "sentiment", "ballot"):
                self.engagement.apply(event)
            elif op == "execution":
                self._apply_execution_event(event)
            elif op == "keyset":
                self._apply_keyset_event(event)
            elif op == "leaf":
                self._apply_leaf_event(event)
        for entry in self.ledger.list_entries():
            if entry.payload_kind == "Artifact":
                doc = json.loads(entry.payload)
                self.artifacts[doc["artifact_id"]] = doc

    def _apply_execution_event(self, event: dict) -> None:
        from .qsim import MeasurementRecord

        doc = event["record"]
        outcomes = event.get("outcomes")
        measurement = None
        if outcomes:
            measurement = MeasurementRecord(n_qubits=len(outcomes[0]), shots=len(outcomes),
                                            seed=doc["seed"], outcomes=tuple(outcomes))
        record = ExecutionRecord.from_doc(doc, measurement=measurement)
        stored = self.executions.get(record.execution_id)
        if stored is None:
            stored = StoredExecution(session_id=event["session_id"], record=record)
            self.executions[record.execution_id] = stored
        stored.record = record
        stored.status_history.append(record.status.value)

    def _apply_keyset_event(self, event: dict) -> None:
        seed = Seed256(bytes=bytes.fromhex(event["seed"]),
                       source_execution=event["source_execution"],
                       entropy_class=EntropyClass(event["entropy_class"]))
        self.keysets[event["session_id"]] = keygen(seed, event["height"])
        self.keyset_meta[event["session_id"]] = dict(event)

    def _apply_leaf_event(self, event: dict) -> None:
        keyset = self.keysets.get(event["session_id"])
        if keyset is None:
            return
        index = event["leaf_index"]
        keyset.used[index] = True
        while keyset.next_index < keyset.n_leaves and keyset.used[keyset.next_index]:
            keyset.next_index += 1

    # -- execution records -----------------------------------------------------

    def record_execution_transition(self, session_id: str, record: ExecutionRecord) -> None:
        event: dict = {"op": "execution", "session_id": session_id, "record": record.to_doc()}
        if record.status is ExecutionStatus.COMPLETED and record.measurement is not None:
            event["outcomes"] = list(record.measurement.outcomes)
        self._write(event)
        self._apply_execution_event(event)

    def get_execution(self, execution_id: str) -> StoredExecution:
        stored = self.executions.get(execution_id)
        if stored is None:
            raise NotFoundError(f"unknown execution {execution_id!r}")
        return stored

    # -- keysets ---------------------------------------------------------------

    def get_or_create_keyset(self, session_id: str, seed: Seed256) -> MerkleLamportKeyset:
        existing = self.keysets.get(session_id)
        if existing is not None:
            return existing
        event = {"op": "keyset", "session_id": session_id, "seed": seed.bytes.hex(),
                 "entropy_class": seed.entropy_class.value,
                 "source_execution": seed.source_execution, "height": self.keyset_height}
        self._write(event)
        self._apply_keyset_event(event)
        return self.keysets[session_id]

    def record_leaf_consumed(self, session_id: str, leaf_index: int) -> None:
        # the in-memory keyset already consumed the leaf inside sign()
        self._write({"op": "leaf", "session_id": session_id, "leaf_index": leaf_index})

    # -- artifacts ---------------------------------------------------------------

    def record_artifact(self, artifact: Artifact) -> None:
        payload = artifact.canonical()
        self.ledger.append(payload, "Artifact")
        self.artifacts[artifact.artifact_id] = json.loads(payload)

    def record_execution_provenance(self, record: ExecutionRecord) -> None:
        self.ledger.append(canonical_dumps(record.to_doc()), "ExecutionRecord")

    def get_artifact(self, artifact_id: str) -> dict:
        doc = self.artifacts.get(artifact_id)
        if doc is None:
            raise NotFoundError(f"unknown artifact {artifact_id!r}")
        return doc
