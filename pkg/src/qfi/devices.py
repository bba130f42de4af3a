"""Execution-environment catalog and dispatcher.

Devices are declared in a YAML catalog (one block per device, key per field)
and dispatched onto the local emulations: classical simulators sample noise
free, gate QPUs sample with their configured depolarizing/readout noise, and
the neutral-atom entry runs the blockade sampler. Every run yields a record
with a QUEUED -> RUNNING -> COMPLETED/FAILED lifecycle and a provenance
digest over (execution_id, device_id, shots, seed, counts).
"""
from __future__ import annotations

import hashlib
import time
import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable

import yaml

from .canonical import canonical_bytes, parse_rfc3339, rfc3339, utc_now
from .entropy import EntropyClass
from .errors import (
    CapacityError,
    ConfigurationError,
    DeviceNotFoundError,
    DeviceUnavailableError,
    InvalidRequestError,
    ValidationError,
)
from .qsim import AnalogProgram, Circuit, NoiseSpec, run_analog_blockade, sample


class Architecture(str, Enum):
    CLASSICAL_SIMULATOR = "ClassicalSimulator"
    TRAPPED_ION = "TrappedIon"
    SUPERCONDUCTING = "Superconducting"
    NEUTRAL_ATOM_ANALOG = "NeutralAtomAnalog"


class ExecutionModel(str, Enum):
    STATEVECTOR = "Statevector"
    GATE_NOISY = "GateNoisy"
    ANALOG_BLOCKADE = "AnalogBlockade"


class ExecutionStatus(str, Enum):
    QUEUED = "QUEUED"
    RUNNING = "RUNNING"
    COMPLETED = "COMPLETED"
    FAILED = "FAILED"


_STATUS_ORDER = {s: i for i, s in enumerate(
    [ExecutionStatus.QUEUED, ExecutionStatus.RUNNING, ExecutionStatus.COMPLETED])}
_STATUS_ORDER[ExecutionStatus.FAILED] = 2

_MODEL_FOR_ARCHITECTURE = {
    Architecture.CLASSICAL_SIMULATOR: ExecutionModel.STATEVECTOR,
    Architecture.TRAPPED_ION: ExecutionModel.GATE_NOISY,
    Architecture.SUPERCONDUCTING: ExecutionModel.GATE_NOISY,
    Architecture.NEUTRAL_ATOM_ANALOG: ExecutionModel.ANALOG_BLOCKADE,
}

COMPARE_METRICS = ("max_qubits", "gate_error", "latency_ms", "power_kw")


@dataclass(frozen=True)
class DeviceSpec:
    id: str
    display_name: str
    architecture: Architecture
    execution_model: ExecutionModel
    max_qubits: int
    gate_error: float
    readout_error: float
    latency_ms: float
    power_kw: float
    available: bool
    entropy_class: EntropyClass
    # descriptive only, never compared on
    coherence_time: str | None = None
    connectivity: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "architecture", Architecture(self.architecture))
        object.__setattr__(self, "execution_model", ExecutionModel(self.execution_model))
        object.__setattr__(self, "entropy_class", EntropyClass(self.entropy_class))
        if self.max_qubits < 1:
            raise ConfigurationError(f"device {self.id}: max_qubits must be positive")
        for name in ("gate_error", "readout_error"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ConfigurationError(f"device {self.id}: {name} must lie in [0, 1]")
        if self.latency_ms < 0 or self.power_kw < 0:
            raise ConfigurationError(f"device {self.id}: latency_ms and power_kw must be >= 0")
        expect_computed = self.architecture is Architecture.CLASSICAL_SIMULATOR
        if (self.entropy_class is EntropyClass.COMPUTED) != expect_computed:
            raise ConfigurationError(
                f"device {self.id}: entropy_class must be "
                f"{'computed' if expect_computed else 'measured'} for {self.architecture.value}")
        if self.execution_model is not _MODEL_FOR_ARCHITECTURE[self.architecture]:
            raise ConfigurationError(
                f"device {self.id}: execution_model {self.execution_model.value} "
                f"does not match architecture {self.architecture.value}")

    def to_doc(self) -> dict:
        return {
            "id": self.id,
            "display_name": self.display_name,
            "architecture": self.architecture.value,
            "execution_model": self.execution_model.value,
            "max_qubits": self.max_qubits,
            "gate_error": self.gate_error,
            "readout_error": self.readout_error,
            "latency_ms": self.latency_ms,
            "power_kw": self.power_kw,
            "available": self.available,
            "entropy_class": self.entropy_class.value,
            "coherence_time": self.coherence_time,
            "connectivity": self.connectivity,
        }


@dataclass(frozen=True)
class ExecutionRequest:
    device_id: str
    payload: Circuit | AnalogProgram
    shots: int
    seed: int

    def __post_init__(self):
        if self.shots < 1:
            raise ValidationError("shots must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValidationError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class ExecutionRecord:
    execution_id: str
    device_id: str
    status: ExecutionStatus
    submitted_at: datetime
    shots: int
    seed: int
    completed_at: datetime | None = None
    counts: dict[str, int] | None = None
    failure_reason: str | None = None
    provenance_digest: str = ""
    # ordered shots for the entropy extractor; never serialized into the doc
    measurement: object = field(default=None, compare=False, repr=False)

    def to_doc(self) -> dict:
        doc = {
            "execution_id": self.execution_id,
            "device_id": self.device_id,
            "status": self.status.value,
            "submitted_at": rfc3339(self.submitted_at),
            "shots": self.shots,
            "seed": self.seed,
            "provenance_digest": self.provenance_digest,
        }
        if self.completed_at is not None:
            doc["completed_at"] = rfc3339(self.completed_at)
        if self.status is ExecutionStatus.COMPLETED:
            doc["counts"] = self.counts
        if self.status is ExecutionStatus.FAILED:
            doc["failure_reason"] = self.failure_reason
        return doc

    @classmethod
    def from_doc(cls, doc: dict, measurement: object = None) -> "ExecutionRecord":
        return cls(
            execution_id=doc["execution_id"],
            device_id=doc["device_id"],
            status=ExecutionStatus(doc["status"]),
            submitted_at=parse_rfc3339(doc["submitted_at"]),
            completed_at=parse_rfc3339(doc["completed_at"]) if "completed_at" in doc else None,
            shots=doc["shots"],
            seed=doc["seed"],
            counts=doc.get("counts"),
            failure_reason=doc.get("failure_reason"),
            provenance_digest=doc["provenance_digest"],
            measurement=measurement,
        )


def provenance_digest(execution_id: str, device_id: str, shots: int, seed: int,
                      counts: dict[str, int] | None) -> str:
    preimage = canonical_bytes({
        "execution_id": execution_id,
        "device_id": device_id,
        "shots": shots,
        "seed": seed,
        "counts": counts,
    })
    return hashlib.sha256(preimage).hexdigest()


_REQUIRED_FIELDS = ("id", "display_name", "architecture", "execution_model", "max_qubits",
                    "gate_error", "readout_error", "latency_ms", "power_kw", "available",
                    "entropy_class")


def load_catalog(source: str | Path | dict) -> list[DeviceSpec]:
    """Parse and validate a device catalog document or file."""
    if isinstance(source, (str, Path)):
        try:
            with open(source, "r", encoding="utf-8") as fh:
                document = yaml.safe_load(fh)
        except OSError as exc:
            raise ConfigurationError(f"cannot read catalog {source}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"malformed catalog {source}: {exc}") from exc
    else:
        document = source
    if not isinstance(document, dict) or not isinstance(document.get("devices"), list):
        raise ConfigurationError("catalog must be a mapping with a 'devices' list")

    specs: list[DeviceSpec] = []
    seen: set[str] = set()
    for entry in document["devices"]:
        if not isinstance(entry, dict):
            raise ConfigurationError(f"device entry must be a mapping, got {entry!r}")
        name = entry.get("id", "<missing id>")
        missing = [f for f in _REQUIRED_FIELDS if f not in entry]
        if missing:
            raise ConfigurationError(f"device {name}: missing fields {missing}")
        unknown = set(entry) - set(_REQUIRED_FIELDS) - {"coherence_time", "connectivity"}
        if unknown:
            raise ConfigurationError(f"device {name}: unknown fields {sorted(unknown)}")
        if entry["id"] in seen:
            raise ConfigurationError(f"device {name}: duplicate id")
        seen.add(entry["id"])
        try:
            specs.append(DeviceSpec(**entry))
        except ValueError as exc:
            raise ConfigurationError(f"device {name}: {exc}") from exc
    return specs


def default_catalog_path() -> Path:
    return Path(__file__).parent / "config" / "devices.yaml"


def load_default_catalog() -> list[DeviceSpec]:
    return load_catalog(default_catalog_path())


def get_device(catalog: Iterable[DeviceSpec], device_id: str) -> DeviceSpec:
    for spec in catalog:
        if spec.id == device_id:
            return spec
    raise DeviceNotFoundError(f"unknown device {device_id!r}")


def _payload_qubits(payload: Circuit | AnalogProgram) -> int:
    return payload.n_qubits if isinstance(payload, Circuit) else payload.n_atoms


def execute(request: ExecutionRequest, catalog: Iterable[DeviceSpec], *,
            on_transition: Callable[[ExecutionRecord], None] | None = None,
            execution_id: str | None = None,
            clock: Callable[[], datetime] = utc_now,
            sleep_latency: bool = False) -> ExecutionRecord:
    """Run a request on its device's emulation and return the terminal record.

    ``on_transition`` observes every lifecycle snapshot (QUEUED, RUNNING,
    terminal) in order. The emulated latency is folded into completed_at so
    tests never sleep unless ``sleep_latency`` is set.
    """
    device = get_device(catalog, request.device_id)
    if not device.available:
        raise DeviceUnavailableError(f"device {device.id} is not available")

    wants_analog = device.execution_model is ExecutionModel.ANALOG_BLOCKADE
    if wants_analog != isinstance(request.payload, AnalogProgram):
        raise InvalidRequestError(
            f"device {device.id} ({device.execution_model.value}) cannot run a "
            f"{type(request.payload).__name__} payload")
    if _payload_qubits(request.payload) > device.max_qubits:
        raise CapacityError(
            f"payload needs {_payload_qubits(request.payload)} qubits, "
            f"device {device.id} caps at {device.max_qubits}")

    execution_id = execution_id or str(uuid.uuid4())
    submitted_at = clock()
    record = ExecutionRecord(
        execution_id=execution_id, device_id=device.id,
        status=ExecutionStatus.QUEUED, submitted_at=submitted_at,
        shots=request.shots, seed=request.seed,
        provenance_digest=provenance_digest(execution_id, device.id, request.shots,
                                            request.seed, None))
    if on_transition:
        on_transition(record)
    record = replace(record, status=ExecutionStatus.RUNNING)
    if on_transition:
        on_transition(record)

    started = time.monotonic()
    try:
        if wants_analog:
            measurement = run_analog_blockade(
                request.payload.n_atoms, request.shots, request.seed,
                request.payload.excitation_bias)
        else:
            noise = (NoiseSpec() if device.architecture is Architecture.CLASSICAL_SIMULATOR
                     else NoiseSpec(depolarizing_prob=device.gate_error,
                                    readout_flip_prob=device.readout_error))
            measurement = sample(request.payload, request.shots, request.seed, noise)
    except Exception as exc:  # runtime failure -> FAILED record, not an exception
        record = replace(record, status=ExecutionStatus.FAILED,
                         completed_at=clock(), failure_reason=str(exc))
        if on_transition:
            on_transition(record)
        return record

    if sleep_latency:
        time.sleep(device.latency_ms / 1000.0)
    elapsed_ms = (time.monotonic() - started) * 1000.0
    completed_at = submitted_at + timedelta(milliseconds=max(elapsed_ms, device.latency_ms))

    record = replace(
        record, status=ExecutionStatus.COMPLETED, completed_at=completed_at,
        counts=dict(measurement.counts), measurement=measurement,
        provenance_digest=provenance_digest(execution_id, device.id, request.shots,
                                            request.seed, dict(measurement.counts)))
    if on_transition:
        on_transition(record)
    return record


def compare_devices(catalog: Iterable[DeviceSpec], metric: str) -> list[tuple[str, float]]:
    """Rank devices by one metric; best first, ties by id."""
    if metric not in COMPARE_METRICS:
        raise ValidationError(f"metric must be one of {COMPARE_METRICS}")
    sign = -1.0 if metric == "max_qubits" else 1.0
    ranked = sorted(catalog, key=lambda d: (sign * getattr(d, metric), d.id))
    return [(d.id, getattr(d, metric)) for d in ranked]


def status_rank(status: ExecutionStatus) -> int:
    return _STATUS_ORDER[ExecutionStatus(status)]
