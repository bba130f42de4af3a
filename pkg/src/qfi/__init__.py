"""Quantum-seeded post-quantum signature artifacts, end to end.

Subsystems: gate/analog simulation (qsim), device catalog and dispatch
(devices), entropy extraction (entropy), hash-based signatures (pqsig),
primitive vulnerability registry (threatmodel), energy/carbon estimation
(impact), participant sessions (engage), the hash-chained provenance ledger
(ledger), and the HTTP gateway plus CLI that compose them.
"""
from .canonical import canonical_dumps, canonical_loads
from .devices import (
    Architecture,
    DeviceSpec,
    ExecutionModel,
    ExecutionRecord,
    ExecutionRequest,
    ExecutionStatus,
    compare_devices,
    execute,
    load_catalog,
    load_default_catalog,
)
from .engage import Ballot, EngagementService, Page, Session, TechOption
from .entropy import (
    EntropyClass,
    EntropyReport,
    RawBits,
    Seed256,
    condition,
    expand,
    extract_bits,
    health_check,
    von_neumann_debias,
)
from .impact import ImpactEstimate, RegionIntensity, compare_impact, estimate
from .ledger import ChainStatus, Ledger, LedgerEntry
from .pqsig import (
    Artifact,
    MerkleLamportKeyset,
    PQSignature,
    derive_quantum_id,
    keygen,
    sign,
    sign_artifact,
    verify,
    verify_artifact,
)
from .qsim import (
    AnalogProgram,
    Circuit,
    Gate,
    GateKind,
    MeasurementRecord,
    NoiseSpec,
    StateVector,
    apply_gate,
    run_analog_blockade,
    run_statevector,
    sample,
)
from .threatmodel import PrimitiveProfile, effective_security, vulnerability_index

__version__ = "0.1.0"
