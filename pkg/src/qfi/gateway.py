"""HTTP service composing the full seven-page flow.

Single process, synchronous handlers, file-backed persistence: every accepted
mutation is durably appended to its event log before the response leaves, and
executions synchronously walk the QUEUED -> RUNNING -> terminal lifecycle
within the request. Responses are canonical JSON documents.

Error codes form a closed set: validation_error, invalid_transition,
consent_required, invalid_page, invalid_state, already_submitted, not_found,
device_not_found, device_unavailable, unknown_region, capacity_exceeded,
invalid_request, invalid_gate, insufficient_entropy, key_exhausted,
reuse_forbidden, chain_corrupt, configuration_error, io_error.
"""
from __future__ import annotations

import secrets
import threading

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware

from . import devices as devices_mod
from . import impact as impact_mod
from . import pqsig, threatmodel
from .canonical import canonical_bytes
from .config import GatewayConfig
from .engage import Page
from .entropy import condition, extract_bits
from .errors import (
    AlreadySubmittedError,
    CapacityError,
    ChainCorruptError,
    ConfigurationError,
    ConsentRequiredError,
    DeviceNotFoundError,
    DeviceUnavailableError,
    InsufficientEntropyError,
    InvalidGateError,
    InvalidRequestError,
    InvalidStateError,
    InvalidTransitionError,
    KeyExhaustedError,
    NotFoundError,
    QfiError,
    ReuseForbiddenError,
    StorageError,
    ValidationError,
)
from .qsim import AnalogProgram, Circuit, Gate, GateKind
from .store import PersistentStore

_STATUS_FOR_ERROR = {
    ValidationError: 422,
    InvalidTransitionError: 422,
    InvalidGateError: 422,
    CapacityError: 422,
    InvalidRequestError: 422,
    InsufficientEntropyError: 422,
    ConsentRequiredError: 403,
    InvalidStateError: 409,
    AlreadySubmittedError: 409,
    KeyExhaustedError: 409,
    ReuseForbiddenError: 409,
    DeviceUnavailableError: 409,
    ChainCorruptError: 409,
    NotFoundError: 404,
    DeviceNotFoundError: 404,
    ConfigurationError: 500,
    StorageError: 500,
}


class ApiError(Exception):
    """Endpoint-level error with explicit status and machine code."""

    def __init__(self, http_status: int, code: str, message: str):
        super().__init__(message)
        self.http_status = http_status
        self.code = code
        self.message = message


def _error_response(status: int, code: str, message: str) -> Response:
    return Response(content=canonical_bytes({"code": code, "message": message}),
                    status_code=status, media_type="application/json")


def canonical_response(doc, status_code: int = 200) -> Response:
    return Response(content=canonical_bytes(doc), status_code=status_code,
                    media_type="application/json")


def entropy_circuit(n_qubits: int) -> Circuit:
    """The standard entropy program: H on every qubit."""
    return Circuit(n_qubits=n_qubits,
                   ops=tuple(Gate(kind=GateKind.H, target=q) for q in range(n_qubits)))


def create_app(config: GatewayConfig | None = None) -> FastAPI:
    config = config or GatewayConfig()
    catalog = devices_mod.load_catalog(config.catalog_path) if config.catalog_path \
        else devices_mod.load_default_catalog()
    regions = impact_mod.load_regions(config.regions_path) if config.regions_path \
        else impact_mod.load_default_regions()
    store = PersistentStore(config.data_dir, keyset_height=config.keyset_height)
    mutation_lock = threading.RLock()

    app = FastAPI(title="qfi gateway", docs_url=None, redoc_url=None)
    # the wizard may be served from a different origin than the API
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    app.state.config = config
    app.state.store = store
    app.state.catalog = catalog
    app.state.regions = regions

    @app.exception_handler(QfiError)
    def handle_domain_error(_request: Request, exc: QfiError) -> Response:
        return _error_response(_STATUS_FOR_ERROR.get(type(exc), 500), exc.code, exc.message)

    @app.exception_handler(ApiError)
    def handle_api_error(_request: Request, exc: ApiError) -> Response:
        return _error_response(exc.http_status, exc.code, exc.message)

    @app.exception_handler(RequestValidationError)
    def handle_body_error(_request: Request, exc: RequestValidationError) -> Response:
        return _error_response(422, "validation_error", str(exc.errors()[:1]))

    def require_body_field(body: dict, field: str):
        if not isinstance(body, dict) or field not in body:
            raise ValidationError(f"request body requires field {field!r}")
        return body[field]

    def gate_page(session, allowed: tuple[Page, ...]):
        if session.current_page not in allowed:
            labels = "/".join(p.label for p in allowed)
            raise ApiError(403, "invalid_page",
                           f"this step runs at {labels}, session is at {session.current_page.label}")
        if not session.consent:
            raise ConsentRequiredError("consent is required for this step")

    # -- session flow ---------------------------------------------------------

    @app.post("/api/session")
    def create_session() -> Response:
        with mutation_lock:
            session = store.engagement.create_session()
        return canonical_response(session.to_doc())

    @app.get("/api/session/{session_id}")
    def get_session(session_id: str) -> Response:
        return canonical_response(store.engagement.get(session_id).to_doc())

    @app.post("/api/session/{session_id}/page")
    def advance_page(session_id: str, body: dict) -> Response:
        target = require_body_field(body, "target")
        with mutation_lock:
            session = store.engagement.advance_page(session_id, target)
        return canonical_response(session.to_doc())

    @app.post("/api/session/{session_id}/consent")
    def record_consent(session_id: str, body: dict) -> Response:
        granted = require_body_field(body, "granted")
        if not isinstance(granted, bool):
            raise ValidationError("'granted' must be a boolean")
        with mutation_lock:
            session = store.engagement.record_consent(session_id, granted)
        return canonical_response(session.to_doc())

    @app.post("/api/session/{session_id}/sentiment")
    def submit_sentiment(session_id: str, body: dict) -> Response:
        word = require_body_field(body, "word")
        if not isinstance(word, str):
            raise ValidationError("'word' must be a string")
        with mutation_lock:
            session = store.engagement.submit_sentiment(session_id, word)
        return canonical_response(session.to_doc())

    @app.post("/api/session/{session_id}/vote")
    def cast_vote(session_id: str, body: dict) -> Response:
        selections = require_body_field(body, "selections")
        if not isinstance(selections, list):
            raise ValidationError("'selections' must be a list of technology options")
        with mutation_lock:
            session = store.engagement.cast_ballot(session_id, selections)
        return canonical_response(session.to_doc())

    # -- aggregates -------------------------------------------------------------

    @app.get("/api/sentiment/aggregate")
    def sentiment_aggregate(k: int = 25) -> Response:
        return canonical_response(store.engagement.aggregate_sentiment(k).to_doc())

    @app.get("/api/votes/tally")
    def votes_tally() -> Response:
        return canonical_response(store.engagement.tally().to_doc())

    # -- devices and impact -------------------------------------------------------

    @app.get("/api/devices")
    def list_devices(region: str | None = None) -> Response:
        region_code = region or config.default_region
        try:
            region_entry = impact_mod.get_region(regions, region_code)
        except NotFoundError:
            raise ApiError(422, "unknown_region", f"unknown region {region_code!r}") from None
        rows = []
        for device in catalog:
            duration = impact_mod.execution_duration_s(
                device, config.default_shots, config.per_shot_cost_s)
            entry = device.to_doc()
            entry["impact"] = impact_mod.estimate(device, duration, region_entry).to_doc()
            rows.append(entry)
        return canonical_response({"devices": rows, "region": region_code})

    # -- execution --------------------------------------------------------------

    @app.post("/api/session/{session_id}/execute")
    def execute(session_id: str, body: dict) -> Response:
        device_id = require_body_field(body, "device_id")
        n_qubits = body.get("n_qubits", config.default_qubits)
        shots = body.get("shots", config.default_shots)
        seed = body.get("seed")
        if seed is None:
            seed = secrets.randbits(64)
        if not isinstance(n_qubits, int) or not isinstance(shots, int) or not isinstance(seed, int):
            raise ValidationError("n_qubits, shots, and seed must be integers")

        with mutation_lock:
            session = store.engagement.get(session_id)
            gate_page(session, (Page.P6, Page.P7))
            device = devices_mod.get_device(catalog, device_id)
            if device.execution_model is devices_mod.ExecutionModel.ANALOG_BLOCKADE:
                payload: Circuit | AnalogProgram = AnalogProgram(
                    n_atoms=n_qubits, excitation_bias=config.default_excitation_bias)
            else:
                payload = entropy_circuit(n_qubits)
            request = devices_mod.ExecutionRequest(device_id=device_id, payload=payload,
                                                   shots=shots, seed=seed)
            record = devices_mod.execute(
                request, catalog,
                on_transition=lambda snapshot: store.record_execution_transition(
                    session_id, snapshot),
                sleep_latency=config.sleep_latency)
            store.record_execution_provenance(record)
        return canonical_response(record.to_doc())

    # -- artifacts ---------------------------------------------------------------

    @app.post("/api/session/{session_id}/artifact")
    def generate_artifact(session_id: str, body: dict) -> Response:
        execution_id = require_body_field(body, "execution_id")
        with mutation_lock:
            session = store.engagement.get(session_id)
            gate_page(session, (Page.P7,))
            stored = store.get_execution(execution_id)
            if stored.session_id != session_id:
                raise NotFoundError(f"execution {execution_id!r} does not belong to this session")
            record = stored.record
            if record.status is not devices_mod.ExecutionStatus.COMPLETED:
                raise InvalidStateError(
                    f"execution {execution_id} is {record.status.value}, not COMPLETED")
            device = devices_mod.get_device(catalog, record.device_id)
            raw = extract_bits(record.measurement, origin=execution_id)
            seed = condition(raw, device.id, execution_id,
                             entropy_class=device.entropy_class)
            keyset = store.get_or_create_keyset(session_id, seed)
            artifact = pqsig.sign_artifact(session_id, device.id, record, seed, keyset)
            store.record_leaf_consumed(session_id, artifact.signature.leaf_index)
            store.record_artifact(artifact)
        return canonical_response(artifact.to_doc())

    @app.get("/api/artifact/{artifact_id}/verify")
    def verify_artifact(artifact_id: str) -> Response:
        doc = store.get_artifact(artifact_id)
        return canonical_response({"artifact_id": artifact_id,
                                   "valid": pqsig.verify_artifact_doc(doc)})

    @app.get("/api/artifact/{artifact_id}")
    def get_artifact(artifact_id: str) -> Response:
        return canonical_response(store.get_artifact(artifact_id))

    # -- read-only registries --------------------------------------------------

    @app.get("/api/vulnerability")
    def vulnerability() -> Response:
        return canonical_response(
            {"primitives": [p.to_doc() for p in threatmodel.vulnerability_index()]})

    @app.get("/api/ledger")
    def ledger_entries(offset: int = 0, limit: int | None = None) -> Response:
        entries = store.ledger.list_entries(offset, limit)
        return canonical_response({"length": len(store.ledger),
                                   "entries": [e.to_doc() for e in entries]})

    @app.get("/api/ledger/verify")
    def ledger_verify() -> Response:
        return canonical_response(store.ledger.verify_chain().to_doc())

    return app
