"""Operator command line: run the service and exercise every pipeline stage
offline.

Output is a canonical document per command (``--pretty`` for humans). Exit
codes: 0 success, 1 usage, 2 validation or configuration failure, 3
verification failure, 4 io failure. With ``--seed`` every command is
bit-reproducible: identifiers derive from the seeded generator and timestamps
pin to a fixed instant.
"""
from __future__ import annotations

import argparse
import json
import sys
import uuid
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import devices as devices_mod
from . import impact as impact_mod
from . import pqsig
from .canonical import canonical_dumps, pretty_dumps, utc_now
from .config import ENV_DATA_DIR, load_config
from .entropy import condition, extract_bits, health_check, von_neumann_debias
from .errors import (
    ConfigurationError,
    NotFoundError,
    QfiError,
    StorageError,
)
from .gateway import create_app, entropy_circuit
from .ledger import Ledger
from .qsim import AnalogProgram
from .store import LEDGER_LOG

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_VERIFY = 3
EXIT_IO = 4

# fixed instant for seeded, bit-reproducible runs
_SEEDED_EPOCH = datetime(2000, 1, 1, tzinfo=timezone.utc)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


class IdSource:
    """Identifier and clock source; seeded instances replay byte-identically."""

    def __init__(self, seed: int | None):
        self._rng = None if seed is None else np.random.default_rng(np.uint64(seed))

    def uuid(self) -> str:
        if self._rng is None:
            return str(uuid.uuid4())
        return str(uuid.UUID(bytes=self._rng.bytes(16), version=4))

    def now(self) -> datetime:
        return utc_now() if self._rng is None else _SEEDED_EPOCH

    def seed64(self) -> int:
        if self._rng is None:
            import secrets

            return secrets.randbits(64)
        return int(self._rng.integers(0, 2 ** 63))


def _emit(args, doc) -> None:
    print(pretty_dumps(doc) if args.pretty else canonical_dumps(doc))


def _load_catalog(args):
    path = getattr(args, "catalog", None)
    return devices_mod.load_catalog(path) if path else devices_mod.load_default_catalog()


def _load_regions(args):
    path = getattr(args, "regions", None)
    return impact_mod.load_regions(path) if path else impact_mod.load_default_regions()


def _run_entropy_execution(args, catalog, ids: IdSource):
    device = devices_mod.get_device(catalog, args.device)
    if device.execution_model is devices_mod.ExecutionModel.ANALOG_BLOCKADE:
        payload = AnalogProgram(n_atoms=args.qubits, excitation_bias=0.35)
    else:
        payload = entropy_circuit(args.qubits)
    request = devices_mod.ExecutionRequest(device_id=args.device, payload=payload,
                                           shots=args.shots, seed=ids.seed64())
    return device, devices_mod.execute(request, catalog, execution_id=ids.uuid(),
                                       clock=ids.now)


# -- subcommand handlers ------------------------------------------------------

def cmd_serve(args) -> int:
    import uvicorn

    config = load_config(args.config)
    if args.addr:
        config.addr = args.addr
    if args.data_dir:
        config.data_dir = args.data_dir
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return EXIT_OK


def cmd_devices_list(args) -> int:
    catalog = _load_catalog(args)
    regions = _load_regions(args)
    region = impact_mod.get_region(regions, args.region)
    rows = []
    for device in catalog:
        duration = impact_mod.execution_duration_s(device, args.shots, 0.0001)
        entry = device.to_doc()
        entry["impact"] = impact_mod.estimate(device, duration, region).to_doc()
        rows.append(entry)
    if args.pretty:
        header = f"{'id':<17}{'architecture':<20}{'qubits':>7}{'gate_err':>10}" \
                 f"{'latency_ms':>12}{'power_kw':>10}{'carbon_g':>12}"
        print(header)
        print("-" * len(header))
        for row in rows:
            print(f"{row['id']:<17}{row['architecture']:<20}{row['max_qubits']:>7}"
                  f"{row['gate_error']:>10.4f}{row['latency_ms']:>12.0f}"
                  f"{row['power_kw']:>10.1f}{row['impact']['carbon_g']:>12.4f}")
    else:
        print(canonical_dumps({"devices": rows, "region": args.region}))
    return EXIT_OK


def cmd_execute(args) -> int:
    catalog = _load_catalog(args)
    ids = IdSource(args.seed)
    _device, record = _run_entropy_execution(args, catalog, ids)
    _emit(args, record.to_doc())
    return EXIT_OK


def cmd_artifact_generate(args) -> int:
    catalog = _load_catalog(args)
    ids = IdSource(args.seed)
    session_id = ids.uuid()
    device, record = _run_entropy_execution(args, catalog, ids)
    raw = extract_bits(record.measurement, origin=record.execution_id)
    seed256 = condition(raw, device.id, record.execution_id,
                        entropy_class=device.entropy_class)
    keyset = pqsig.keygen(seed256, args.height)
    artifact = pqsig.sign_artifact(session_id, device.id, record, seed256, keyset,
                                   artifact_id=ids.uuid(), created_at=ids.now())
    text = artifact.canonical()
    try:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    except OSError as exc:
        raise StorageError(f"cannot write {args.out}: {exc}") from exc
    _emit(args, artifact.to_doc())
    return EXIT_OK


def cmd_artifact_verify(args) -> int:
    try:
        text = Path(args.file).read_text(encoding="utf-8")
    except OSError as exc:
        raise StorageError(f"cannot read {args.file}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        print(canonical_dumps({"valid": False, "reason": "not a JSON document"}))
        return EXIT_VERIFY
    valid = pqsig.verify_artifact_doc(doc)
    _emit(args, {"valid": valid})
    return EXIT_OK if valid else EXIT_VERIFY


def cmd_ledger_verify(args) -> int:
    import os

    data_dir = args.data_dir or os.environ.get(ENV_DATA_DIR) or \
        load_config(args.config).data_dir
    path = Path(data_dir) / LEDGER_LOG
    if not path.exists():
        raise StorageError(f"no ledger at {path}")
    status = Ledger(path).verify_chain()
    _emit(args, status.to_doc())
    return EXIT_OK if status.ok else EXIT_VERIFY


def cmd_entropy_test(args) -> int:
    catalog = _load_catalog(args)
    ids = IdSource(args.seed)
    _device, record = _run_entropy_execution(args, catalog, ids)
    raw = extract_bits(record.measurement, origin=record.execution_id)
    debiased = von_neumann_debias(raw)
    report = health_check(debiased, n_bits_raw=len(raw))
    _emit(args, report.to_doc())
    return EXIT_OK


def cmd_impact_estimate(args) -> int:
    catalog = _load_catalog(args)
    regions = _load_regions(args)
    device = devices_mod.get_device(catalog, args.device)
    region = impact_mod.get_region(regions, args.region)
    _emit(args, impact_mod.estimate(device, args.duration, region).to_doc())
    return EXIT_OK


# -- parser ---------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="qfi", description="quantum-entropy signature platform")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--pretty", action="store_true", help="human-readable output")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP gateway")
    serve.add_argument("--addr")
    serve.add_argument("--data-dir")
    serve.add_argument("--config")
    serve.set_defaults(func=cmd_serve)

    devices = sub.add_parser("devices", help="device catalog commands")
    devices_sub = devices.add_subparsers(dest="subcommand", required=True)
    devices_list = devices_sub.add_parser("list", help="print catalog with impact columns", parents=[common])
    devices_list.add_argument("--region", default="global-avg")
    devices_list.add_argument("--shots", type=int, default=2048,
                              help="shot count for the duration model")
    devices_list.add_argument("--catalog")
    devices_list.add_argument("--regions")
    devices_list.set_defaults(func=cmd_devices_list)

    execute = sub.add_parser("execute", help="offline execution on one device", parents=[common])
    execute.add_argument("--device", required=True)
    execute.add_argument("--qubits", type=int, default=8)
    execute.add_argument("--shots", type=int, required=True)
    execute.add_argument("--seed", type=int)
    execute.add_argument("--catalog")
    execute.set_defaults(func=cmd_execute)

    artifact = sub.add_parser("artifact", help="artifact generation and verification")
    artifact_sub = artifact.add_subparsers(dest="subcommand", required=True)
    generate = artifact_sub.add_parser("generate", help="full offline pipeline", parents=[common])
    generate.add_argument("--device", required=True)
    generate.add_argument("--qubits", type=int, default=8)
    generate.add_argument("--shots", type=int, required=True)
    generate.add_argument("--height", type=int, default=pqsig.DEFAULT_HEIGHT)
    generate.add_argument("--seed", type=int)
    generate.add_argument("--out", required=True)
    generate.add_argument("--catalog")
    generate.set_defaults(func=cmd_artifact_generate)
    verify = artifact_sub.add_parser("verify", help="verify a stored artifact document", parents=[common])
    verify.add_argument("file")
    verify.set_defaults(func=cmd_artifact_verify)

    ledger = sub.add_parser("ledger", help="provenance chain commands")
    ledger_sub = ledger.add_subparsers(dest="subcommand", required=True)
    ledger_verify = ledger_sub.add_parser("verify", help="verify the hash chain", parents=[common])
    ledger_verify.add_argument("--data-dir")
    ledger_verify.add_argument("--config")
    ledger_verify.set_defaults(func=cmd_ledger_verify)

    entropy = sub.add_parser("entropy", help="entropy pipeline commands")
    entropy_sub = entropy.add_subparsers(dest="subcommand", required=True)
    entropy_test = entropy_sub.add_parser("test", help="run the extractor health checks", parents=[common])
    entropy_test.add_argument("--device", required=True)
    entropy_test.add_argument("--qubits", type=int, default=8)
    entropy_test.add_argument("--shots", type=int, required=True)
    entropy_test.add_argument("--seed", type=int)
    entropy_test.add_argument("--catalog")
    entropy_test.set_defaults(func=cmd_entropy_test)

    impact = sub.add_parser("impact", help="environmental impact commands")
    impact_sub = impact.add_subparsers(dest="subcommand", required=True)
    impact_estimate = impact_sub.add_parser("estimate", help="energy and carbon estimate", parents=[common])
    impact_estimate.add_argument("--device", required=True)
    impact_estimate.add_argument("--duration", type=float, required=True,
                                 help="duration in seconds")
    impact_estimate.add_argument("--region", required=True)
    impact_estimate.add_argument("--catalog")
    impact_estimate.add_argument("--regions")
    impact_estimate.set_defaults(func=cmd_impact_estimate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StorageError as exc:
        print(canonical_dumps({"code": exc.code, "message": exc.message}), file=sys.stderr)
        return EXIT_IO
    except (ConfigurationError, NotFoundError, QfiError) as exc:
        print(canonical_dumps({"code": exc.code, "message": exc.message}), file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(canonical_dumps({"code": "io_error", "message": str(exc)}), file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
