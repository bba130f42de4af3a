"""Stateful hash-based signatures: Lamport one-time keys under a Merkle tree.

Everything reduces to SHA-256. A keyset of height h carries 2^h Lamport
keypairs; each signature reveals one secret per digest bit (MSB-first within
each byte), embeds the full leaf public key, and proves tree membership with
the sibling path, so verification needs only the 32-byte root. Signing
consumes leaves irreversibly; the used bitmap and next_index enforce the
one-time discipline.

Key material is drawn deterministically from a conditioned seed via the
counter-mode expansion, leaf-major, then bit value, then bit position, 32
bytes per secret.
"""
from __future__ import annotations

import hashlib
import uuid
from dataclasses import dataclass, field
from datetime import datetime

from .canonical import canonical_dumps, rfc3339, utc_now
from .devices import ExecutionRecord, ExecutionStatus
from .entropy import EntropyClass, Seed256, expand_stream
from .errors import (
    InvalidStateError,
    KeyExhaustedError,
    ReuseForbiddenError,
    ValidationError,
)

ID_TAG = b"QFI-ID-v1"
ARTIFACT_TAG = "QFI-ARTIFACT-v1"

MIN_HEIGHT = 1
MAX_HEIGHT = 10
DEFAULT_HEIGHT = 4

_VALUE_BYTES = 32
_DIGEST_BITS = 256
_LEAF_SECRET_BYTES = 2 * _DIGEST_BITS * _VALUE_BYTES  # 16384


def _sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


@dataclass(frozen=True)
class LamportKeypair:
    """One-time keypair; secret and public are the 2x256 values concatenated
    in (bit value, bit position) row-major order, 32 bytes each."""

    secret: bytes
    public: bytes
    pk_digest: bytes

    @classmethod
    def from_secret(cls, secret: bytes) -> "LamportKeypair":
        if len(secret) != _LEAF_SECRET_BYTES:
            raise ValidationError("Lamport secret must be 2*256 values of 32 bytes")
        public = b"".join(_sha256(secret[off:off + _VALUE_BYTES])
                          for off in range(0, _LEAF_SECRET_BYTES, _VALUE_BYTES))
        return cls(secret=secret, public=public, pk_digest=_sha256(public))

    def secret_value(self, bit_value: int, position: int) -> bytes:
        off = (bit_value * _DIGEST_BITS + position) * _VALUE_BYTES
        return self.secret[off:off + _VALUE_BYTES]

    def public_value(self, bit_value: int, position: int) -> bytes:
        off = (bit_value * _DIGEST_BITS + position) * _VALUE_BYTES
        return self.public[off:off + _VALUE_BYTES]


@dataclass
class MerkleLamportKeyset:
    height: int
    leaves: list[LamportKeypair]
    levels: list[list[bytes]]   # levels[0] = leaf digests, levels[h][0] = root
    next_index: int = 0
    used: list[bool] = field(default_factory=list)

    def __post_init__(self):
        if not self.used:
            self.used = [False] * len(self.leaves)

    @property
    def root(self) -> bytes:
        return self.levels[-1][0]

    @property
    def n_leaves(self) -> int:
        return 2 ** self.height

    def remaining(self) -> int:
        return self.used.count(False)


@dataclass(frozen=True)
class PQSignature:
    leaf_index: int
    reveals: tuple[bytes, ...]        # 256 values of 32 bytes
    auth_path: tuple[bytes, ...]      # h sibling hashes bottom-up
    leaf_public: bytes                # full 2x256 public values, row-major

    def to_doc(self) -> dict:
        return {
            "leaf_index": self.leaf_index,
            "reveals": [r.hex() for r in self.reveals],
            "auth_path": [s.hex() for s in self.auth_path],
            "leaf_public": [self.leaf_public[off:off + _VALUE_BYTES].hex()
                            for off in range(0, len(self.leaf_public), _VALUE_BYTES)],
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "PQSignature":
        return cls(leaf_index=int(doc["leaf_index"]),
                   reveals=tuple(bytes.fromhex(r) for r in doc["reveals"]),
                   auth_path=tuple(bytes.fromhex(s) for s in doc["auth_path"]),
                   leaf_public=b"".join(bytes.fromhex(v) for v in doc["leaf_public"]))


@dataclass(frozen=True)
class Artifact:
    artifact_id: str
    quantum_id: str
    public_root: str
    message: str
    signature: PQSignature
    metadata: dict

    def to_doc(self) -> dict:
        return {
            "artifact_id": self.artifact_id,
            "quantum_id": self.quantum_id,
            "public_root": self.public_root,
            "message": self.message,
            "signature": self.signature.to_doc(),
            "metadata": dict(self.metadata),
        }

    def canonical(self) -> str:
        return canonical_dumps(self.to_doc())

    @classmethod
    def from_doc(cls, doc: dict) -> "Artifact":
        return cls(artifact_id=doc["artifact_id"], quantum_id=doc["quantum_id"],
                   public_root=doc["public_root"], message=doc["message"],
                   signature=PQSignature.from_doc(doc["signature"]),
                   metadata=dict(doc["metadata"]))


def keygen(seed: Seed256, height: int = DEFAULT_HEIGHT) -> MerkleLamportKeyset:
    """Derive a full keyset from a seed; pure function of (seed, height)."""
    if not MIN_HEIGHT <= height <= MAX_HEIGHT:
        raise ValidationError(f"height must lie in [{MIN_HEIGHT}, {MAX_HEIGHT}]")
    n_leaves = 2 ** height
    stream = expand_stream(seed.bytes, n_leaves * _LEAF_SECRET_BYTES)
    leaves = [LamportKeypair.from_secret(stream[i * _LEAF_SECRET_BYTES:(i + 1) * _LEAF_SECRET_BYTES])
              for i in range(n_leaves)]
    levels = [[leaf.pk_digest for leaf in leaves]]
    while len(levels[-1]) > 1:
        prev = levels[-1]
        levels.append([_sha256(prev[i] + prev[i + 1]) for i in range(0, len(prev), 2)])
    return MerkleLamportKeyset(height=height, leaves=leaves, levels=levels)


def _digest_bit(digest: bytes, i: int) -> int:
    return (digest[i // 8] >> (7 - i % 8)) & 1


def sign(keyset: MerkleLamportKeyset, message: bytes,
         leaf_index: int | None = None) -> PQSignature:
    """Sign with the next free leaf (or an explicit one) and consume it.

    Mutates the keyset: the chosen leaf is marked used and next_index advances.
    Callers must serialize sign calls per keyset.
    """
    if leaf_index is None:
        if keyset.next_index >= keyset.n_leaves:
            raise KeyExhaustedError(f"all {keyset.n_leaves} one-time leaves are consumed")
        leaf_index = keyset.next_index
    elif not 0 <= leaf_index < keyset.n_leaves:
        raise ValidationError(f"leaf index {leaf_index} out of range")
    if keyset.used[leaf_index]:
        raise ReuseForbiddenError(f"leaf {leaf_index} was already used; one-time keys never repeat")

    digest = _sha256(message)
    leaf = keyset.leaves[leaf_index]
    reveals = tuple(leaf.secret_value(_digest_bit(digest, i), i) for i in range(_DIGEST_BITS))
    auth_path = tuple(keyset.levels[level][(leaf_index >> level) ^ 1]
                      for level in range(keyset.height))

    keyset.used[leaf_index] = True
    while keyset.next_index < keyset.n_leaves and keyset.used[keyset.next_index]:
        keyset.next_index += 1
    return PQSignature(leaf_index=leaf_index, reveals=reveals,
                       auth_path=auth_path, leaf_public=leaf.public)


def verify(root: bytes, message: bytes, sig: PQSignature) -> bool:
    """True iff the reveals match the leaf publics and the leaf hashes to root.

    Structural defects return False, never raise.
    """
    if len(root) != _VALUE_BYTES:
        return False
    if len(sig.reveals) != _DIGEST_BITS or len(sig.leaf_public) != _LEAF_SECRET_BYTES:
        return False
    if any(len(r) != _VALUE_BYTES for r in sig.reveals):
        return False
    if any(len(s) != _VALUE_BYTES for s in sig.auth_path):
        return False
    if not 0 <= sig.leaf_index < 2 ** len(sig.auth_path):
        return False

    digest = _sha256(message)
    for i in range(_DIGEST_BITS):
        bit = _digest_bit(digest, i)
        off = (bit * _DIGEST_BITS + i) * _VALUE_BYTES
        if _sha256(sig.reveals[i]) != sig.leaf_public[off:off + _VALUE_BYTES]:
            return False

    node = _sha256(sig.leaf_public)
    index = sig.leaf_index
    for sibling in sig.auth_path:
        node = _sha256(node + sibling) if index & 1 == 0 else _sha256(sibling + node)
        index >>= 1
    return node == root


def derive_quantum_id(root: bytes, seed: Seed256, device_id: str) -> str:
    """16-byte identifier binding key material, entropy seed, and device."""
    digest = _sha256(ID_TAG + root + seed.bytes + device_id.encode("utf-8"))
    return digest[:16].hex()


def artifact_message(session_id: str, device_id: str, execution_id: str,
                     quantum_id: str) -> str:
    return (f"{ARTIFACT_TAG}|session={session_id}|device={device_id}"
            f"|execution={execution_id}|quantum_id={quantum_id}")


def sign_artifact(session_id: str, device_id: str, execution: ExecutionRecord,
                  seed: Seed256, keyset: MerkleLamportKeyset, *,
                  artifact_id: str | None = None,
                  created_at: datetime | None = None) -> Artifact:
    """Assemble and sign the canonical statement for one completed execution."""
    if ExecutionStatus(execution.status) is not ExecutionStatus.COMPLETED:
        raise InvalidStateError(
            f"execution {execution.execution_id} is {execution.status}, not COMPLETED")
    quantum_id = derive_quantum_id(keyset.root, seed, device_id)
    message = artifact_message(session_id, device_id, execution.execution_id, quantum_id)
    signature = sign(keyset, message.encode("utf-8"))
    metadata = {
        "backend": "local-emulation",
        "device_id": device_id,
        "execution_id": execution.execution_id,
        "shots": execution.shots,
        "seed": execution.seed,
        "entropy_class": EntropyClass(seed.entropy_class).value,
        "status": ExecutionStatus(execution.status).value,
        "created_at": rfc3339(created_at if created_at is not None else utc_now()),
    }
    artifact = Artifact(artifact_id=artifact_id or str(uuid.uuid4()),
                        quantum_id=quantum_id, public_root=keyset.root.hex(),
                        message=message, signature=signature, metadata=metadata)
    assert verify_artifact(artifact), "freshly signed artifact failed verification"
    return artifact


def verify_artifact(artifact: Artifact) -> bool:
    try:
        root = bytes.fromhex(artifact.public_root)
    except ValueError:
        return False
    return verify(root, artifact.message.encode("utf-8"), artifact.signature)


def verify_artifact_doc(doc: dict) -> bool:
    """Verify a parsed canonical artifact document; malformed docs are False."""
    try:
        artifact = Artifact.from_doc(doc)
    except (KeyError, TypeError, ValueError):
        return False
    return verify_artifact(artifact)
