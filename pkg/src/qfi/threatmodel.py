"""Registry of cryptographic primitives and their quantum-adversary security.

Shor-vulnerable schemes drop to zero effective bits; Grover halves symmetric
and hash strengths. Status is stored per entry rather than derived from a bit
threshold because two primitives can halve identically yet warrant different
classifications (a weakened hash vs. a still-comfortable cipher margin).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import ValidationError


class PrimitiveCategory(str, Enum):
    SIGNATURE = "Signature"
    KEY_EXCHANGE = "KeyExchange"
    HASH = "Hash"
    SYMMETRIC_CIPHER = "SymmetricCipher"


class QuantumAttack(str, Enum):
    SHOR = "Shor"
    GROVER = "Grover"
    NONE = "None"


class PrimitiveStatus(str, Enum):
    BROKEN = "Broken"
    WEAKENED = "Weakened"
    SECURE = "Secure"


@dataclass(frozen=True)
class PrimitiveProfile:
    name: str
    category: PrimitiveCategory
    classical_bits: int
    quantum_attack: QuantumAttack
    quantum_bits: int
    status: PrimitiveStatus
    note: str

    def __post_init__(self):
        if self.quantum_attack is QuantumAttack.SHOR:
            if self.quantum_bits != 0 or self.status is not PrimitiveStatus.BROKEN:
                raise ValidationError(f"{self.name}: Shor-vulnerable entries are broken at 0 bits")
        if self.quantum_attack is QuantumAttack.GROVER and self.quantum_bits * 2 != self.classical_bits:
            raise ValidationError(f"{self.name}: Grover halves effective bits")

    def to_doc(self) -> dict:
        return {
            "name": self.name,
            "category": self.category.value,
            "classical_bits": self.classical_bits,
            "quantum_attack": self.quantum_attack.value,
            "quantum_bits": self.quantum_bits,
            "status": self.status.value,
            "note": self.note,
        }


_REGISTRY = (
    PrimitiveProfile(
        name="ECDSA-256",
        category=PrimitiveCategory.SIGNATURE,
        classical_bits=128,
        quantum_attack=QuantumAttack.SHOR,
        quantum_bits=0,
        status=PrimitiveStatus.BROKEN,
        note="vulnerable once public keys are exposed; a discrete-log solver recovers the private key",
    ),
    PrimitiveProfile(
        name="RSA-2048",
        category=PrimitiveCategory.SIGNATURE,
        classical_bits=112,
        quantum_attack=QuantumAttack.SHOR,
        quantum_bits=0,
        status=PrimitiveStatus.BROKEN,
        note="efficient integer factorization achievable under fault-tolerant quantum computation",
    ),
    PrimitiveProfile(
        name="DH-2048",
        category=PrimitiveCategory.KEY_EXCHANGE,
        classical_bits=112,
        quantum_attack=QuantumAttack.SHOR,
        quantum_bits=0,
        status=PrimitiveStatus.BROKEN,
        note="loses forward secrecy against adversaries able to solve discrete logarithms",
    ),
    PrimitiveProfile(
        name="SHA-256",
        category=PrimitiveCategory.HASH,
        classical_bits=256,
        quantum_attack=QuantumAttack.GROVER,
        quantum_bits=128,
        status=PrimitiveStatus.WEAKENED,
        note="quadratic search speedup reduces effective preimage security strength",
    ),
    PrimitiveProfile(
        name="AES-256",
        category=PrimitiveCategory.SYMMETRIC_CIPHER,
        classical_bits=256,
        quantum_attack=QuantumAttack.GROVER,
        quantum_bits=128,
        status=PrimitiveStatus.SECURE,
        note="retains adequate security margins; key strength halves but the construction stands",
    ),
)


def vulnerability_index() -> list[PrimitiveProfile]:
    """The shipped registry, ECDSA/RSA/DH broken, SHA-256 weakened, AES-256 secure."""
    return list(_REGISTRY)


def effective_security(profile: PrimitiveProfile) -> int:
    """Post-quantum effective bits: 0 under Shor, half under Grover, else unchanged."""
    if profile.quantum_attack is QuantumAttack.SHOR:
        return 0
    if profile.quantum_attack is QuantumAttack.GROVER:
        return profile.classical_bits // 2
    return profile.classical_bits
