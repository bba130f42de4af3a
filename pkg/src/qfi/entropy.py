"""Measurement bits to conditioned seeds: debiasing, hashing, health checks.

The chain is extract -> von Neumann debias -> SHA-256 condition; seeds expand
into keystreams through counter-mode SHA-256. Simulator-derived entropy is
allowed through the whole chain but stays labeled Computed rather than
Measured.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InsufficientEntropyError, InvalidRequestError, ValidationError
from .qsim import MeasurementRecord

SEED_TAG = b"QFI-SEED-v1"
EXPAND_TAG = b"QFI-EXPAND-v1"

MIN_DEBIASED_BITS = 512   # 2x the seed size, safety margin before conditioning
EXPAND_CAP_BYTES = 2 ** 20
MIN_HEALTH_BITS = 100


class EntropyClass(str, Enum):
    COMPUTED = "computed"   # classical simulator outcomes
    MEASURED = "measured"   # emulated QPU outcomes


@dataclass(frozen=True)
class RawBits:
    """Shot-major bit sequence: bit i*n + j is the j-th character of shot i."""

    bits: np.ndarray
    origin: str

    def __post_init__(self):
        object.__setattr__(self, "bits", np.asarray(self.bits, dtype=np.uint8))
        if self.bits.ndim != 1:
            raise ValidationError("bits must be a flat sequence")

    def __len__(self) -> int:
        return int(self.bits.size)


@dataclass(frozen=True)
class Seed256:
    bytes: bytes
    source_execution: str
    entropy_class: EntropyClass

    def __post_init__(self):
        if len(self.bytes) != 32:
            raise ValidationError("seed must be exactly 32 bytes")


@dataclass(frozen=True)
class EntropyReport:
    n_bits_raw: int
    n_bits_debiased: int
    monobit_statistic: float
    runs_statistic: float
    min_entropy_estimate: float
    passed: bool

    def to_doc(self) -> dict:
        return {
            "n_bits_raw": self.n_bits_raw,
            "n_bits_debiased": self.n_bits_debiased,
            "monobit_statistic": self.monobit_statistic,
            "runs_statistic": self.runs_statistic,
            "min_entropy_estimate": self.min_entropy_estimate,
            "passed": self.passed,
        }


def extract_bits(record: MeasurementRecord, origin: str = "") -> RawBits:
    """Flatten ordered shots into one bit sequence, shot-major."""
    if record.shots == 0 or not record.outcomes:
        raise InsufficientEntropyError("measurement record holds no shots")
    bits = np.frombuffer("".join(record.outcomes).encode("ascii"), dtype=np.uint8) - ord("0")
    return RawBits(bits=bits, origin=origin)


def von_neumann_debias(raw: RawBits | np.ndarray) -> np.ndarray:
    """Map disjoint pairs 01 -> 0, 10 -> 1 and discard 00/11, keeping order."""
    bits = raw.bits if isinstance(raw, RawBits) else np.asarray(raw, dtype=np.uint8)
    even = bits[: bits.size // 2 * 2 : 2]
    odd = bits[1 : bits.size // 2 * 2 : 2]
    return even[even != odd]


def pack_bits_big_endian(bits: np.ndarray) -> bytes:
    return np.packbits(np.asarray(bits, dtype=np.uint8)).tobytes()


def condition(raw: RawBits, device_id: str, execution_id: str,
              entropy_class: EntropyClass = EntropyClass.COMPUTED) -> Seed256:
    """Debias then hash into a 32-byte seed, domain-separated by context."""
    debiased = von_neumann_debias(raw)
    if debiased.size < MIN_DEBIASED_BITS:
        raise InsufficientEntropyError(
            f"{debiased.size} debiased bits < required {MIN_DEBIASED_BITS}; rerun with more shots")
    context = f"{device_id}|{execution_id}".encode("utf-8")
    digest = hashlib.sha256(SEED_TAG + context + pack_bits_big_endian(debiased)).digest()
    return Seed256(bytes=digest, source_execution=execution_id,
                   entropy_class=EntropyClass(entropy_class))


def expand_stream(seed_bytes: bytes, n_bytes: int) -> bytes:
    """Counter-mode SHA-256 keystream; internal, uncapped variant of expand."""
    blocks = []
    for counter in range((n_bytes + 31) // 32):
        blocks.append(hashlib.sha256(
            EXPAND_TAG + seed_bytes + counter.to_bytes(4, "big")).digest())
    return b"".join(blocks)[:n_bytes]


def expand(seed: Seed256, n_bytes: int) -> bytes:
    """Deterministically expand a seed into n_bytes (capped at 1 MiB)."""
    if n_bytes < 1:
        raise InvalidRequestError("n_bytes must be positive")
    if n_bytes > EXPAND_CAP_BYTES:
        raise InvalidRequestError(f"n_bytes {n_bytes} exceeds cap {EXPAND_CAP_BYTES}")
    return expand_stream(seed.bytes, n_bytes)


def health_check(bits: RawBits | np.ndarray, n_bits_raw: int | None = None) -> EntropyReport:
    """Frequency (monobit) and runs statistics with a 3-sigma pass threshold.

    ``n_bits_raw`` reports the pre-debias length when the checked sequence is
    the output of the extractor chain; it defaults to the analyzed length.
    """
    arr = bits.bits if isinstance(bits, RawBits) else np.asarray(bits, dtype=np.uint8)
    n = int(arr.size)
    if n < MIN_HEALTH_BITS:
        raise ValidationError(f"need at least {MIN_HEALTH_BITS} bits, got {n}")

    ones = int(arr.sum())
    zeros = n - ones
    monobit = abs(ones - zeros) / math.sqrt(n)

    pi1 = ones / n
    pi0 = zeros / n
    runs = int(np.count_nonzero(np.diff(arr))) + 1
    expected_runs = 2 * n * pi1 * pi0 + 1
    # Wald-Wolfowitz variance; zero when one symbol is absent, in which case
    # any off-scale value keeps the pass rule consistent.
    variance = (2 * ones * zeros * (2 * ones * zeros - n)) / (n * n * (n - 1)) if ones and zeros else 0.0
    runs_stat = (runs - expected_runs) / math.sqrt(variance) if variance > 0 else float(n)

    min_entropy = -math.log2(max(pi1, pi0)) if 0 < pi1 < 1 else 0.0
    passed = monobit <= 3.0 and abs(runs_stat) <= 3.0
    return EntropyReport(n_bits_raw=n if n_bits_raw is None else n_bits_raw,
                         n_bits_debiased=n, monobit_statistic=monobit,
                         runs_statistic=runs_stat, min_entropy_estimate=min_entropy,
                         passed=passed)
