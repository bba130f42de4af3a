"""Gate-based statevector simulation plus a neutral-atom blockade sampler.

Bit-ordering convention, fixed across the whole package: qubit 0 is the most
significant bit of the amplitude index and the leftmost character of every
outcome bitstring. Reshaping the amplitude vector to ``[2] * n`` therefore
puts qubit q on axis q.

Noise is realized by Monte Carlo trajectories (stochastic Pauli insertion),
never density matrices, so memory stays at one 2^n vector per shot.

Sampling draws from numpy's default generator (PCG64); the 64-bit seed is
recorded in every MeasurementRecord, so identical inputs replay identical
outcomes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import CapacityError, InvalidGateError, ValidationError

MAX_QUBITS = 20          # 2^20 complex128 amplitudes ~= 16 MiB
MAX_ANALOG_ATOMS = 16

_SQ2 = 1.0 / math.sqrt(2.0)

_FIXED_1Q = {
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "S": np.array([[1, 0], [0, 1j]], dtype=complex),
    "T": np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]], dtype=complex),
}

_ROTATIONS = {
    "RX": lambda t: np.array([[math.cos(t / 2), -1j * math.sin(t / 2)],
                              [-1j * math.sin(t / 2), math.cos(t / 2)]], dtype=complex),
    "RY": lambda t: np.array([[math.cos(t / 2), -math.sin(t / 2)],
                              [math.sin(t / 2), math.cos(t / 2)]], dtype=complex),
    "RZ": lambda t: np.array([[np.exp(-1j * t / 2), 0],
                              [0, np.exp(1j * t / 2)]], dtype=complex),
}

GATE_KINDS = frozenset(_FIXED_1Q) | frozenset(_ROTATIONS) | {"CNOT"}


class GateKind(str, Enum):
    H = "H"
    X = "X"
    Y = "Y"
    Z = "Z"
    S = "S"
    T = "T"
    RX = "RX"
    RY = "RY"
    RZ = "RZ"
    CNOT = "CNOT"


@dataclass(frozen=True)
class Gate:
    """One circuit operation. ``angle`` only for RX/RY/RZ, ``control`` only for CNOT."""

    kind: GateKind
    target: int
    angle: float | None = None
    control: int | None = None

    def __post_init__(self):
        kind = GateKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind.value in _ROTATIONS:
            if self.angle is None or not math.isfinite(self.angle):
                raise InvalidGateError(f"{kind.value} requires a finite angle")
        elif self.angle is not None:
            raise InvalidGateError(f"{kind.value} takes no angle")
        if kind is GateKind.CNOT:
            if self.control is None:
                raise InvalidGateError("CNOT requires a control qubit")
            if self.control == self.target:
                raise InvalidGateError("CNOT control and target must differ")
        elif self.control is not None:
            raise InvalidGateError(f"{kind.value} takes no control qubit")
        if self.target < 0 or (self.control is not None and self.control < 0):
            raise InvalidGateError("qubit indices must be nonnegative")

    def matrix(self) -> np.ndarray:
        if self.kind.value in _FIXED_1Q:
            return _FIXED_1Q[self.kind.value]
        return _ROTATIONS[self.kind.value](self.angle)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    ops: tuple[Gate, ...] = ()

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValidationError("circuit needs at least one qubit")
        if self.n_qubits > MAX_QUBITS:
            raise CapacityError(f"{self.n_qubits} qubits exceeds the {MAX_QUBITS}-qubit cap")
        object.__setattr__(self, "ops", tuple(self.ops))
        for gate in self.ops:
            _check_indices(gate, self.n_qubits)


@dataclass(frozen=True)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (2 ** self.n_qubits,):
            raise ValidationError("amplitude count must be exactly 2^n_qubits")
        object.__setattr__(self, "amplitudes", amps)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class NoiseSpec:
    depolarizing_prob: float = 0.0
    readout_flip_prob: float = 0.0

    def __post_init__(self):
        for name in ("depolarizing_prob", "readout_flip_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1], got {p}")

    @property
    def is_zero(self) -> bool:
        return self.depolarizing_prob == 0.0 and self.readout_flip_prob == 0.0


ZERO_NOISE = NoiseSpec()


@dataclass(frozen=True)
class AnalogProgram:
    """Parameters for the blockade sampler; the analog counterpart of a Circuit."""

    n_atoms: int
    excitation_bias: float

    def __post_init__(self):
        if not 1 <= self.n_atoms <= MAX_ANALOG_ATOMS:
            raise CapacityError(f"n_atoms must lie in [1, {MAX_ANALOG_ATOMS}]")
        if not 0.0 < self.excitation_bias < 1.0:
            raise ValidationError("excitation_bias must lie strictly in (0, 1)")


@dataclass(frozen=True)
class MeasurementRecord:
    """Sampled outcomes of one execution.

    ``outcomes`` preserves per-shot order (shot-major, qubit 0 leftmost) so the
    entropy extractor can consume bits in a defined sequence; ``counts`` is
    derived from it.
    """

    n_qubits: int
    shots: int
    seed: int
    outcomes: tuple[str, ...]
    counts: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        if not self.counts:
            counts: dict[str, int] = {}
            for bits in self.outcomes:
                counts[bits] = counts.get(bits, 0) + 1
            object.__setattr__(self, "counts", counts)
        if sum(self.counts.values()) != self.shots or len(self.outcomes) != self.shots:
            raise ValidationError("counts must sum to shots")
        for key in self.counts:
            if len(key) != self.n_qubits or set(key) - {"0", "1"}:
                raise ValidationError(f"malformed outcome key {key!r}")


def _check_indices(gate: Gate, n_qubits: int) -> None:
    if gate.target >= n_qubits:
        raise InvalidGateError(f"target {gate.target} out of range for {n_qubits} qubits")
    if gate.control is not None and gate.control >= n_qubits:
        raise InvalidGateError(f"control {gate.control} out of range for {n_qubits} qubits")


def _apply_1q(amps: np.ndarray, matrix: np.ndarray, qubit: int, n: int) -> np.ndarray:
    tensor = amps.reshape([2] * n)
    tensor = np.moveaxis(tensor, qubit, 0)
    tensor = np.tensordot(matrix, tensor, axes=([1], [0]))
    return np.moveaxis(tensor, 0, qubit).reshape(-1)


def _apply_cnot(amps: np.ndarray, control: int, target: int, n: int) -> np.ndarray:
    tensor = amps.reshape([2] * n).copy()
    sel: list = [slice(None)] * n
    sel[control] = 1
    sel0, sel1 = list(sel), list(sel)
    sel0[target], sel1[target] = 0, 1
    tensor[tuple(sel0)], tensor[tuple(sel1)] = (
        tensor[tuple(sel1)].copy(), tensor[tuple(sel0)].copy())
    return tensor.reshape(-1)


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    """Apply one unitary to the state; norm is preserved to 1e-10."""
    _check_indices(gate, state.n_qubits)
    if gate.kind is GateKind.CNOT:
        amps = _apply_cnot(state.amplitudes, gate.control, gate.target, state.n_qubits)
    else:
        amps = _apply_1q(state.amplitudes, gate.matrix(), gate.target, state.n_qubits)
    return StateVector(state.n_qubits, amps)


def zero_state(n_qubits: int) -> StateVector:
    amps = np.zeros(2 ** n_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


def run_statevector(circuit: Circuit) -> StateVector:
    """Left-fold of apply_gate over the circuit starting from |0...0>."""
    state = zero_state(circuit.n_qubits)
    for gate in circuit.ops:
        state = apply_gate(state, gate)
    return state


def index_to_bits(index: int, n_qubits: int) -> str:
    return format(index, f"0{n_qubits}b")


def _random_pauli(amps: np.ndarray, qubit: int, n: int, rng: np.random.Generator) -> np.ndarray:
    pauli = ("X", "Y", "Z")[rng.integers(3)]
    return _apply_1q(amps, _FIXED_1Q[pauli], qubit, n)


def _apply_readout_flips(indices: np.ndarray, n: int, p: float,
                         rng: np.random.Generator) -> np.ndarray:
    flips = rng.random((indices.shape[0], n)) < p
    if not flips.any():
        return indices
    # qubit q is bit (n-1-q) of the integer index
    masks = (flips.astype(np.int64) << np.arange(n - 1, -1, -1)).sum(axis=1)
    return indices ^ masks


def sample(circuit: Circuit, shots: int, seed: int, noise: NoiseSpec = ZERO_NOISE) -> MeasurementRecord:
    """Sample measurement outcomes; deterministic for fixed (circuit, shots, seed, noise).

    With depolarizing noise each shot is an independent trajectory: after every
    gate a uniformly random Pauli lands on that gate's target with probability
    depolarizing_prob. Readout errors flip each measured bit independently.
    """
    if shots < 1:
        raise ValidationError("shots must be >= 1")
    n = circuit.n_qubits
    rng = np.random.default_rng(np.uint64(seed))

    if noise.depolarizing_prob == 0.0:
        probs = run_statevector(circuit).probabilities()
        probs = probs / probs.sum()
        indices = rng.choice(2 ** n, size=shots, p=probs)
    else:
        indices = np.empty(shots, dtype=np.int64)
        for s in range(shots):
            amps = zero_state(n).amplitudes
            for gate in circuit.ops:
                if gate.kind is GateKind.CNOT:
                    amps = _apply_cnot(amps, gate.control, gate.target, n)
                else:
                    amps = _apply_1q(amps, gate.matrix(), gate.target, n)
                if rng.random() < noise.depolarizing_prob:
                    amps = _random_pauli(amps, gate.target, n, rng)
            probs = np.abs(amps) ** 2
            indices[s] = rng.choice(2 ** n, p=probs / probs.sum())

    if noise.readout_flip_prob > 0.0:
        indices = _apply_readout_flips(np.asarray(indices, dtype=np.int64), n,
                                       noise.readout_flip_prob, rng)

    outcomes = tuple(index_to_bits(int(i), n) for i in indices)
    return MeasurementRecord(n_qubits=n, shots=shots, seed=seed, outcomes=outcomes)


def run_analog_blockade(n_atoms: int, shots: int, seed: int,
                        excitation_bias: float) -> MeasurementRecord:
    """Sample hard-blockade bitstrings on a 1-D chain.

    Left to right, atom i excites with probability excitation_bias unless atom
    i-1 is excited, in which case it is forced to 0, so no sampled string ever
    contains "11".
    """
    program = AnalogProgram(n_atoms=n_atoms, excitation_bias=excitation_bias)
    if shots < 1:
        raise ValidationError("shots must be >= 1")
    rng = np.random.default_rng(np.uint64(seed))
    draws = rng.random((shots, program.n_atoms))
    bits = np.zeros((shots, program.n_atoms), dtype=np.uint8)
    bits[:, 0] = draws[:, 0] < excitation_bias
    for i in range(1, program.n_atoms):
        bits[:, i] = (draws[:, i] < excitation_bias) & (bits[:, i - 1] == 0)
    outcomes = tuple("".join("1" if b else "0" for b in row) for row in bits)
    return MeasurementRecord(n_qubits=program.n_atoms, shots=shots, seed=seed,
                             outcomes=outcomes)
