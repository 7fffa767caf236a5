"""Dense statevector simulation of physical qubits.

Conventions, fixed across the package:

- wire 0 is the most significant bit of the amplitude index, so
  ``|w0 w1 ... w_{n-1}>`` reads left to right;
- angles are Octants: the integer k stands for k*pi/4, arithmetic mod 8;
- gates mutate the state in place and return it;
- every probabilistic operation takes an explicit ``numpy.random.Generator``.

Measuring along an angle delta means: rotate by Rz(-delta), apply H, then
measure in the computational basis; outcome 0 corresponds to the axis state
(|0> + e^{i delta}|1>)/sqrt(2).
"""
from __future__ import annotations

import dataclasses
import math
from typing import Iterable

import numpy as np

from bqcsim import kernels

QUBIT_CAP = 24

_SQRT_HALF = math.sqrt(0.5)

# e^{i k pi/4} for k = 0..7, exact at the axis points
OCTANT_PHASE = (
    1 + 0j,
    complex(_SQRT_HALF, _SQRT_HALF),
    1j,
    complex(-_SQRT_HALF, _SQRT_HALF),
    -1 + 0j,
    complex(-_SQRT_HALF, -_SQRT_HALF),
    -1j,
    complex(_SQRT_HALF, -_SQRT_HALF),
)


class ResourceLimitError(Exception):
    """Requested simulation exceeds the configured qubit cap."""


class Octant(int):
    """Angle k*pi/4 as an integer k, reduced mod 8 and closed under +/-."""

    def __new__(cls, k: int) -> "Octant":
        return super().__new__(cls, int(k) % 8)

    def __add__(self, other: int) -> "Octant":
        return Octant(int(self) + int(other))

    __radd__ = __add__

    def __sub__(self, other: int) -> "Octant":
        return Octant(int(self) - int(other))

    def __rsub__(self, other: int) -> "Octant":
        return Octant(int(other) - int(self))

    def __neg__(self) -> "Octant":
        return Octant(-int(self))

    @property
    def radians(self) -> float:
        return int(self) * math.pi / 4


GATE_ARITY = {
    "I": 1, "H": 1, "X": 1, "Z": 1, "S": 1, "SDG": 1, "T": 1, "TDG": 1,
    "RZ": 1, "CNOT": 2, "CZ": 2, "CPHASE": 2, "SWAP": 2, "TOFFOLI": 3,
}


@dataclasses.dataclass(frozen=True)
class Gate:
    """One physical gate: a kind from GATE_ARITY, target wires, and for RZ
    the octant angle."""

    kind: str
    wires: tuple[int, ...]
    octant: Octant | None = None

    def __post_init__(self) -> None:
        kind = self.kind.upper()
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "wires", tuple(int(w) for w in self.wires))
        if kind not in GATE_ARITY:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.wires) != GATE_ARITY[kind]:
            raise ValueError(f"{kind} takes {GATE_ARITY[kind]} wires, got {self.wires}")
        if len(set(self.wires)) != len(self.wires):
            raise ValueError(f"{kind} wires must be distinct, got {self.wires}")
        if kind == "RZ":
            if self.octant is None:
                raise ValueError("RZ needs an octant")
            object.__setattr__(self, "octant", Octant(self.octant))
        elif self.octant is not None:
            raise ValueError(f"{kind} takes no octant")


class StateVector:
    """Dense state of ``num_qubits`` wires; wire 0 is the most significant bit."""

    __slots__ = ("num_qubits", "amps")

    def __init__(self, num_qubits: int, cap: int = QUBIT_CAP):
        if num_qubits < 1 or num_qubits > cap:
            raise ResourceLimitError(
                f"{num_qubits} qubits outside supported range 1..{cap}")
        self.num_qubits = num_qubits
        self.amps = np.zeros(1 << num_qubits, dtype=np.complex128)
        self.amps[0] = 1.0

    def bit(self, wire: int) -> int:
        if not 0 <= wire < self.num_qubits:
            raise IndexError(f"wire {wire} out of range 0..{self.num_qubits - 1}")
        return self.num_qubits - 1 - wire

    def copy(self) -> "StateVector":
        other = StateVector.__new__(StateVector)
        other.num_qubits = self.num_qubits
        other.amps = self.amps.copy()
        return other

    def norm_sq(self) -> float:
        return kernels.sumsq(self.amps)

    def __repr__(self) -> str:
        return f"StateVector(num_qubits={self.num_qubits})"


def new_state(num_qubits: int, cap: int = QUBIT_CAP) -> StateVector:
    """All-zeros register |0...0>; refuses more than ``cap`` qubits."""
    return StateVector(num_qubits, cap=cap)


class OpCounter:
    """Tally of applied physical operations, in the ledger's four categories.

    RZ(k) is booked as its octant word: one T letter when k is odd, plus one
    one-qubit Clifford letter when k >= 2.
    """

    __slots__ = ("t_gates", "two_qubit", "one_qubit", "measurements")

    def __init__(self) -> None:
        self.t_gates = 0
        self.two_qubit = 0
        self.one_qubit = 0
        self.measurements = 0

    def record_gate(self, kind: str, octant: int | None = None) -> None:
        if kind in ("T", "TDG"):
            self.t_gates += 1
        elif kind in ("H", "X", "Y", "Z", "S", "SDG"):
            self.one_qubit += 1
        elif kind in ("CNOT", "CZ", "CPHASE", "SWAP"):
            self.two_qubit += 1
        elif kind == "RZ":
            k = int(octant or 0) % 8
            if k % 2:
                self.t_gates += 1
            if k >= 2:
                self.one_qubit += 1
        elif kind == "I":
            pass
        else:
            raise ValueError(f"no tally category for {kind!r}")

    def record_measurement(self) -> None:
        self.measurements += 1

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.t_gates, self.two_qubit, self.one_qubit, self.measurements)

    def __repr__(self) -> str:
        return ("OpCounter(t=%d, two_qubit=%d, one_qubit=%d, measurements=%d)"
                % self.as_tuple())


_DIAG_1Q = {
    "I": (1 + 0j, 1 + 0j),
    "Z": (1 + 0j, -1 + 0j),
    "S": (1 + 0j, 1j),
    "SDG": (1 + 0j, -1j),
    "T": (1 + 0j, OCTANT_PHASE[1]),
    "TDG": (1 + 0j, OCTANT_PHASE[7]),
}


def apply_gate(state: StateVector, gate: Gate,
               counter: OpCounter | None = None) -> StateVector:
    """Apply one gate in place; optionally book it on ``counter``."""
    kind = gate.kind
    w = gate.wires
    a = state.amps
    if kind in _DIAG_1Q:
        if kind != "I":
            p0, p1 = _DIAG_1Q[kind]
            kernels.apply_diag(a, state.bit(w[0]), p0, p1)
    elif kind == "RZ":
        kernels.apply_diag(a, state.bit(w[0]), 1 + 0j,
                           OCTANT_PHASE[int(gate.octant)])
    elif kind == "H":
        kernels.apply_1q(a, state.bit(w[0]), _SQRT_HALF, _SQRT_HALF,
                         _SQRT_HALF, -_SQRT_HALF)
    elif kind == "X":
        kernels.apply_1q(a, state.bit(w[0]), 0j, 1 + 0j, 1 + 0j, 0j)
    elif kind == "CNOT":
        kernels.apply_cnot(a, state.bit(w[0]), state.bit(w[1]))
    elif kind == "CZ":
        kernels.apply_cphase(a, state.bit(w[0]), state.bit(w[1]), -1 + 0j)
    elif kind == "CPHASE":
        kernels.apply_cphase(a, state.bit(w[0]), state.bit(w[1]), 1j)
    elif kind == "SWAP":
        kernels.apply_swap(a, state.bit(w[0]), state.bit(w[1]))
    else:  # TOFFOLI; Gate validation rejects everything else
        kernels.apply_toffoli(a, state.bit(w[0]), state.bit(w[1]),
                              state.bit(w[2]))
    if counter is not None:
        counter.record_gate(kind, gate.octant)
    return state


def measure_z(state: StateVector, wire: int, rng: np.random.Generator,
              counter: OpCounter | None = None) -> int:
    """Projective computational-basis measurement; collapses and renormalizes."""
    b = state.bit(wire)
    p1 = kernels.prob_one(state.amps, b)
    outcome = 1 if rng.random() < p1 else 0
    p = p1 if outcome else 1.0 - p1
    kernels.collapse(state.amps, b, outcome, 1.0 / math.sqrt(p))
    if counter is not None:
        counter.record_measurement()
    return outcome


def measure_in_angle_basis(state: StateVector, wire: int, delta: int,
                           rng: np.random.Generator,
                           counter: OpCounter | None = None) -> int:
    """Measure along angle delta: Rz(-delta), H, then measure_z.

    Outcome 0 projects onto (|0> + e^{i delta}|1>)/sqrt(2).
    """
    d = Octant(delta)
    apply_gate(state, Gate("RZ", (wire,), octant=-d), counter)
    apply_gate(state, Gate("H", (wire,)), counter)
    return measure_z(state, wire, rng, counter)


def inject_pauli(state: StateVector, wire: int, pauli: str,
                 counter: OpCounter | None = None) -> StateVector:
    """Deterministically apply X, Y, or Z; Y is realized as X after Z (phase i
    dropped)."""
    p = pauli.upper()
    if p == "X":
        apply_gate(state, Gate("X", (wire,)), counter)
    elif p == "Z":
        apply_gate(state, Gate("Z", (wire,)), counter)
    elif p == "Y":
        apply_gate(state, Gate("Z", (wire,)))
        apply_gate(state, Gate("X", (wire,)))
        if counter is not None:
            counter.record_gate("Y")
    else:
        raise ValueError(f"pauli must be X, Y or Z, got {pauli!r}")
    return state


def sample_pauli(rng: np.random.Generator) -> str:
    return "XYZ"[int(rng.integers(3))]


def depolarize(state: StateVector, wire: int, p: float,
               rng: np.random.Generator) -> str | None:
    """With probability p inject a uniformly chosen Pauli on ``wire``.

    Mutates in place; returns the injected letter, or None, so channels can
    log what actually happened.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing probability {p} outside [0, 1]")
    if p > 0.0 and rng.random() < p:
        letter = sample_pauli(rng)
        inject_pauli(state, wire, letter)
        return letter
    return None


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2; insensitive to global phase."""
    if a.num_qubits != b.num_qubits:
        raise ValueError("states have different wire counts")
    return abs(np.vdot(a.amps, b.amps)) ** 2


def dump_state(state: StateVector, cutoff: float = 1e-12) -> list[tuple[int, float, float]]:
    """(index, re, im) for every amplitude above ``cutoff``, sorted by index."""
    out = []
    for idx in np.nonzero(np.abs(state.amps) > cutoff)[0]:
        amp = state.amps[idx]
        out.append((int(idx), float(amp.real), float(amp.imag)))
    return out


def random_state(num_qubits: int, rng: np.random.Generator) -> StateVector:
    """Haar-ish random test state: complex normal amplitudes, normalized."""
    st = new_state(num_qubits)
    amps = rng.normal(size=1 << num_qubits) + 1j * rng.normal(size=1 << num_qubits)
    st.amps = (amps / np.linalg.norm(amps)).astype(np.complex128)
    return st


def set_amplitudes(state: StateVector, amps: Iterable[complex]) -> StateVector:
    """Overwrite the amplitude array (length must match); renormalizes."""
    arr = np.asarray(list(amps) if not isinstance(amps, np.ndarray) else amps,
                     dtype=np.complex128)
    if arr.shape != state.amps.shape:
        raise ValueError("amplitude array has wrong length")
    n = np.linalg.norm(arr)
    if n == 0:
        raise ValueError("zero vector")
    state.amps = arr / n
    return state
