"""Seven-qubit code machinery: stabilizers, verified cat states, fault-
tolerant operator measurement, logical preparation, transversal gates, magic
states, the teleported T gate, and syndrome extraction with correction.

Conventions:

- block positions are 1..7; ``CodeBlock.wires[i-1]`` is position i;
- X_L = X on all seven, Z_L = Z on all seven; transversal S implements the
  logical S-dagger, so S_L is realized by seven physical S-daggers;
- an operator of weight k is measured through a verified k-qubit cat state:
  prepare (H + k-1 CNOTs), verify end-to-end parity into a check qubit,
  couple control-wise into the data, uncompute, H, and read one bit;
  outcome 0 is the +1 eigenvalue.  Three repetitions are majority-voted,
  with at most three cat attempts per repetition.  A measured-out ancilla
  is reinitialized to |0> before reuse; reinitialization is passive state
  preparation and is never billed as a gate;
- the non-Clifford resource M = e^{-i pi/4} (S X)_L is measured the same
  way; per coupled position the controlled operator is CNOT, CZ, CPHASE
  (the last two forming the controlled S-dagger) plus a T on the cat wire,
  the seven Ts supplying the e^{-i pi/4} branch phase.
"""
from __future__ import annotations

import dataclasses
from typing import Callable, Sequence

import numpy as np

from bqcsim import simcore as sc
from bqcsim.simcore import Gate, Octant, OpCounter, StateVector

STABILIZER_WORDS: dict[str, str] = {
    "K1": "IIIXXXX",
    "K2": "XIXIXIX",
    "K3": "IXXIIXX",
    "K4": "IIIZZZZ",
    "K5": "ZIZIZIZ",
    "K6": "IZZIIZZ",
}

X_LOGICAL = "XXXXXXX"
Z_LOGICAL = "ZZZZZZZ"

# octant k -> logical phase word, rightmost gate applied first
OCTANT_WORDS: dict[int, tuple[str, ...]] = {
    0: (), 1: ("T",), 2: ("S",), 3: ("T", "S"), 4: ("Z",),
    5: ("T", "Z"), 6: ("SDG",), 7: ("T", "SDG"),
}


class FaultEscalationError(Exception):
    """Cat verification failed three times in a row."""


@dataclasses.dataclass(frozen=True)
class CodeBlock:
    """Seven physical wires holding one logical qubit."""

    wires: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.wires) != 7 or len(set(self.wires)) != 7:
            raise ValueError("a code block is exactly seven distinct wires")

    def wire(self, position: int) -> int:
        if not 1 <= position <= 7:
            raise ValueError("positions run 1..7")
        return self.wires[position - 1]


@dataclasses.dataclass(frozen=True)
class Stabilizer:
    name: str
    word: str

    @property
    def kind(self) -> str:
        letters = set(self.word) - {"I"}
        if len(letters) != 1:
            raise ValueError(f"{self.name} mixes letters")
        return letters.pop()

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, ch in enumerate(self.word, start=1) if ch != "I")


STABILIZERS: dict[str, Stabilizer] = {
    name: Stabilizer(name, word) for name, word in STABILIZER_WORDS.items()}

_X_NAMES = ("K1", "K2", "K3")
_Z_NAMES = ("K4", "K5", "K6")


def _build_decode_table(names: tuple[str, str, str]) -> dict[tuple[int, int, int], int | None]:
    supports = [set(STABILIZERS[n].support) for n in names]
    table: dict[tuple[int, int, int], int | None] = {(0, 0, 0): None}
    for pos in range(1, 8):
        key = tuple(int(pos in s) for s in supports)
        if key in table:
            raise ValueError("degenerate syndrome table")
        table[key] = pos  # type: ignore[index]
    return table  # type: ignore[return-value]


# identical for both halves of this code, but generated, not assumed
X_SYNDROME_TABLE = _build_decode_table(_X_NAMES)
Z_SYNDROME_TABLE = _build_decode_table(_Z_NAMES)


@dataclasses.dataclass
class Syndrome:
    """Majority-voted stabilizer bits and the corrections they triggered."""

    x_bits: tuple[int, int, int]
    z_bits: tuple[int, int, int]
    z_correction: int | None
    x_correction: int | None
    uncorrectable: bool


FaultHook = Callable[[int, int, str, StateVector, Sequence[int], int], None]


@dataclasses.dataclass
class _Ctx:
    state: StateVector
    rng: np.random.Generator
    counter: OpCounter | None

    def g(self, kind: str, *wires: int, octant: Octant | None = None) -> None:
        sc.apply_gate(self.state, Gate(kind, wires, octant=octant), self.counter)

    def m(self, wire: int) -> int:
        return sc.measure_z(self.state, wire, self.rng, self.counter)


def prepare_cat(state: StateVector, cat_wires: Sequence[int], verify_wire: int,
                rng: np.random.Generator, counter: OpCounter | None = None,
                ) -> int:
    """Chain-build |0..0>+|1..1> on ``cat_wires`` and check end-to-end parity
    into ``verify_wire``; returns the check outcome (0 = accepted).

    Precondition: all named wires are |0>.
    """
    ctx = _Ctx(state, rng, counter)
    return _prepare_cat(ctx, list(cat_wires), verify_wire)


def _prepare_cat(ctx: _Ctx, cat: list[int], verify: int) -> int:
    ctx.g("H", cat[0])
    for a, b in zip(cat, cat[1:]):
        ctx.g("CNOT", a, b)
    ctx.g("CNOT", cat[0], verify)
    ctx.g("CNOT", cat[-1], verify)
    return ctx.m(verify)


def _reinit(ctx: _Ctx, wires: Sequence[int]) -> None:
    # discard-and-replace with fresh |0>; unbilled, see module docstring
    for w in wires:
        if sc.measure_z(ctx.state, w, ctx.rng, None):
            sc.apply_gate(ctx.state, Gate("X", (w,)), None)


def _couple_pauli_word(ctx: _Ctx, block: CodeBlock, word: str,
                       cat: list[int]) -> None:
    j = 0
    for pos, ch in enumerate(word, start=1):
        if ch == "I":
            continue
        if ch == "X":
            ctx.g("CNOT", cat[j], block.wire(pos))
        elif ch == "Z":
            ctx.g("CZ", cat[j], block.wire(pos))
        else:
            raise ValueError(f"cannot couple letter {ch!r}")
        j += 1


def _couple_magic(ctx: _Ctx, block: CodeBlock, cat: list[int]) -> None:
    # controlled (S-dagger X) per position: CNOT then CZ,CPHASE; the T on the
    # cat wire contributes the branch phase, e^{i 7 pi/4} = e^{-i pi/4}
    for j in range(7):
        ctx.g("CNOT", cat[j], block.wire(j + 1))
        ctx.g("CZ", cat[j], block.wire(j + 1))
        ctx.g("CPHASE", cat[j], block.wire(j + 1))
        ctx.g("T", cat[j])


def _cat_measure_once(ctx: _Ctx, block: CodeBlock, word: str,
                      cat_wires: Sequence[int], verify_wire: int,
                      rep: int, fault_hook: FaultHook | None) -> int:
    weight = 7 if word == "MAGIC" else sum(ch != "I" for ch in word)
    if len(cat_wires) < weight:
        raise sc.ResourceLimitError(
            f"weight-{weight} operator needs {weight} cat wires, "
            f"have {len(cat_wires)}")
    cat = list(cat_wires[:weight])
    for attempt in range(3):
        ctx.g("H", cat[0])
        for a, b in zip(cat, cat[1:]):
            ctx.g("CNOT", a, b)
        if fault_hook is not None:
            fault_hook(rep, attempt, "pre_verify", ctx.state, cat, verify_wire)
        ctx.g("CNOT", cat[0], verify_wire)
        ctx.g("CNOT", cat[-1], verify_wire)
        if ctx.m(verify_wire) == 0:
            break
        _reinit(ctx, cat + [verify_wire])
    else:
        raise FaultEscalationError(
            f"cat verification failed three times (word {word}, rep {rep})")
    if word == "MAGIC":
        _couple_magic(ctx, block, cat)
    else:
        _couple_pauli_word(ctx, block, word, cat)
    if fault_hook is not None:
        fault_hook(rep, 0, "post_couple", ctx.state, cat, verify_wire)
    for a, b in reversed(list(zip(cat, cat[1:]))):
        ctx.g("CNOT", a, b)
    ctx.g("H", cat[0])
    bit = ctx.m(cat[0])
    # discard the used cat; under faults the unmeasured wires can be dirty
    _reinit(ctx, cat)
    return bit


def _majority(bits: Sequence[int]) -> int:
    return 1 if sum(bits) * 2 > len(bits) else 0


def ft_measure_operator(state: StateVector, block: CodeBlock, operator,
                        cat_wires: Sequence[int], verify_wire: int,
                        rng: np.random.Generator,
                        counter: OpCounter | None = None,
                        repetitions: int = 3,
                        fault_hook: FaultHook | None = None) -> int:
    """Measure a multi-qubit operator through verified cats, majority-voted
    over ``repetitions`` runs; returns 0 for the +1 eigenvalue.

    ``operator`` is a Stabilizer, a 7-letter I/X/Z word, or "MAGIC".
    Nondestructive on the codespace.
    """
    word = operator.word if isinstance(operator, Stabilizer) else str(operator)
    ctx = _Ctx(state, rng, counter)
    bits = [_cat_measure_once(ctx, block, word, cat_wires, verify_wire,
                              rep, fault_hook)
            for rep in range(repetitions)]
    return _majority(bits)


@dataclasses.dataclass
class PreparationRecord:
    stabilizer_bits: tuple[int, int, int]
    correction_position: int | None


def prepare_logical_zero(state: StateVector, block: CodeBlock,
                         cat_wires: Sequence[int], verify_wire: int,
                         rng: np.random.Generator,
                         counter: OpCounter | None = None,
                         fault_hook: FaultHook | None = None
                         ) -> PreparationRecord:
    """From |0000000> on the block, measure K1..K3 fault-tolerantly and fix
    the random signs with at most one Z."""
    bits = tuple(
        ft_measure_operator(state, block, STABILIZERS[name], cat_wires,
                            verify_wire, rng, counter, fault_hook=fault_hook)
        for name in _X_NAMES)
    pos = X_SYNDROME_TABLE[bits]  # type: ignore[index]
    if pos is not None:
        sc.apply_gate(state, Gate("Z", (block.wire(pos),)), counter)
    return PreparationRecord(bits, pos)  # type: ignore[arg-type]


_TRANSVERSAL_1Q = {"H": "H", "X": "X", "Z": "Z", "S": "SDG", "SDG": "S"}


def transversal_gate(state: StateVector, blocks, kind: str,
                     counter: OpCounter | None = None) -> None:
    """Apply a logical Clifford transversally.  ``kind`` names the logical
    gate; for S/SDG the physical per-position gate is the adjoint."""
    k = kind.upper()
    if isinstance(blocks, CodeBlock):
        blocks = (blocks,)
    if k in _TRANSVERSAL_1Q:
        (block,) = blocks
        for w in block.wires:
            sc.apply_gate(state, Gate(_TRANSVERSAL_1Q[k], (w,)), counter)
    elif k in ("CNOT", "CZ"):
        a, b = blocks
        for wa, wb in zip(a.wires, b.wires):
            sc.apply_gate(state, Gate(k, (wa, wb)), counter)
    else:
        raise ValueError(f"{kind!r} is not transversal here")


def prepare_magic(state: StateVector, block: CodeBlock,
                  cat_wires: Sequence[int], verify_wire: int,
                  rng: np.random.Generator, counter: OpCounter | None = None,
                  fault_hook: FaultHook | None = None) -> int:
    """Project |0>_L onto the +1 eigenstate of e^{-i pi/4}(SX)_L, fixing the
    -1 branch with Z_L; leaves (|0> + e^{i pi/4}|1>)_L / sqrt(2).

    Returns the majority bit before the fix.
    """
    bit = ft_measure_operator(state, block, "MAGIC", cat_wires, verify_wire,
                              rng, counter, fault_hook=fault_hook)
    if bit:
        transversal_gate(state, block, "Z", counter)
    return bit


def _hamming_correct(word: list[int]) -> list[int]:
    checks = tuple(
        sum(word[p - 1] for p in STABILIZERS[n].support) % 2 for n in _X_NAMES)
    pos = X_SYNDROME_TABLE[checks]  # type: ignore[index]
    if pos is not None:
        word = list(word)
        word[pos - 1] ^= 1
    return word


def ft_meas_z(state: StateVector, block: CodeBlock,
              cat_wires: Sequence[int], verify_wire: int,
              rng: np.random.Generator, counter: OpCounter | None = None,
              fault_hook: FaultHook | None = None) -> int:
    """Destructive logical Z measurement: two cat-based Z_L repetitions plus
    one transversal readout (seven bits, classically corrected, parity),
    majority of the three.

    Assumes the block enters error-free; run extract_and_correct first when
    that is in doubt.  A single fault during the gadget cannot flip the
    majority: a corrupted repetition is outvoted, and an error it leaves on
    the data is absorbed by the corrected transversal readout."""
    ctx = _Ctx(state, rng, counter)
    bits = [_cat_measure_once(ctx, block, Z_LOGICAL, cat_wires, verify_wire,
                              rep, fault_hook) for rep in range(2)]
    raw = [ctx.m(w) for w in block.wires]
    bits.append(sum(_hamming_correct(raw)) % 2)
    return _majority(bits)


def ft_t_gate(state: StateVector, data_block: CodeBlock,
              magic_block: CodeBlock, cat_wires: Sequence[int],
              verify_wire: int, rng: np.random.Generator,
              counter: OpCounter | None = None) -> tuple[CodeBlock, int]:
    """Teleported logical T: CNOT_L from the magic block into the data
    block, destructively measure the data block, and on outcome 1 fix the
    magic block with (SX)_L.  The logical qubit now lives in the magic
    block; the data wires are left collapsed."""
    transversal_gate(state, (magic_block, data_block), "CNOT", counter)
    bit = ft_meas_z(state, data_block, cat_wires, verify_wire, rng, counter)
    if bit:
        transversal_gate(state, magic_block, "X", counter)
        transversal_gate(state, magic_block, "S", counter)
    return magic_block, bit


def extract_and_correct(state: StateVector, block: CodeBlock,
                        cat_wires: Sequence[int], verify_wire: int,
                        rng: np.random.Generator,
                        counter: OpCounter | None = None) -> Syndrome:
    """Measure all six stabilizers (majority of three each) and apply the
    indicated single-qubit corrections.

    K1..K3 flag a Z error, fixed with Z; K4..K6 flag an X error, fixed with
    X.  Distinct nonzero positions cannot come from one error, so that case
    is reported uncorrectable (corrections still applied).
    """
    x_bits = tuple(
        ft_measure_operator(state, block, STABILIZERS[n], cat_wires,
                            verify_wire, rng, counter) for n in _X_NAMES)
    z_bits = tuple(
        ft_measure_operator(state, block, STABILIZERS[n], cat_wires,
                            verify_wire, rng, counter) for n in _Z_NAMES)
    z_pos = X_SYNDROME_TABLE[x_bits]  # type: ignore[index]
    x_pos = Z_SYNDROME_TABLE[z_bits]  # type: ignore[index]
    if z_pos is not None:
        sc.apply_gate(state, Gate("Z", (block.wire(z_pos),)), counter)
    if x_pos is not None:
        sc.apply_gate(state, Gate("X", (block.wire(x_pos),)), counter)
    bad = z_pos is not None and x_pos is not None and z_pos != x_pos
    return Syndrome(x_bits, z_bits, z_pos, x_pos, bad)  # type: ignore[arg-type]


def apply_logical_phase(state: StateVector, block: CodeBlock, theta: int,
                        magic_block: CodeBlock | None,
                        cat_wires: Sequence[int], verify_wire: int,
                        rng: np.random.Generator,
                        counter: OpCounter | None = None) -> CodeBlock:
    """Logical Rz(theta pi/4) as its octant word.  Clifford letters go
    transversally; a T letter consumes ``magic_block`` (which must hold
    seven fresh |0> wires) and relocates the logical qubit there."""
    word = OCTANT_WORDS[int(Octant(theta))]
    for letter in reversed(word):
        if letter == "T":
            if magic_block is None:
                raise sc.ResourceLimitError(
                    "a T letter needs a fresh magic block")
            prepare_logical_zero(state, magic_block, cat_wires, verify_wire,
                                 rng, counter)
            prepare_magic(state, magic_block, cat_wires, verify_wire, rng,
                          counter)
            block, _ = ft_t_gate(state, block, magic_block, cat_wires,
                                 verify_wire, rng, counter)
            magic_block = None
        else:
            transversal_gate(state, block, letter, counter)
    return block


def prepare_plus_theta_logical(state: StateVector, block: CodeBlock,
                               theta: int, magic_block: CodeBlock | None,
                               cat_wires: Sequence[int], verify_wire: int,
                               rng: np.random.Generator,
                               counter: OpCounter | None = None) -> CodeBlock:
    """Encode |0> + e^{i theta pi/4}|1> (normalized) fault-tolerantly:
    logical zero, transversal H, then the octant phase word."""
    prepare_logical_zero(state, block, cat_wires, verify_wire, rng, counter)
    transversal_gate(state, block, "H", counter)
    return apply_logical_phase(state, block, theta, magic_block, cat_wires,
                               verify_wire, rng, counter)


# ---------------------------------------------------------------------------
# ideal decoding, used by tests and diagnostics only

_LOGICAL_BASIS: tuple[np.ndarray, np.ndarray] | None = None


def logical_basis_states() -> tuple[np.ndarray, np.ndarray]:
    """(|0>_L, |1>_L) as 128-amplitude vectors, position 1 most significant."""
    global _LOGICAL_BASIS
    if _LOGICAL_BASIS is None:
        masks = {0}
        for name in _X_NAMES:
            mask = 0
            for pos in STABILIZERS[name].support:
                mask |= 1 << (7 - pos)
            masks = masks | {m ^ mask for m in masks}
        v0 = np.zeros(128, dtype=np.complex128)
        for m in sorted(masks):
            v0[m] = 1.0
        v0 /= np.linalg.norm(v0)
        v1 = np.zeros(128, dtype=np.complex128)
        all_ones = (1 << 7) - 1
        for m in sorted(masks):
            v1[m ^ all_ones] = v0[m]
        _LOGICAL_BASIS = (v0, v1)
    return _LOGICAL_BASIS


def decode_to_logical(state: StateVector, blocks) -> tuple[np.ndarray, float]:
    """Contract each block against the logical basis; returns the joint
    logical amplitude vector (2^k entries) and the leakage: how much of the
    state fails to factor as codespace x rest."""
    if isinstance(blocks, CodeBlock):
        blocks = (blocks,)
    n = state.num_qubits
    block_wires = [w for b in blocks for w in b.wires]
    rest = [w for w in range(n) if w not in block_wires]
    perm = block_wires + rest
    tensor = state.amps.reshape((2,) * n).transpose(perm)
    k = len(blocks)
    mat = tensor.reshape((128,) * k + (-1,))
    v0, v1 = logical_basis_states()
    basis = np.stack([v0, v1]).conj()
    for axis in range(k):
        mat = np.tensordot(basis, mat, axes=([1], [axis]))
    # axes now reversed: last contraction's logical index is first
    logical = mat.reshape((2,) * k + (-1,))
    logical = logical.transpose(tuple(reversed(range(k))) + (k,))
    flat = logical.reshape(1 << k, -1)
    u, s, _ = np.linalg.svd(flat, full_matrices=False)
    total = float(np.sum(s ** 2))
    if total < 1e-12:
        return np.zeros(1 << k, dtype=np.complex128), 1.0
    leak = 1.0 - float(s[0] ** 2) / total
    vec = u[:, 0] * s[0]
    return vec, leak
