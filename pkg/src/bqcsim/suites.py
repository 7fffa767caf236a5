"""Named invariant suites behind the verify command.

Each suite is a list of independently seeded checks returning one line of
pass/fail each; the CLI prints them and folds the results into its exit
code.  The heavy sweeps here double as the component-level evidence for
claims that cannot be replayed at full scale.
"""
from __future__ import annotations

import dataclasses
from typing import Callable

import numpy as np

from bqcsim import brickwork as bw
from bqcsim import protocol as pr
from bqcsim import simcore as sc
from bqcsim import steane as st
from bqcsim.simcore import Gate, Octant

FID_TOL = 1e-9

_S = np.sqrt(0.5)
_MATS = {
    "I": np.eye(2, dtype=complex),
    "H": np.array([[_S, _S], [_S, -_S]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.diag([1, -1]).astype(complex),
    "S": np.diag([1, 1j]).astype(complex),
    "SDG": np.diag([1, -1j]).astype(complex),
    "T": np.diag([1, np.exp(1j * np.pi / 4)]),
    "TDG": np.diag([1, np.exp(-1j * np.pi / 4)]),
}
_CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0],
                  [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


@dataclasses.dataclass(frozen=True)
class CaseResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        mark = "pass" if self.passed else "FAIL"
        tail = f"  ({self.detail})" if self.detail else ""
        return f"  [{mark}] {self.name}{tail}"


def _embed2(mat: np.ndarray, wire: int) -> np.ndarray:
    return np.kron(mat, _MATS["I"]) if wire == 0 else np.kron(_MATS["I"],
                                                              mat)


def suite_simcore(seed: int = 0) -> list[CaseResult]:
    rng = np.random.default_rng(seed)
    out = []

    psi = sc.random_state(5, rng)
    for _ in range(60):
        kind = rng.choice(["H", "S", "SDG", "X", "Z", "CNOT", "CZ", "RZ"])
        wires = tuple(rng.choice(5, size=2 if kind in ("CNOT", "CZ")
                                 else 1, replace=False).tolist())
        octant = Octant(int(rng.integers(0, 8))) if kind == "RZ" else None
        sc.apply_gate(psi, Gate(kind, wires, octant=octant))
    norm = float(np.linalg.norm(psi.amps))
    out.append(CaseResult("norm preserved over 60 random gates",
                          abs(norm - 1) < 1e-10, f"norm={norm:.12f}"))

    ref = sc.random_state(4, rng)
    work = sc.new_state(4)
    work.amps = ref.amps.copy()
    seq = [Gate("H", (0,)), Gate("CNOT", (0, 2)), Gate("S", (3,)),
           Gate("RZ", (1,), octant=Octant(3)), Gate("CZ", (1, 3))]
    inv = [Gate("CZ", (1, 3)), Gate("RZ", (1,), octant=Octant(5)),
           Gate("SDG", (3,)), Gate("CNOT", (0, 2)), Gate("H", (0,))]
    for g in seq + inv:
        sc.apply_gate(work, g)
    fid = sc.fidelity(work, ref)
    out.append(CaseResult("gate sequence times its inverse is identity",
                          fid > 1 - 1e-10, f"fidelity={fid:.12f}"))

    psi = sc.random_state(3, rng)
    bit = sc.measure_z(psi, 1, rng, None)
    again = sc.measure_z(psi, 1, rng, None)
    norm = float(np.linalg.norm(psi.amps))
    out.append(CaseResult("measurement collapses and repeats",
                          bit == again and abs(norm - 1) < 1e-10,
                          f"bit={bit} repeat={again}"))

    ring_ok = all(int(Octant(k) + Octant(j)) == (k + j) % 8
                  for k in range(8) for j in range(8))
    ring_ok &= all(int(-Octant(k)) == (-k) % 8 for k in range(8))
    out.append(CaseResult("octant ring closed under + and -", ring_ok))

    c = sc.OpCounter()
    psi = sc.new_state(1)
    sc.apply_gate(psi, Gate("RZ", (0,), octant=Octant(1)), c)
    sc.apply_gate(psi, Gate("RZ", (0,), octant=Octant(2)), c)
    out.append(CaseResult("counter splits T-like from Clifford rotations",
                          c.t_gates == 1 and c.one_qubit == 1,
                          f"t={c.t_gates} 1q={c.one_qubit}"))
    return out


def suite_brickwork(seed: int = 0, inputs: int = 20) -> list[CaseResult]:
    """Brick-level MBQC against the direct unitary, 20 random inputs per
    gate."""
    rng = np.random.default_rng(seed)
    out = []
    for kind in ("I", "H", "X", "Z", "S", "SDG", "T", "TDG"):
        lay = bw.BrickworkLayout.create(2, 1)
        lay.set_brick(1, (1, 2), bw.gate_pattern(kind))
        worst = 1.0
        for _ in range(inputs):
            psi = sc.random_state(2, rng).amps
            got, _ = bw.run_mbqc(lay, rng=rng, input_state=psi)
            ref = sc.new_state(2)
            ref.amps = _embed2(_MATS[kind], 0) @ psi
            worst = min(worst, sc.fidelity(got, ref))
        out.append(CaseResult(f"brick implements {kind}",
                              worst > 1 - FID_TOL,
                              f"worst fidelity {worst:.12f}"))
    lay = bw.BrickworkLayout.create(2, 1)
    lay.set_brick(1, (1, 2), bw.gate_pattern("CNOT"))
    worst = 1.0
    for _ in range(inputs):
        psi = sc.random_state(2, rng).amps
        got, _ = bw.run_mbqc(lay, rng=rng, input_state=psi)
        ref = sc.new_state(2)
        ref.amps = _CNOT @ psi
        worst = min(worst, sc.fidelity(got, ref))
    out.append(CaseResult("brick implements CNOT", worst > 1 - FID_TOL,
                          f"worst fidelity {worst:.12f}"))

    census = bw.brick_census(35, 612)
    out.append(CaseResult("study census (35, 612)",
                          census == (10404, 612, 85715), str(census)))
    out.append(CaseResult("census (3, 14)",
                          bw.brick_census(3, 14) == (14, 14, 171),
                          str(bw.brick_census(3, 14))))
    return out


def _decode_fidelity(state: sc.StateVector, block: st.CodeBlock,
                     ref: np.ndarray) -> float:
    vec, leak = st.decode_to_logical(state, block)
    if leak > 1e-9:
        return 0.0
    return float(abs(np.vdot(ref, vec)) ** 2
                 / (np.vdot(ref, ref).real * np.vdot(vec, vec).real))


def suite_steane(seed: int = 0) -> list[CaseResult]:
    """All 84 single-Pauli injections on the four reference preparations,
    plus the teleported T on |+>_L (22-wire statevector)."""
    out = []
    block = st.CodeBlock(tuple(range(7)))
    cat = tuple(range(7, 14))
    refs = {
        "zero": np.array([1.0, 0.0], dtype=complex),
        "one": np.array([0.0, 1.0], dtype=complex),
        "plus": np.array([_S, _S], dtype=complex),
        "magic": np.array([_S, _S * np.exp(1j * np.pi / 4)]),
    }
    corrected = 0
    total = 0
    worst = 1.0
    failures = []
    rng = np.random.default_rng(seed)
    for label, ref in refs.items():
        for pauli in ("X", "Y", "Z"):
            for pos in range(1, 8):
                total += 1
                state = sc.new_state(15)
                st.prepare_logical_zero(state, block, cat, 14, rng)
                if label == "one":
                    st.transversal_gate(state, block, "X")
                elif label == "plus":
                    st.transversal_gate(state, block, "H")
                elif label == "magic":
                    st.prepare_magic(state, block, cat, 14, rng)
                sc.inject_pauli(state, block.wire(pos), pauli)
                syn = st.extract_and_correct(state, block, cat, 14, rng)
                fid = _decode_fidelity(state, block, ref)
                worst = min(worst, fid)
                if not syn.uncorrectable and fid > 1 - FID_TOL:
                    corrected += 1
                else:
                    failures.append((label, pauli, pos))
    out.append(CaseResult(
        f"single-error sweep {corrected}/{total} corrected",
        corrected == total == 84,
        f"worst fidelity {worst:.12f}"
        + (f" failures: {failures[:3]}" if failures else "")))

    state = sc.new_state(22)
    data = st.CodeBlock(tuple(range(7)))
    magic = st.CodeBlock(tuple(range(7, 14)))
    cat22 = tuple(range(14, 21))
    rng = np.random.default_rng(seed + 1)
    st.prepare_logical_zero(state, data, cat22, 21, rng)
    st.transversal_gate(state, data, "H")
    st.prepare_logical_zero(state, magic, cat22, 21, rng)
    st.prepare_magic(state, magic, cat22, 21, rng)
    new_block, _ = st.ft_t_gate(state, data, magic, cat22, 21, rng)
    target = np.array([_S, _S * np.exp(1j * np.pi / 4)])
    fid = _decode_fidelity(state, new_block, target)
    out.append(CaseResult("teleported T sends |+>_L to the magic state",
                          fid > 1 - FID_TOL, f"fidelity {fid:.12f}"))
    return out


def suite_equivalence(seed: int = 0, layouts: int = 20) -> list[CaseResult]:
    """Blind sessions against direct simulation on random small layouts."""
    rng = np.random.default_rng(seed)
    worst = 1.0
    for i in range(layouts):
        m = int(rng.integers(1, 3))
        phi = {(x, y): int(rng.integers(0, 8))
               for x in range(1, 4 * m + 1) for y in (1, 2)}
        lay = bw.BrickworkLayout.create(2, m, phi)
        res = pr.run_protocol("bfk_basic", lay, seed=1000 + i)
        worst = min(worst, res.output_fidelity(bw.direct_state(lay)))
    results = [CaseResult(
        f"blind basic matches direct simulation on {layouts} layouts",
        worst > 1 - FID_TOL, f"worst fidelity {worst:.12f}")]

    lay = bw.BrickworkLayout.create(2, 1, {(1, 1): 3})
    exact = pr.run_protocol("protocol1", lay, 5, backend="exact")
    tally = pr.run_protocol("protocol1", lay, 5, backend="tally")
    results.append(CaseResult(
        "exact and tally backends exchange identical message counts",
        exact.transcript.counts == tally.transcript.counts))
    return results


def suite_blindness(seed: int = 0, runs: int = 10_000) -> list[CaseResult]:
    """Fixed-program announce audit plus transcript-shape independence."""
    program = {(x, y): (3 * x + 5 * y) % 8
               for x in range(1, 5) for y in (1, 2)}
    rep = pr.blindness_audit(2, 1, runs=runs, seed=seed, program=program)
    out = [CaseResult(
        f"announced angles uniform per coordinate over {runs} runs",
        rep.uniform_ok,
        f"max chi2 {rep.max_chi2:.2f} < {rep.chi2_critical}")]

    rand = pr.blindness_audit(2, 1, runs=runs, seed=seed)
    out.append(CaseResult(
        "announce carries no measurable program information",
        rand.passed,
        f"max MI {rand.max_mi:.4f} bits < {rand.mi_limit}"))

    lay_a = bw.BrickworkLayout.create(2, 1, {(1, 1): 1, (3, 2): 6})
    lay_b = bw.BrickworkLayout.create(2, 1, {(2, 2): 4})
    sig_a = pr.transcript_signature(
        pr.run_protocol("bfk_basic", lay_a, 7).transcript)
    sig_b = pr.transcript_signature(
        pr.run_protocol("bfk_basic", lay_b, 8).transcript)
    out.append(CaseResult(
        "transcript shape identical across same-size programs",
        sig_a == sig_b, f"{len(sig_a)} messages"))
    return out


SUITES: dict[str, Callable[[], list[CaseResult]]] = {
    "simcore": suite_simcore,
    "steane": suite_steane,
    "brickwork": suite_brickwork,
    "equivalence": suite_equivalence,
    "blindness": suite_blindness,
}


def run_suite(name: str) -> tuple[bool, list[CaseResult]]:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; "
                       f"choose from {sorted(SUITES)}")
    results = SUITES[name]()
    return all(r.passed for r in results), results
