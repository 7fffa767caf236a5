"""Brickwork graph states: layout geometry, measurement flow, gate patterns,
and a measurement-driven runner.

Geometry: n rows (n >= 2), columns 1..4m+1.  Layer l spans columns
4(l-1)+1 .. 4l+1; its measured columns are the first four, and its vertical
CZ rungs sit at columns 4l-1 and 4l+1.  Odd layers pair rows (1,2), (3,4), ...;
even layers pair (2,3), (4,5), ...  Column 4m+1 is the output.

Flow: measuring (x,y) with raw outcome s feeds later corrections.
X_{x,y} = {(x-1,y)}; Z_{x,y} = {(x-2,y)} plus (x-1,y') for every rung at
column x joining rows y and y'.  The same sets at x = 4m+1 give the output
byproduct X^{sX} Z^{sZ}.

A brick measured at angles (a1..a4)/(b1..b4) acts as
CZ . [J(-a4) x J(-b4)] . [J(-a3) x J(-b3)] . CZ . [J(-a2) x J(-b2)] .
[J(-a1) x J(-b1)] with J(t) = H Rz(t); with a4 = b4 = 0 the rungs cancel and
the rows decouple into Rz(-a3) Rx(-a2) Rz(-a1) each, which is what the
one-qubit pattern table below exploits.
"""
from __future__ import annotations

import dataclasses
from typing import Iterable, Mapping

import numpy as np

from bqcsim import simcore as sc
from bqcsim.simcore import Gate, Octant, OpCounter, StateVector

LAYOUT_FORMAT = "bqcsim-layout"
LAYOUT_VERSION = 1

ONE_QUBIT_ROWS: dict[str, tuple[int, int, int, int]] = {
    "I": (0, 0, 0, 0),
    "H": (6, 6, 6, 0),
    "X": (0, 4, 0, 0),
    "Z": (4, 0, 0, 0),
    "S": (6, 0, 0, 0),
    "SDG": (2, 0, 0, 0),
    "T": (7, 0, 0, 0),
    "TDG": (1, 0, 0, 0),
}

# control row, target row
CNOT_ROWS: tuple[tuple[int, int, int, int], tuple[int, int, int, int]] = (
    (6, 0, 0, 0), (0, 6, 0, 2))


@dataclasses.dataclass(frozen=True)
class BrickPattern:
    """Measurement angles realizing a named gate: two rows of four octants
    for a full brick, one row for a half-brick."""

    kind: str
    rows: tuple[tuple[Octant, ...], ...]


def gate_pattern(kind: str, half: bool = False) -> BrickPattern:
    k = kind.upper()
    if k == "CNOT":
        if half:
            raise ValueError("CNOT needs a full brick")
        rows = tuple(tuple(Octant(a) for a in r) for r in CNOT_ROWS)
        return BrickPattern("CNOT", rows)
    if k not in ONE_QUBIT_ROWS:
        raise ValueError(f"no brick pattern for {kind!r}")
    row = tuple(Octant(a) for a in ONE_QUBIT_ROWS[k])
    idle = tuple(Octant(0) for _ in range(4))
    return BrickPattern(k, (row,) if half else (row, idle))


def columns(m: int) -> int:
    return 4 * m + 1


def layer_pairs(n: int, layer: int) -> tuple[list[tuple[int, int]], list[int]]:
    """Row pairs bricked in this layer, plus the unpaired row(s)."""
    start = 1 if layer % 2 == 1 else 2
    pairs = [(y, y + 1) for y in range(start, n, 2)]
    paired = {y for p in pairs for y in p}
    singles = [y for y in range(1, n + 1) if y not in paired]
    return pairs, singles


def brick_census(n: int, m: int) -> tuple[int, int, int]:
    """(bricks, half_bricks, qubits) for an n-row, m-layer pattern."""
    if n < 2 or m < 1:
        raise ValueError("need n >= 2 rows and m >= 1 layers")
    bricks = halves = 0
    for layer in range(1, m + 1):
        pairs, singles = layer_pairs(n, layer)
        bricks += len(pairs)
        halves += len(singles)
    return bricks, halves, columns(m) * n


def rung_pairs_at_column(n: int, m: int, x: int) -> list[tuple[int, int]]:
    out: list[tuple[int, int]] = []
    for layer in range(1, m + 1):
        if x in (4 * layer - 1, 4 * layer + 1):
            out.extend(layer_pairs(n, layer)[0])
    return out


def edges(n: int, m: int) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """All CZ edges: horizontal chains plus brick rungs."""
    es: list[tuple[tuple[int, int], tuple[int, int]]] = []
    for x in range(1, columns(m)):
        for y in range(1, n + 1):
            es.append(((x, y), (x + 1, y)))
    for x in range(1, columns(m) + 1):
        for (y1, y2) in rung_pairs_at_column(n, m, x):
            es.append(((x, y1), (x, y2)))
    return es


def dependencies(n: int, m: int) -> tuple[
        dict[tuple[int, int], frozenset[tuple[int, int]]],
        dict[tuple[int, int], frozenset[tuple[int, int]]]]:
    """(x_dep, z_dep) for every coordinate including the output column."""
    x_dep: dict[tuple[int, int], frozenset[tuple[int, int]]] = {}
    z_dep: dict[tuple[int, int], frozenset[tuple[int, int]]] = {}
    rungs = {x: rung_pairs_at_column(n, m, x) for x in range(1, columns(m) + 1)}
    for x in range(1, columns(m) + 1):
        for y in range(1, n + 1):
            xs = frozenset({(x - 1, y)} if x >= 2 else set())
            zs: set[tuple[int, int]] = set()
            if x >= 3:
                zs.add((x - 2, y))
            for (y1, y2) in rungs[x]:
                if y == y1:
                    zs.add((x - 1, y2))
                elif y == y2:
                    zs.add((x - 1, y1))
            x_dep[(x, y)] = xs
            z_dep[(x, y)] = frozenset(zs)
    return x_dep, z_dep


def corrected_angle(phi: int, s_x: int, s_z: int) -> Octant:
    """phi' = (-1)^{s_x} phi + 4 s_z, in octants."""
    base = -Octant(phi) if s_x & 1 else Octant(phi)
    return base + (4 if s_z & 1 else 0)


@dataclasses.dataclass
class BrickworkLayout:
    """An n x (4m+1) brickwork pattern with measurement angles phi on the
    measured columns and structural correction sets."""

    n: int
    m: int
    phi: dict[tuple[int, int], Octant]
    x_dep: dict[tuple[int, int], frozenset[tuple[int, int]]]
    z_dep: dict[tuple[int, int], frozenset[tuple[int, int]]]

    @classmethod
    def create(cls, n: int, m: int,
               phi: Mapping[tuple[int, int], int] | None = None) -> "BrickworkLayout":
        if n < 2 or m < 1:
            raise ValueError("need n >= 2 rows and m >= 1 layers")
        grid = {(x, y): Octant(0)
                for x in range(1, 4 * m + 1) for y in range(1, n + 1)}
        if phi:
            for (x, y), v in phi.items():
                if (x, y) not in grid:
                    raise ValueError(f"angle at {(x, y)} outside measured grid")
                grid[(x, y)] = Octant(v)
        x_dep, z_dep = dependencies(n, m)
        return cls(n, m, grid, x_dep, z_dep)

    @property
    def qubits(self) -> int:
        return columns(self.m) * self.n

    def wire(self, x: int, y: int) -> int:
        return (x - 1) * self.n + (y - 1)

    def set_brick(self, layer: int, rows: tuple[int, ...] | int,
                  pattern: BrickPattern) -> None:
        """Write a pattern's angles at this layer; ``rows`` lists the grid
        rows matching pattern rows (a single row for half-bricks).

        Two-row patterns need the rung CZs, so the rows must be a pair
        bricked at this layer's parity.  One-row patterns work anywhere: an
        idle partner row decouples.
        """
        if isinstance(rows, int):
            rows = (rows,)
        if len(rows) != len(pattern.rows):
            raise ValueError("row count does not match pattern")
        if not 1 <= layer <= self.m:
            raise ValueError(f"layer {layer} outside 1..{self.m}")
        if len(rows) == 2 and tuple(sorted(rows)) not in layer_pairs(self.n, layer)[0]:
            raise ValueError(
                f"rows {rows} are not bricked together at layer {layer}")
        x0 = 4 * (layer - 1)
        for row, angles in zip(rows, pattern.rows):
            for i, a in enumerate(angles, start=1):
                self.phi[(x0 + i, row)] = Octant(a)

    def to_text(self) -> str:
        lines = [f"{LAYOUT_FORMAT} {LAYOUT_VERSION}",
                 f"rows {self.n}", f"layers {self.m}"]
        for x in range(1, 4 * self.m + 1):
            for y in range(1, self.n + 1):
                k = int(self.phi[(x, y)])
                if k:
                    lines.append(f"phi {x} {y} {k}")
        for name, dep in (("xdep", self.x_dep), ("zdep", self.z_dep)):
            for (x, y) in sorted(dep):
                cells = sorted(dep[(x, y)])
                if cells:
                    flat = " ".join(f"{a} {b}" for a, b in cells)
                    lines.append(f"{name} {x} {y} {flat}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "BrickworkLayout":
        lines = [ln.strip() for ln in text.splitlines()
                 if ln.strip() and not ln.lstrip().startswith("#")]
        if not lines:
            raise ValueError("empty layout document")
        head = lines[0].split()
        if len(head) != 2 or head[0] != LAYOUT_FORMAT:
            raise ValueError("not a layout document")
        if int(head[1]) != LAYOUT_VERSION:
            raise ValueError(f"unsupported layout version {head[1]}")
        n = m = None
        phi: dict[tuple[int, int], int] = {}
        deps: dict[str, dict[tuple[int, int], frozenset]] = {"xdep": {}, "zdep": {}}
        for ln in lines[1:]:
            parts = ln.split()
            if parts[0] == "rows":
                n = int(parts[1])
            elif parts[0] == "layers":
                m = int(parts[1])
            elif parts[0] == "phi":
                phi[(int(parts[1]), int(parts[2]))] = int(parts[3])
            elif parts[0] in deps:
                vals = [int(v) for v in parts[3:]]
                deps[parts[0]][(int(parts[1]), int(parts[2]))] = frozenset(
                    (vals[i], vals[i + 1]) for i in range(0, len(vals), 2))
            else:
                raise ValueError(f"unknown layout line {ln!r}")
        if n is None or m is None:
            raise ValueError("layout document missing rows/layers")
        layout = cls.create(n, m, phi)
        # dependency lines are redundant with the geometry; verify they agree
        for key, stored in (("xdep", layout.x_dep), ("zdep", layout.z_dep)):
            for coord, cells in deps[key].items():
                if stored.get(coord, frozenset()) != cells:
                    raise ValueError(f"{key} mismatch at {coord}")
        return layout


@dataclasses.dataclass
class MeasurementRecord:
    """Raw outcomes per measured coordinate plus output-column byproducts."""

    outcomes: dict[tuple[int, int], int]
    byproduct_x: dict[int, int]
    byproduct_z: dict[int, int]


def _product_state_amps(layout: BrickworkLayout,
                        input_amps: np.ndarray,
                        prep: Mapping[tuple[int, int], int]) -> np.ndarray:
    """Joint state, wire-ordered: column-1 wires carry ``input_amps``, every
    other wire |+_theta> per ``prep``."""
    amps = np.asarray(input_amps, dtype=np.complex128)
    s = np.sqrt(0.5)
    for x in range(2, columns(layout.m) + 1):
        for y in range(1, layout.n + 1):
            theta = int(prep.get((x, y), 0)) % 8
            q = np.array([s, s * sc.OCTANT_PHASE[theta]], dtype=np.complex128)
            amps = np.kron(amps, q)
    return amps


def build_brickwork_state(state: StateVector, layout: BrickworkLayout,
                          input_angles: Iterable[int] | None = None,
                          *, input_state: np.ndarray | None = None,
                          prep_angles: Mapping[tuple[int, int], int] | None = None,
                          counter: OpCounter | None = None) -> StateVector:
    """Prepare all qubits and entangle every brickwork edge with CZ.

    Column-1 qubits are |0>+e^{i theta}|1> per ``input_angles`` (or an
    arbitrary joint ``input_state``); all other qubits default to |+> unless
    ``prep_angles`` rotates them.
    """
    if state.num_qubits != layout.qubits:
        raise ValueError(f"state has {state.num_qubits} wires, layout needs "
                         f"{layout.qubits}")
    if input_state is not None:
        inp = np.asarray(input_state, dtype=np.complex128)
        if inp.shape != (1 << layout.n,):
            raise ValueError("input_state must cover the n input wires")
    else:
        angles = list(input_angles) if input_angles is not None else [0] * layout.n
        if len(angles) != layout.n:
            raise ValueError("need one input angle per row")
        inp = np.array([1.0], dtype=np.complex128)
        s = np.sqrt(0.5)
        for th in angles:
            q = np.array([s, s * sc.OCTANT_PHASE[int(th) % 8]],
                         dtype=np.complex128)
            inp = np.kron(inp, q)
    state.amps = _product_state_amps(layout, inp, prep_angles or {})
    for ((x1, y1), (x2, y2)) in edges(layout.n, layout.m):
        sc.apply_gate(state, Gate("CZ", (layout.wire(x1, y1),
                                         layout.wire(x2, y2))), counter)
    return state


def _flow_bits(layout: BrickworkLayout, outcomes: Mapping[tuple[int, int], int],
               x: int, y: int) -> tuple[int, int]:
    s_x = 0
    for c in layout.x_dep[(x, y)]:
        s_x ^= outcomes[c]
    s_z = 0
    for c in layout.z_dep[(x, y)]:
        s_z ^= outcomes[c]
    return s_x, s_z


def run_mbqc(layout: BrickworkLayout,
             input_angles: Iterable[int] | None = None,
             rng: np.random.Generator | None = None,
             *, input_state: np.ndarray | None = None,
             prep_angles: Mapping[tuple[int, int], int] | None = None,
             counter: OpCounter | None = None
             ) -> tuple[StateVector, MeasurementRecord]:
    """Drive the full pattern: entangle, measure column-major with corrected
    angles, undo output byproducts, return the output-column state."""
    if rng is None:
        raise ValueError("run_mbqc needs an explicit rng")
    prep = dict(prep_angles or {})
    if any(x == 1 for (x, _) in prep):
        raise ValueError("column 1 carries inputs; prepared angles start at "
                         "column 2")
    state = sc.new_state(layout.qubits)
    build_brickwork_state(state, layout, input_angles,
                          input_state=input_state, prep_angles=prep,
                          counter=counter)
    outcomes: dict[tuple[int, int], int] = {}
    for x in range(1, 4 * layout.m + 1):
        for y in range(1, layout.n + 1):
            s_x, s_z = _flow_bits(layout, outcomes, x, y)
            phi_c = corrected_angle(layout.phi[(x, y)], s_x, s_z)
            delta = phi_c + Octant(prep.get((x, y), 0))
            outcomes[(x, y)] = sc.measure_in_angle_basis(
                state, layout.wire(x, y), delta, rng, counter)
    bx: dict[int, int] = {}
    bz: dict[int, int] = {}
    xo = columns(layout.m)
    for y in range(1, layout.n + 1):
        s_x, s_z = _flow_bits(layout, outcomes, xo, y)
        bx[y], bz[y] = s_x, s_z
        w = layout.wire(xo, y)
        if s_x:
            sc.apply_gate(state, Gate("X", (w,)), counter)
        if s_z:
            sc.apply_gate(state, Gate("Z", (w,)), counter)
    out = extract_output_state(state, layout, outcomes)
    return out, MeasurementRecord(outcomes, bx, bz)


def extract_output_state(state: StateVector, layout: BrickworkLayout,
                         outcomes: Mapping[tuple[int, int], int]) -> StateVector:
    """Project out the measured wires (already collapsed to their outcome
    bits) and return the n output wires as a fresh state."""
    base = 0
    for (x, y), bit in outcomes.items():
        if bit:
            base |= 1 << state.bit(layout.wire(x, y))
    xo = columns(layout.m)
    out_bits = [state.bit(layout.wire(xo, y)) for y in range(1, layout.n + 1)]
    idx = np.full(1 << layout.n, base, dtype=np.int64)
    for pos, b in enumerate(out_bits):  # row 1 is the most significant wire
        k = layout.n - 1 - pos
        idx |= ((np.arange(1 << layout.n) >> k) & 1) << b
    amps = state.amps[idx]
    norm = np.linalg.norm(amps)
    if abs(norm - 1.0) > 1e-6:
        raise ValueError("output extraction lost amplitude; "
                         "measured wires not fully collapsed")
    out = sc.new_state(layout.n)
    out.amps = (amps / norm).astype(np.complex128)
    return out


def direct_state(layout: BrickworkLayout,
                 input_angles: Iterable[int] | None = None,
                 *, input_state: np.ndarray | None = None) -> StateVector:
    """Reference semantics on n wires: per measured column, CZ the rungs then
    apply J(-phi) on every row; finish with the output column's rungs.

    This is the circuit the measurement pattern teleports, so it is the
    oracle run_mbqc and the protocols are tested against.
    """
    st = sc.new_state(layout.n)
    if input_state is not None:
        sc.set_amplitudes(st, np.asarray(input_state, dtype=np.complex128))
    else:
        angles = list(input_angles) if input_angles is not None else [0] * layout.n
        for y, th in enumerate(angles, start=1):
            sc.apply_gate(st, Gate("H", (y - 1,)))
            sc.apply_gate(st, Gate("RZ", (y - 1,), octant=Octant(th)))
    for x in range(1, columns(layout.m) + 1):
        for (y1, y2) in rung_pairs_at_column(layout.n, layout.m, x):
            sc.apply_gate(st, Gate("CZ", (y1 - 1, y2 - 1)))
        if x <= 4 * layout.m:
            for y in range(1, layout.n + 1):
                neg = -layout.phi[(x, y)]
                sc.apply_gate(st, Gate("RZ", (y - 1,), octant=neg))
                sc.apply_gate(st, Gate("H", (y - 1,)))
    return st
