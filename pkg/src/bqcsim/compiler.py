"""Circuit toolchain: an in-place carry-lookahead adder generator, Toffoli
decomposition into the Clifford+T set, greedy swap insertion for a line of
qubits, and placement of routed circuits onto the brickwork grid.

Placement relies on two module-level lookup tables built on first use:

- the 512 octant Euler triples (a1, a2, a3), realizing Rz(-a3) Rx(-a2)
  Rz(-a1) on one brick row, keyed by the phase-normalized matrix; runs of
  one-qubit gates merge while their product stays inside this family;
- the 4096 rung-coupled pairs (c1, 0, c3, 0) / (t1, t2, 0, 2), one table
  per orientation, letting a CNOT absorb pending one-qubit gates into its
  own brick's free angle slots.
"""
from __future__ import annotations

import dataclasses
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from bqcsim import simcore as sc
from bqcsim.brickwork import BrickworkLayout, layer_pairs
from bqcsim.simcore import GATE_ARITY, Gate, StateVector


class CompileError(ValueError):
    """A circuit cannot be processed by the requested stage; parse errors
    carry the offending line number."""


@dataclasses.dataclass
class CircuitIR:
    """A straight-line gate list over ``num_wires`` labeled wires."""

    num_wires: int
    gates: list[Gate] = dataclasses.field(default_factory=list)
    labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.num_wires < 1:
            raise ValueError("need at least one wire")
        if not self.labels:
            self.labels = tuple(f"w{i}" for i in range(self.num_wires))
        if len(self.labels) != self.num_wires:
            raise ValueError("one label per wire")
        if len(set(self.labels)) != self.num_wires:
            raise ValueError("labels must be distinct")
        for g in self.gates:
            self._check(g)

    def _check(self, gate: Gate) -> None:
        if any(not 0 <= w < self.num_wires for w in gate.wires):
            raise ValueError(f"gate {gate.kind} touches a wire out of range")

    def add(self, kind: str, *wires: int, octant: int | None = None) -> None:
        gate = Gate(kind, wires,
                    octant=None if octant is None else sc.Octant(octant))
        self._check(gate)
        self.gates.append(gate)

    def wire(self, label: str) -> int:
        return self.labels.index(label)

    def tally(self) -> "GateTally":
        return GateTally.of(self.gates)

    def to_text(self) -> str:
        lines = [f"WIRES {self.num_wires}", "LABELS " + " ".join(self.labels)]
        for g in self.gates:
            kind = f"RZ{int(g.octant)}" if g.kind == "RZ" else g.kind
            lines.append(kind + " " + " ".join(str(w) for w in g.wires))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "CircuitIR":
        num_wires = None
        labels: tuple[str, ...] = ()
        gates: list[Gate] = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            head = parts[0].upper()
            try:
                if head == "WIRES":
                    num_wires = int(parts[1])
                    continue
                if head == "LABELS":
                    labels = tuple(parts[1:])
                    continue
                if num_wires is None:
                    raise ValueError(
                        "circuit text must open with a WIRES line")
                octant = None
                if head.startswith("RZ") and head != "RZ":
                    octant, head = sc.Octant(int(head[2:])), "RZ"
                elif head == "RZ":
                    raise ValueError("rotation gates are written RZ<octant>")
                wires = tuple(int(w) for w in parts[1:])
                gates.append(Gate(head, wires, octant=octant))
            except (ValueError, IndexError) as exc:
                raise CompileError(f"line {lineno}: {exc} [{raw!r}]") \
                    from exc
        if num_wires is None:
            raise CompileError("line 1: circuit text must open with a "
                               "WIRES line")
        return cls(num_wires, gates, labels)


@dataclasses.dataclass(frozen=True)
class GateTally:
    counts: tuple[tuple[str, int], ...]

    @classmethod
    def of(cls, gates: Iterable[Gate]) -> "GateTally":
        acc: dict[str, int] = {}
        for g in gates:
            key = f"RZ{int(g.octant)}" if g.kind == "RZ" else g.kind
            acc[key] = acc.get(key, 0) + 1
        return cls(tuple(sorted(acc.items())))

    def __getitem__(self, kind: str) -> int:
        return dict(self.counts).get(kind.upper(), 0)

    @property
    def toffoli(self) -> int:
        return self["TOFFOLI"]

    @property
    def cnot(self) -> int:
        return self["CNOT"]

    @property
    def x(self) -> int:
        return self["X"]

    @property
    def t_like(self) -> int:
        return self["T"] + self["TDG"]

    @property
    def two_qubit(self) -> int:
        return sum(n for k, n in self.counts
                   if k in GATE_ARITY and GATE_ARITY[k] == 2
                   or k == "SWAP")

    @property
    def one_qubit_other(self) -> int:
        skip = {"T", "TDG"}
        total = 0
        for k, n in self.counts:
            base = "RZ" if k.startswith("RZ") else k
            if base in GATE_ARITY and GATE_ARITY[base] == 1 and k not in skip:
                total += n
        return total


# ---------------------------------------------------------------------------
# carry-lookahead adder

def _tree_slots(n: int) -> list[tuple[int, int]]:
    """(level, index) pairs of the carry-product wires a width-n lookahead
    allocates: index a multiple of 2^t with 2^{t+1} <= index <= n."""
    slots = []
    t = 1
    while (1 << (t + 1)) <= n:
        for j in range(2 << t, n + 1, 1 << t):
            slots.append((t, j))
        t += 1
    return slots


def _lookahead(add, width: int, z_of, p_of, pw, inverse: bool = False) -> None:
    """Brent-Kung carry computation over z[1..width] with propagate bits on
    p_of(i) and tree products on pw[(t, j)]; ``add`` books each Toffoli."""
    def pstore(t: int, j: int) -> int:
        return p_of(j - 1) if t == 0 else pw[(t, j)]

    rounds = []
    t = 1
    while (1 << (t + 1)) <= width:  # products
        rounds += [(pstore(t - 1, j - (1 << (t - 1))), pstore(t - 1, j),
                    pw[(t, j)])
                   for j in range(2 << t, width + 1, 1 << t)]
        t += 1
    t = 1
    while (1 << t) <= width:  # generate up-sweep
        rounds += [(pstore(t - 1, j), z_of(j - (1 << (t - 1))), z_of(j))
                   for j in range(1 << t, width + 1, 1 << t)]
        t += 1
    t -= 1
    while t >= 1:  # carry down-sweep
        rounds += [(pstore(t - 1, j), z_of(j - (1 << (t - 1))), z_of(j))
                   for j in range((1 << t) + (1 << (t - 1)), width + 1,
                                  1 << t)]
        t -= 1
    t = 1
    uncompute = []
    while (1 << (t + 1)) <= width:  # release the products
        uncompute += [(pstore(t - 1, j - (1 << (t - 1))), pstore(t - 1, j),
                       pw[(t, j)])
                      for j in range(2 << t, width + 1, 1 << t)]
        t += 1
    rounds += reversed(uncompute)
    if inverse:
        rounds = list(reversed(rounds))
    for c1, c2, tgt in rounds:
        add("TOFFOLI", c1, c2, tgt)


def qcla_adder(bits: int) -> CircuitIR:
    """In-place adder: (a, b) -> (a, a+b), the top sum bit landing on the
    extra carry wire.  Interior carries are computed by carry-lookahead and
    uncomputed through the complemented-sum identity, so the only Toffolis
    are the generate/propagate products themselves."""
    if not 1 <= bits <= 64:
        raise ValueError("supported widths are 1..64")
    n = bits
    slots = _tree_slots(n)
    labels: list[str] = []
    for i in range(n):
        labels += [f"a{i}", f"b{i}", f"z{i + 1}"]
        labels += [f"p{t}_{j}" for t, j in slots if j == i + 1]
    circ = CircuitIR(len(labels), labels=tuple(labels))
    a = [circ.wire(f"a{i}") for i in range(n)]
    b = [circ.wire(f"b{i}") for i in range(n)]
    z = [None] + [circ.wire(f"z{j}") for j in range(1, n + 1)]
    pw = {(t, j): circ.wire(f"p{t}_{j}") for t, j in slots}

    for i in range(n):  # generate bits
        circ.add("TOFFOLI", a[i], b[i], z[i + 1])
    for i in range(n):  # propagate bits
        circ.add("CNOT", a[i], b[i])
    _lookahead(circ.add, n, lambda j: z[j], lambda i: b[i], pw)
    for i in range(1, n):  # sum = propagate xor carry
        circ.add("CNOT", z[i], b[i])

    # erase the interior carries: the carries of (a, not sum) with zero
    # carry-in reproduce them, so run that computation backwards
    for i in range(n - 1):
        circ.add("X", b[i])
    for i in range(1, n - 1):
        circ.add("CNOT", a[i], b[i])
    _lookahead(circ.add, n - 1, lambda j: z[j], lambda i: b[i], pw,
               inverse=True)
    for i in range(1, n - 1):
        circ.add("CNOT", a[i], b[i])
    for i in range(n - 1):
        circ.add("TOFFOLI", a[i], b[i], z[i + 1])
    for i in range(n - 1):
        circ.add("X", b[i])
    return circ


def toffoli_circuit() -> CircuitIR:
    # target between the controls: the decomposition touches all three wire
    # pairs, and this order leaves only one distant pair for the router
    circ = CircuitIR(3, labels=("c1", "t", "c2"))
    circ.add("TOFFOLI", 0, 2, 1)
    return circ


# ---------------------------------------------------------------------------
# decomposition

def _toffoli_network(c1: int, c2: int, t: int) -> list[Gate]:
    seq = [("H", (t,)), ("CNOT", (c2, t)), ("TDG", (t,)), ("CNOT", (c1, t)),
           ("T", (t,)), ("CNOT", (c2, t)), ("TDG", (t,)), ("CNOT", (c1, t)),
           ("T", (c2,)), ("T", (t,)), ("H", (t,)), ("CNOT", (c1, c2)),
           ("T", (c1,)), ("TDG", (c2,)), ("CNOT", (c1, c2))]
    return [Gate(k, w) for k, w in seq]


_RZ_WORDS = {0: (), 1: ("T",), 2: ("S",), 3: ("S", "T"), 4: ("Z",),
             5: ("Z", "T"), 6: ("SDG",), 7: ("TDG",)}


def decompose(circuit: CircuitIR) -> CircuitIR:
    """Rewrite onto {H, X, Z, S, SDG, T, TDG, CNOT}: Toffolis expand to the
    7 T + 6 CNOT + 2 H network, swaps to 3 CNOTs, CZ to a conjugated CNOT,
    rotations to their octant words."""
    out = CircuitIR(circuit.num_wires, labels=circuit.labels)
    for g in circuit.gates:
        if g.kind == "TOFFOLI":
            out.gates.extend(_toffoli_network(*g.wires))
        elif g.kind == "SWAP":
            a, b = g.wires
            out.gates.extend([Gate("CNOT", (a, b)), Gate("CNOT", (b, a)),
                              Gate("CNOT", (a, b))])
        elif g.kind == "CZ":
            c, t = g.wires
            out.gates.extend([Gate("H", (t,)), Gate("CNOT", (c, t)),
                              Gate("H", (t,))])
        elif g.kind == "RZ":
            out.gates.extend(Gate(k, g.wires)
                             for k in _RZ_WORDS[int(g.octant)])
        elif g.kind == "CPHASE":
            raise CompileError("no decomposition registered for CPHASE")
        else:
            out.gates.append(g)
    return out


# ---------------------------------------------------------------------------
# simulation helpers (oracles for the later stages)

def simulate_classical(circuit: CircuitIR, bits: Sequence[int]) -> list[int]:
    """Run a reversible X/CNOT/TOFFOLI/SWAP circuit on classical bits."""
    v = [int(x) & 1 for x in bits]
    if len(v) != circuit.num_wires:
        raise ValueError("one input bit per wire")
    for g in circuit.gates:
        if g.kind == "X":
            v[g.wires[0]] ^= 1
        elif g.kind == "CNOT":
            v[g.wires[1]] ^= v[g.wires[0]]
        elif g.kind == "TOFFOLI":
            v[g.wires[2]] ^= v[g.wires[0]] & v[g.wires[1]]
        elif g.kind == "SWAP":
            a, b = g.wires
            v[a], v[b] = v[b], v[a]
        else:
            raise CompileError(f"{g.kind} is not a classical gate")
    return v


def simulate_statevector(circuit: CircuitIR,
                         state: StateVector | None = None) -> StateVector:
    if state is None:
        state = sc.new_state(circuit.num_wires)
    for g in circuit.gates:
        sc.apply_gate(state, g)
    return state


# ---------------------------------------------------------------------------
# swap insertion for a line of qubits

@dataclasses.dataclass
class RoutedCircuit:
    """A circuit whose multi-qubit gates all touch adjacent line positions,
    plus the logical-to-physical map the inserted swaps end with."""

    circuit: CircuitIR
    final_positions: tuple[int, ...]
    swap_count: int


def _route_score(pos: list[int], upcoming: list[tuple[int, int]],
                 decay: float) -> float:
    score = 0.0
    weight = 1.0
    for u, v in upcoming:
        score += weight * (abs(pos[u] - pos[v]) - 1)
        weight *= decay
    return score


def insert_swaps(circuit: CircuitIR, lookahead: int = 20,
                 decay: float = 0.6) -> RoutedCircuit:
    """Greedy line router: before each non-adjacent two-qubit gate, swap the
    endpoint whose move scores best against the next ``lookahead`` pending
    two-qubit gates.  Multi-control gates must be decomposed first."""
    for g in circuit.gates:
        if len(g.wires) > 2:
            raise CompileError("route after decomposing to two-qubit gates")
    n = circuit.num_wires
    pos = list(range(n))      # logical -> physical
    holder = list(range(n))   # physical -> logical
    out = CircuitIR(n, labels=tuple(f"q{i}" for i in range(n)))
    pending = [(g.wires[0], g.wires[1]) for g in circuit.gates
               if len(g.wires) == 2]
    seen_2q = 0
    swaps = 0

    def do_swap(pa: int, pb: int) -> None:
        nonlocal swaps
        la, lb = holder[pa], holder[pb]
        holder[pa], holder[pb] = lb, la
        pos[la], pos[lb] = pb, pa
        out.gates.append(Gate("SWAP", (pa, pb)))
        swaps += 1

    for g in circuit.gates:
        if len(g.wires) == 1:
            out.gates.append(Gate(g.kind, (pos[g.wires[0]],),
                                  octant=g.octant))
            continue
        u, v = g.wires
        seen_2q += 1
        while abs(pos[u] - pos[v]) > 1:
            upcoming = pending[seen_2q - 1:seen_2q - 1 + lookahead]
            best = None
            lo, hi = min(pos[u], pos[v]), max(pos[u], pos[v])
            for pa, pb in ((lo, lo + 1), (hi - 1, hi)):
                do_swap(pa, pb)
                s = _route_score(pos, upcoming, decay)
                if best is None or s < best[0]:
                    best = (s, pa, pb)
                do_swap(pa, pb)  # undo trial
                out.gates.pop()
                out.gates.pop()
                swaps -= 2
            do_swap(best[1], best[2])
        out.gates.append(Gate(g.kind, (pos[u], pos[v]), octant=g.octant))
    return RoutedCircuit(out, tuple(pos), swaps)


# ---------------------------------------------------------------------------
# brick placement

def _mat_rz(k: int) -> np.ndarray:
    return np.array([[1, 0], [0, np.exp(1j * k * np.pi / 4)]])


_H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
_CZ = np.diag([1, 1, 1, -1]).astype(complex)


def _mat_rx(k: int) -> np.ndarray:
    return _H @ _mat_rz(k) @ _H


def _family(a1: int, a2: int, a3: int) -> np.ndarray:
    return _mat_rz(-a3) @ _mat_rx(-a2) @ _mat_rz(-a1)


def _canon_key(m: np.ndarray) -> tuple:
    flat = m.ravel()
    for x in flat:
        if abs(x) > 1e-9:
            m = m * (x.conjugate() / abs(x))
            break
    return tuple(np.round(m.ravel(), 6).tolist())


_LETTER_TRIPLES = {"I": (0, 0, 0), "H": (6, 6, 6), "X": (0, 4, 0),
                   "Z": (4, 0, 0), "S": (6, 0, 0), "SDG": (2, 0, 0),
                   "T": (7, 0, 0), "TDG": (1, 0, 0)}

_EULER_TABLE: dict[tuple, tuple[int, int, int]] | None = None
_CNOT_TABLES: list[dict] | None = None


def _euler_table() -> dict[tuple, tuple[int, int, int]]:
    global _EULER_TABLE
    if _EULER_TABLE is None:
        table: dict[tuple, tuple[int, int, int]] = {}
        for a1 in range(8):
            for a2 in range(8):
                for a3 in range(8):
                    table.setdefault(_canon_key(_family(a1, a2, a3)),
                                     (a1, a2, a3))
        _EULER_TABLE = table
    return _EULER_TABLE


def _cnot_tables() -> list[dict]:
    """key -> (control_row, target_row) for control on the low row (index
    0) and on the high row (index 1)."""
    global _CNOT_TABLES
    if _CNOT_TABLES is None:
        rx2 = _mat_rx(-2)
        tables: list[dict] = [{}, {}]
        eye = np.eye(2)
        for ctrl_high in (0, 1):
            if ctrl_high:
                coupler = _CZ @ np.kron(rx2, eye) @ _CZ
            else:
                coupler = _CZ @ np.kron(eye, rx2) @ _CZ
            for c1 in range(8):
                pre_c = _mat_rz(-c1)
                for t1 in range(8):
                    for t2 in range(8):
                        pre_t = _mat_rx(-t2) @ _mat_rz(-t1)
                        pre = (np.kron(pre_t, pre_c) if ctrl_high
                               else np.kron(pre_c, pre_t))
                        base = coupler @ pre
                        for c3 in range(8):
                            post = (np.kron(eye, _mat_rz(-c3)) if ctrl_high
                                    else np.kron(_mat_rz(-c3), eye))
                            rows = ((c1, 0, c3, 0), (t1, t2, 0, 2))
                            tables[ctrl_high].setdefault(
                                _canon_key(post @ base), rows)
        _CNOT_TABLES = tables
    return _CNOT_TABLES


_CNOT_MATS = {
    0: np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
                dtype=complex),
    1: np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]],
                dtype=complex),
}


@dataclasses.dataclass
class PlacementReport:
    layers: int
    bricks_used: int
    half_bricks_used: int
    merged_gates: int
    absorbed_gates: int


def place_bricks(circuit: CircuitIR) -> tuple[BrickworkLayout, PlacementReport]:
    """Schedule a routed nearest-neighbour circuit onto the brickwork grid.

    One-qubit runs merge while their product stays an octant Euler triple;
    a CNOT tries to absorb its wires' pending products into its own brick.
    Bricks are placed greedily at the earliest layer whose pairing includes
    the target rows.
    """
    n = circuit.num_wires
    if n < 2:
        raise CompileError("the grid needs at least two rows")
    euler = _euler_table()
    ctables = _cnot_tables()
    identity = np.eye(2, dtype=complex)

    pending: list[np.ndarray | None] = [None] * n
    frontier = [1] * n
    slots: dict[tuple[int, int], tuple[int, int, int, int]] = {}
    merged = absorbed = 0

    def letter_matrix(g: Gate) -> np.ndarray:
        if g.kind == "RZ":
            return _mat_rz(int(g.octant))
        a1, a2, a3 = _LETTER_TRIPLES[g.kind]
        return _family(a1, a2, a3)

    def pair_start(row: int, layer: int) -> int | None:
        # rows here are 0-based wires; the grid pairs 1-based rows
        pairs, _ = layer_pairs(n, layer)
        for a, b in pairs:
            if row + 1 in (a, b):
                return a - 1
        return None

    def place_single(row: int, triple: tuple[int, int, int]) -> None:
        layer = frontier[row]
        slots[(layer, row)] = (*triple, 0)
        frontier[row] = layer + 1

    def flush(row: int) -> None:
        if pending[row] is None:
            return
        key = _canon_key(pending[row])
        triple = euler.get(key)
        if triple is None:
            raise CompileError("pending product left the placeable family")
        place_single(row, triple)
        pending[row] = None

    def feed_single(row: int, mat: np.ndarray) -> None:
        nonlocal merged
        if pending[row] is None:
            pending[row] = mat
            return
        product = mat @ pending[row]
        if _canon_key(product) in euler:
            pending[row] = product
            merged += 1
        else:
            flush(row)
            pending[row] = mat

    def place_cnot(ctrl: int, tgt: int) -> None:
        nonlocal absorbed
        lo, hi = min(ctrl, tgt), max(ctrl, tgt)
        if hi - lo != 1:
            raise CompileError("place after routing: CNOT wires not adjacent")
        ctrl_high = int(ctrl == hi)
        base = _CNOT_MATS[ctrl_high]
        p_lo = pending[lo] if pending[lo] is not None else identity
        p_hi = pending[hi] if pending[hi] is not None else identity
        trials = (
            (np.kron(p_lo, p_hi), True, True),
            (np.kron(p_lo if ctrl_high else identity,
                     p_hi if not ctrl_high else identity), ctrl_high == 1,
             ctrl_high == 0),
            (np.kron(identity if ctrl_high else p_lo,
                     identity if not ctrl_high else p_hi), ctrl_high == 0,
             ctrl_high == 1),
            (np.eye(4, dtype=complex), False, False),
        )
        for pre, takes_lo, takes_hi in trials:
            rows = ctables[ctrl_high].get(_canon_key(base @ pre))
            if rows is None:
                continue
            if takes_lo and pending[lo] is not None:
                absorbed += 1
            if takes_hi and pending[hi] is not None:
                absorbed += 1
            if not takes_lo:
                flush(lo)
            else:
                pending[lo] = None
            if not takes_hi:
                flush(hi)
            else:
                pending[hi] = None
            crow, trow = rows
            row_lo, row_hi = (trow, crow) if ctrl_high else (crow, trow)
            layer = max(frontier[lo], frontier[hi])
            while pair_start(lo, layer) != lo:
                layer += 1
            slots[(layer, lo)] = row_lo
            slots[(layer, hi)] = row_hi
            frontier[lo] = frontier[hi] = layer + 1
            return
        raise CompileError("CNOT absorption table lookup failed")

    for g in circuit.gates:
        if g.kind == "SWAP":
            a, b = g.wires
            for c, t in ((a, b), (b, a), (a, b)):
                place_cnot(c, t)
        elif g.kind == "CNOT":
            place_cnot(*g.wires)
        elif len(g.wires) == 1:
            feed_single(g.wires[0], letter_matrix(g))
        else:
            raise CompileError(f"{g.kind} cannot be placed; decompose first")
    for row in range(n):
        flush(row)

    m = max((layer for layer, _ in slots), default=1)
    layout = BrickworkLayout.create(n, m)
    for (layer, row), angles in slots.items():
        for col, angle in enumerate(angles):
            if angle:
                layout.phi[(4 * (layer - 1) + 1 + col, row + 1)] = \
                    sc.Octant(angle)
    # used-slot census: a pair with both rows written counts as one brick,
    # a lone written row as a half brick
    bricks = halves = 0
    seen: set[tuple[int, int]] = set()
    for layer, row in slots:
        start = pair_start(row, layer)
        if start is not None and (layer, start) not in seen:
            seen.add((layer, start))
            if (layer, start) in slots and (layer, start + 1) in slots:
                bricks += 1
            else:
                halves += 1
        elif start is None:
            halves += 1
    report = PlacementReport(m, bricks, halves, merged, absorbed)
    return layout, report
