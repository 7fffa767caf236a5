"""Resource accounting for the fault-tolerant blind-computation protocols.

Costs are exact ``Fraction`` vectors over (T gates, two-qubit gates, other
one-qubit gates, measurements), plus transmitted physical qubits.  Headline
totals use the exact per-octant average unit costs, so they are reproducible
to the digit; a sampled mode draws the random angles instead and reports the
empirical deviation.

Rounding in the comparison tables is half-away-from-zero; the ratios are
kept as Fractions until the final rounding step, never floats.
"""
from __future__ import annotations

import dataclasses
from fractions import Fraction

import numpy as np

from bqcsim.brickwork import brick_census

FORMAT = "bqcsim-ledger"
VERSION = 1


def round_half_away(q: Fraction | int) -> int:
    """Round to the nearest integer, halves away from zero.  The builtin
    round() rounds halves to even and must not be used for the tables."""
    q = Fraction(q)
    n, d = q.numerator, q.denominator
    if n >= 0:
        return (2 * n + d) // (2 * d)
    return -((-2 * n + d) // (2 * d))


@dataclasses.dataclass(frozen=True)
class CostVector:
    t_gates: Fraction = Fraction(0)
    two_qubit: Fraction = Fraction(0)
    one_qubit: Fraction = Fraction(0)
    measurements: Fraction = Fraction(0)
    transmitted: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        for f in dataclasses.fields(self):
            object.__setattr__(self, f.name, Fraction(getattr(self, f.name)))

    def __add__(self, other: "CostVector") -> "CostVector":
        return CostVector(*(a + b for a, b in
                            zip(dataclasses.astuple(self),
                                dataclasses.astuple(other))))

    def __rmul__(self, k) -> "CostVector":
        k = Fraction(k)
        return CostVector(*(k * a for a in dataclasses.astuple(self)))

    def __mul__(self, k) -> "CostVector":
        return self.__rmul__(k)

    def gate_tuple(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        return (self.t_gates, self.two_qubit, self.one_qubit,
                self.measurements)


def _cv(t, two, one, meas, trans=0) -> CostVector:
    return CostVector(Fraction(t), Fraction(two), Fraction(one),
                      Fraction(meas), Fraction(trans))


# unit costs of the encoded gadgets (worst-case conditional fixes included)
ZERO_PREP = _cv(0, 108, 19, 18)
FT_MEAS_Z = _cv(0, 42, 4, 11)
FT_T = _cv(21, 262, 50, 35)
TRANSVERSAL_1Q = _cv(0, 0, 7, 0)
TRANSVERSAL_2Q = _cv(0, 7, 0, 0)

# the octant phase word: Clifford letters go transversally, T letters spend
# a full teleported-T round
_WORD_SHAPE = {0: (0, 0), 1: (1, 0), 2: (0, 1), 3: (1, 1), 4: (0, 1),
               5: (1, 1), 6: (0, 1), 7: (1, 1)}  # octant -> (#T, #clifford)

PHASE_SHIFT_BY_OCTANT = {
    k: nt * FT_T + nc * TRANSVERSAL_1Q
    for k, (nt, nc) in _WORD_SHAPE.items()}

PHASE_SHIFT_AVG = Fraction(1, 8) * sum(PHASE_SHIFT_BY_OCTANT.values(),
                                       CostVector())

# one blinded input qubit: encoded |0>, transversal H, then the phase word
ALICE_PREP_BY_OCTANT = {
    k: ZERO_PREP + TRANSVERSAL_1Q + v
    for k, v in PHASE_SHIFT_BY_OCTANT.items()}
ALICE_PREP_AVG = ZERO_PREP + TRANSVERSAL_1Q + PHASE_SHIFT_AVG

# one measured node on the server: phase shift to the announced angle,
# transversal H, destructive logical readout
NODE_MEASURE_AVG = PHASE_SHIFT_AVG + TRANSVERSAL_1Q + FT_MEAS_Z

# a full brick: 8 measured nodes plus 10 transversal entangling edges; a
# half brick: 4 nodes plus 4 edges
BRICK = 8 * NODE_MEASURE_AVG + 10 * TRANSVERSAL_2Q
HALF_BRICK = 4 * NODE_MEASURE_AVG + 4 * TRANSVERSAL_2Q

# the same accounting without encoding (the plain protocol): per node an
# average rotation word (half a T, 3/4 of a Clifford letter), one H, one
# measurement; each edge one CZ
PLAIN_NODE = _cv(Fraction(1, 2), 0, Fraction(7, 4), 1)
PLAIN_BRICK = 8 * PLAIN_NODE + _cv(0, 10, 0, 0)
PLAIN_HALF = 4 * PLAIN_NODE + _cv(0, 4, 0, 0)

PLAIN_ALICE_PREP = _cv(Fraction(1, 2), 0, Fraction(7, 4), 0, 1)

BLOCK_SIZE = 7          # physical qubits per logical qubit
ANCILLA_BUDGET = 15     # magic block + cat + verification wire
CANDIDATES = 8          # server-assisted preparations per node

# comparison-study instance: the 10-bit adder compiled to bricks
STUDY_GRID = (35, 612)
STUDY_CIRCUIT_TALLY = {"t": 441, "cnot": 413, "one_qubit": 144, "wires": 35}


@dataclasses.dataclass(frozen=True)
class Estimate:
    protocol: str
    n: int
    m: int
    bricks: int
    half_bricks: int
    nodes: int
    measured_nodes: int
    alice: CostVector
    bob: CostVector
    transmitted: Fraction
    buffer_qubits: int

    @property
    def total(self) -> CostVector:
        return self.alice + self.bob


PROTOCOLS = ("bfk_basic", "protocol1", "protocol2_bsa")


def estimate(protocol: str, n: int, m: int) -> Estimate:
    """Exact expected resource totals over an n-row, m-layer pattern."""
    bricks, halves, nodes = brick_census(n, m)
    measured = nodes - n
    if protocol == "bfk_basic":
        alice = nodes * PLAIN_ALICE_PREP
        bob = bricks * PLAIN_BRICK + halves * PLAIN_HALF
        transmitted = Fraction(nodes)
        buffer_q = 2
    elif protocol == "protocol1":
        alice = nodes * (ALICE_PREP_AVG + _cv(0, 0, 0, 0, BLOCK_SIZE))
        bob = bricks * BRICK + halves * HALF_BRICK
        transmitted = Fraction(nodes * BLOCK_SIZE)
        buffer_q = 2 * BLOCK_SIZE
    elif protocol == "protocol2_bsa":
        # the server prepares all eight candidate blocks per node and ships
        # them out; the client's part is classical except for returning the
        # selected block
        prep = CANDIDATES * nodes * (ALICE_PREP_AVG
                                     + _cv(0, 0, 0, 0, BLOCK_SIZE))
        bob = prep + bricks * BRICK + halves * HALF_BRICK
        alice = _cv(0, 0, 0, 0, nodes * BLOCK_SIZE)
        transmitted = Fraction(nodes * (CANDIDATES + 1) * BLOCK_SIZE)
        buffer_q = CANDIDATES * BLOCK_SIZE
    else:
        raise ValueError(f"unknown protocol {protocol!r}; "
                         f"choose from {PROTOCOLS}")
    return Estimate(protocol, n, m, bricks, halves, nodes, measured,
                    alice, bob, transmitted, buffer_q)


def estimate_ft_circuit(t: int, cnot: int, one_qubit: int,
                        wires: int) -> tuple[CostVector, int]:
    """Cost of running a decomposed circuit directly on encoded blocks
    (not blind): every T spends a teleported-T round, everything else is
    transversal.  Returns (cost, physical qubits)."""
    cost = t * FT_T + cnot * TRANSVERSAL_2Q + one_qubit * TRANSVERSAL_1Q
    return cost, wires * BLOCK_SIZE + ANCILLA_BUDGET


def sampled_estimate(protocol: str, n: int, m: int, seed: int,
                     fraction: float = 1.0) -> dict:
    """Draw the per-node octants instead of averaging; returns the drawn
    totals next to the exact expectation with their relative deviation."""
    exact = estimate(protocol, n, m)
    rng = np.random.default_rng(seed)
    count = exact.nodes if fraction >= 1.0 else max(1, int(exact.nodes
                                                           * fraction))
    if protocol == "bfk_basic":
        per_octant = {k: _cv(1 if k % 2 else 0, 0,
                             1 + (1 if _WORD_SHAPE[k][1] else 0), 0)
                      for k in range(8)}
    elif protocol == "protocol1":
        per_octant = ALICE_PREP_BY_OCTANT
    elif protocol == "protocol2_bsa":
        # all eight candidates are always prepared: nothing to sample
        per_octant = {k: 8 * ALICE_PREP_AVG for k in range(8)}
    else:
        raise ValueError(f"unknown protocol {protocol!r}")
    draws = rng.integers(0, 8, size=count)
    drawn = CostVector()
    for k in range(8):
        drawn = drawn + int(np.count_nonzero(draws == k)) * per_octant[k]
    if fraction < 1.0:
        drawn = Fraction(exact.nodes, count) * drawn
    if protocol == "bfk_basic":
        expected = exact.nodes * _cv(Fraction(1, 2), 0, Fraction(7, 4), 0)
    elif protocol == "protocol1":
        expected = exact.nodes * ALICE_PREP_AVG
    else:
        expected = 8 * exact.nodes * ALICE_PREP_AVG
    rel = {}
    for name in ("t_gates", "two_qubit", "one_qubit", "measurements"):
        e = getattr(expected, name)
        d = getattr(drawn, name)
        rel[name] = float((d - e) / e) if e else 0.0
    return {"nodes_drawn": count, "drawn": drawn, "expected": expected,
            "relative_deviation": rel}


# ---------------------------------------------------------------------------
# the comparison tables

@dataclasses.dataclass(frozen=True)
class RatioRow:
    label: str
    ratios: tuple[int, ...]


def _ratio(num: Fraction, den: Fraction) -> int:
    return round_half_away(Fraction(num, 1) / Fraction(den, 1))


def _study_parts() -> dict[str, CostVector]:
    n, m = STUDY_GRID
    tal = STUDY_CIRCUIT_TALLY
    bare = _cv(tal["t"], tal["cnot"], tal["one_qubit"], 0)
    ft_cost, _ = estimate_ft_circuit(tal["t"], tal["cnot"],
                                     tal["one_qubit"], tal["wires"])
    basic = estimate("bfk_basic", n, m)
    p1 = estimate("protocol1", n, m)
    bsa = estimate("protocol2_bsa", n, m)
    return {"bare": bare, "ft_circuit": ft_cost, "basic_bob": basic.bob,
            "p1_bob": p1.bob, "p1_alice": p1.alice, "bsa_bob": bsa.bob}


def overhead_vs_bare() -> list[RatioRow]:
    """T / two-qubit / one-qubit multipliers over the unencoded circuit."""
    p = _study_parts()
    bare = p["bare"].gate_tuple()[:3]

    def row(label: str, cost: CostVector) -> RatioRow:
        return RatioRow(label, tuple(_ratio(c, b) for c, b in
                                     zip(cost.gate_tuple()[:3], bare)))

    return [row("ft_circuit", p["ft_circuit"]),
            row("blind_basic_server", p["basic_bob"]),
            row("blind_ft_server", p["p1_bob"]),
            row("blind_ft_client", p["p1_alice"]),
            row("server_assisted", p["bsa_bob"])]


def overhead_vs_ft_circuit() -> list[RatioRow]:
    """Blindness premium: each party against the non-blind encoded run."""
    p = _study_parts()
    base = p["ft_circuit"].gate_tuple()

    def row(label: str, cost: CostVector) -> RatioRow:
        return RatioRow(label, tuple(_ratio(c, b) for c, b in
                                     zip(cost.gate_tuple(), base)))

    return [row("server", p["p1_bob"]), row("client", p["p1_alice"]),
            row("server_assisted", p["bsa_bob"])]


def overhead_vs_plain_blind() -> list[RatioRow]:
    """Fault-tolerance premium: against the unencoded blind server run."""
    p = _study_parts()
    base = p["basic_bob"].gate_tuple()

    def row(label: str, cost: CostVector) -> RatioRow:
        return RatioRow(label, tuple(_ratio(c, b) for c, b in
                                     zip(cost.gate_tuple(), base)))

    return [row("server", p["p1_bob"]), row("client", p["p1_alice"]),
            row("server_assisted", p["bsa_bob"])]


# frozen hand-checked totals for the study instance; cross_check() recomputes
# every one of them from the unit costs
EXPECTED = {
    "census": (10404, 612, 85715),
    "edges": 106488,
    "basic_bob": (42840, 106488, 149940, 85680),
    "p1_alice": (Fraction(1800015, 2), 20485885,
                 Fraction(19285875, 4), Fraction(6085765, 2)),
    "p1_bob": (899640, 15568056, 3534300, 2441880),
    "bsa_prep": (7200060, 163887080, 38571750, 24343060),
    "brick": (84, 1454, 330, 228),
    "half_brick": (42, 720, 165, 114),
    "ft_circuit": (9261, 118433, 23058, 15435),
    "ft_circuit_qubits": 260,
    "bandwidth": (85715, 600005, 5400045),
    "buffers": (2, 14, 56),
    "vs_bare": {"ft_circuit": (21, 287, 160),
                "blind_basic_server": (97, 258, 1041),
                "blind_ft_server": (2040, 37695, 24544),
                "blind_ft_client": (2041, 49603, 33482),
                "server_assisted": (18367, 434516, 292403)},
    "vs_ft_circuit": {"server": (97, 131, 153, 158),
                      "client": (97, 173, 209, 197),
                      "server_assisted": (875, 1515, 1826, 1735)},
    "vs_plain_blind": {"server": (21, 146, 24, 29),
                       "client": (21, 192, 32, 36),
                       "server_assisted": (189, 1685, 281, 313)},
}


@dataclasses.dataclass(frozen=True)
class CheckRow:
    label: str
    computed: object
    expected: object

    @property
    def ok(self) -> bool:
        return self.computed == self.expected


def cross_check() -> list[CheckRow]:
    """Recompute every frozen study total from the unit-cost model."""
    n, m = STUDY_GRID
    rows: list[CheckRow] = []
    census = brick_census(n, m)
    rows.append(CheckRow("census", census, EXPECTED["census"]))
    basic = estimate("bfk_basic", n, m)
    rows.append(CheckRow("edges", int(basic.bob.two_qubit),
                         EXPECTED["edges"]))
    rows.append(CheckRow("basic_bob",
                         tuple(basic.bob.gate_tuple()),
                         tuple(Fraction(x) for x in EXPECTED["basic_bob"])))
    p1 = estimate("protocol1", n, m)
    rows.append(CheckRow("p1_alice", tuple(p1.alice.gate_tuple()),
                         tuple(Fraction(x) for x in EXPECTED["p1_alice"])))
    rows.append(CheckRow("p1_bob", tuple(p1.bob.gate_tuple()),
                         tuple(Fraction(x) for x in EXPECTED["p1_bob"])))
    prep = CANDIDATES * census[2] * ALICE_PREP_AVG
    rows.append(CheckRow("bsa_prep", tuple(prep.gate_tuple()),
                         tuple(Fraction(x) for x in EXPECTED["bsa_prep"])))
    rows.append(CheckRow("brick", tuple(BRICK.gate_tuple()),
                         tuple(Fraction(x) for x in EXPECTED["brick"])))
    rows.append(CheckRow("half_brick", tuple(HALF_BRICK.gate_tuple()),
                         tuple(Fraction(x)
                               for x in EXPECTED["half_brick"])))
    ft_cost, ft_qubits = estimate_ft_circuit(**STUDY_CIRCUIT_TALLY)
    rows.append(CheckRow("ft_circuit", tuple(ft_cost.gate_tuple()),
                         tuple(Fraction(x) for x in EXPECTED["ft_circuit"])))
    rows.append(CheckRow("ft_circuit_qubits", ft_qubits,
                         EXPECTED["ft_circuit_qubits"]))
    bsa = estimate("protocol2_bsa", n, m)
    rows.append(CheckRow("bandwidth",
                         (int(basic.transmitted), int(p1.transmitted),
                          int(bsa.transmitted)), EXPECTED["bandwidth"]))
    rows.append(CheckRow("buffers",
                         (basic.buffer_qubits, p1.buffer_qubits,
                          bsa.buffer_qubits), EXPECTED["buffers"]))
    for name, table in (("vs_bare", overhead_vs_bare()),
                        ("vs_ft_circuit", overhead_vs_ft_circuit()),
                        ("vs_plain_blind", overhead_vs_plain_blind())):
        for row in table:
            rows.append(CheckRow(f"{name}.{row.label}", row.ratios,
                                 EXPECTED[name][row.label]))
    return rows


# ---------------------------------------------------------------------------
# rendering

def _fmt_fraction(q: Fraction) -> str:
    if q.denominator == 1:
        return f"{q.numerator:,}"
    return f"{float(q):,.2f}"


def render_estimate(est: Estimate) -> str:
    lines = [f"{FORMAT} {VERSION}",
             f"protocol {est.protocol} on {est.n} x {est.m} "
             f"({est.bricks} bricks, {est.half_bricks} half bricks, "
             f"{est.nodes} nodes)"]
    header = f"{'party':<8}{'T':>14}{'2-qubit':>16}{'1-qubit':>16}" \
             f"{'measure':>14}"
    lines.append(header)
    for name, cost in (("client", est.alice), ("server", est.bob),
                       ("total", est.total)):
        t, two, one, meas = cost.gate_tuple()
        lines.append(f"{name:<8}{_fmt_fraction(t):>14}"
                     f"{_fmt_fraction(two):>16}{_fmt_fraction(one):>16}"
                     f"{_fmt_fraction(meas):>14}")
    lines.append(f"transmitted qubits: {_fmt_fraction(est.transmitted)}")
    lines.append(f"receive buffer:     {est.buffer_qubits} qubits")
    return "\n".join(lines)


def render_estimate_csv(est: Estimate) -> str:
    rows = [f"# {FORMAT} {VERSION}",
            "party,t_gates,two_qubit,one_qubit,measurements"]
    for name, cost in (("client", est.alice), ("server", est.bob)):
        t, two, one, meas = (float(x) for x in cost.gate_tuple())
        rows.append(f"{name},{t},{two},{one},{meas}")
    rows.append(f"transmitted,{float(est.transmitted)},,,")
    return "\n".join(rows)


def estimate_as_dict(est: Estimate) -> dict:
    def unpack(cost: CostVector) -> dict:
        return {k: [v.numerator, v.denominator] for k, v in
                zip(("t_gates", "two_qubit", "one_qubit", "measurements",
                     "transmitted"), dataclasses.astuple(cost))}

    return {"format": FORMAT, "version": VERSION,
            "protocol": est.protocol, "rows": est.n, "layers": est.m,
            "bricks": est.bricks, "half_bricks": est.half_bricks,
            "nodes": est.nodes, "client": unpack(est.alice),
            "server": unpack(est.bob),
            "transmitted": [est.transmitted.numerator,
                            est.transmitted.denominator],
            "buffer_qubits": est.buffer_qubits}
