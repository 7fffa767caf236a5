"""Two-party blind-computation sessions over a brickwork pattern.

The client (Alice) owns the program angles, the per-qubit preparation
octants theta, and the measurement-blinding bits r; the server (Bob) holds
the entangled pattern and measures wherever the client points.  Every
exchanged message is recorded in a transcript whose payloads are restricted
to a per-variant whitelist, so the serialized view is exactly what the
server learns.  Client secrets live in AliceSecrets, which is never
serialized.

Backends: "exact" drives a statevector at the logical layer and is checked
against the reference circuit; "tally" replaces outcomes with coin flips
and scales to the full study grid, keeping only costs and the transcript.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
from typing import Mapping

import numpy as np

from bqcsim import brickwork as bw
from bqcsim import ledger
from bqcsim import simcore as sc
from bqcsim import steane as st
from bqcsim.simcore import Gate, Octant, OpCounter, StateVector

FORMAT = "bqcsim-transcript"
VERSION = 1

A_TO_B = "a->b"
B_TO_A = "b->a"

# df = 7 at significance 0.01; announced angles must look uniform on the
# octant ring to anyone holding only the transcript
CHI2_CRITICAL = 18.475
MI_LIMIT_BITS = 0.02


class ProtocolAbortError(RuntimeError):
    """A classical message exceeded its retransmission budget."""


class BlindnessError(RuntimeError):
    """A message payload tried to carry a non-whitelisted field."""


@dataclasses.dataclass(frozen=True)
class ChannelConfig:
    depolarizing: float = 0.0
    classical_loss: float = 0.0
    retransmit_limit: int = 5


@dataclasses.dataclass(frozen=True)
class QubitTransfer:
    x: int
    y: int
    handle: str
    variant = "qubit"

    def payload(self) -> dict:
        return {"x": self.x, "y": self.y, "handle": self.handle}


@dataclasses.dataclass(frozen=True)
class AngleAnnounce:
    x: int
    y: int
    delta: int
    variant = "angle"

    def payload(self) -> dict:
        return {"x": self.x, "y": self.y, "delta": self.delta}


@dataclasses.dataclass(frozen=True)
class ResultAnnounce:
    x: int
    y: int
    bit: int
    variant = "result"

    def payload(self) -> dict:
        return {"x": self.x, "y": self.y, "bit": self.bit}


@dataclasses.dataclass(frozen=True)
class SelectionReturn:
    x: int
    y: int
    handle: str
    variant = "selection"

    def payload(self) -> dict:
        return {"x": self.x, "y": self.y, "handle": self.handle}


WHITELIST = {
    "qubit": ("handle", "x", "y"),
    "angle": ("delta", "x", "y"),
    "result": ("bit", "x", "y"),
    "selection": ("handle", "x", "y"),
}


@dataclasses.dataclass
class AliceSecrets:
    """Everything the server must not learn.  Lives only in process memory;
    repr is redacted so it cannot leak through logging."""

    program: dict[tuple[int, int], int]
    theta: dict[tuple[int, int], int]
    r: dict[tuple[int, int], int]
    selection: dict[tuple[int, int], int] | None = None

    def __repr__(self) -> str:  # pragma: no cover - trivial
        return f"AliceSecrets(coords={len(self.theta)}, redacted)"


class Transcript:
    """Append-only public record of the session.  Payload keys are checked
    against the variant whitelist at record time, so a client secret cannot
    reach the serialized form by construction."""

    def __init__(self, keep_entries: bool = True):
        self.keep_entries = keep_entries
        self.entries: list[dict] = []
        self._seq = {A_TO_B: 0, B_TO_A: 0}
        self.counts: dict[tuple[str, str], int] = {}
        self.dropped = 0

    def record(self, direction: str, msg, delivered: bool = True) -> dict:
        payload = msg.payload()
        if tuple(sorted(payload)) != WHITELIST[msg.variant]:
            raise BlindnessError(
                f"payload fields {sorted(payload)} not allowed for "
                f"{msg.variant!r}")
        seq = self._seq[direction]
        self._seq[direction] = seq + 1
        key = (direction, msg.variant)
        self.counts[key] = self.counts.get(key, 0) + 1
        if not delivered:
            self.dropped += 1
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        entry = {"direction": direction, "sequence": seq,
                 "variant": msg.variant, "payload": payload,
                 "digest": hashlib.sha256(blob.encode()).hexdigest()[:16],
                 "delivered": delivered}
        if self.keep_entries:
            self.entries.append(entry)
        return entry

    def to_jsonl(self) -> str:
        head = json.dumps({"format": FORMAT, "version": VERSION},
                          sort_keys=True)
        lines = [head] + [json.dumps(e, sort_keys=True)
                          for e in self.entries]
        return "\n".join(lines) + "\n"

    def delivered(self, variant: str | None = None) -> list[dict]:
        out = [e for e in self.entries if e["delivered"]]
        if variant is not None:
            out = [e for e in out if e["variant"] == variant]
        return out


def omniscient_view(transcript: Transcript, secrets: AliceSecrets) -> dict:
    """Debug-only joint view; the client namespace never touches the
    transcript serialization path."""
    return {
        "transcript": transcript.entries,
        "client": {
            "program": {f"{x},{y}": v
                        for (x, y), v in secrets.program.items()},
            "theta": {f"{x},{y}": v for (x, y), v in secrets.theta.items()},
            "r": {f"{x},{y}": v for (x, y), v in secrets.r.items()},
            "selection": None if secrets.selection is None else {
                f"{x},{y}": v for (x, y), v in secrets.selection.items()},
        },
    }


class _Channel:
    def __init__(self, config: ChannelConfig, rng: np.random.Generator,
                 transcript: Transcript):
        self.config = config
        self.rng = rng
        self.transcript = transcript

    def classical(self, direction: str, msg) -> None:
        for _ in range(self.config.retransmit_limit + 1):
            ok = (self.config.classical_loss <= 0.0 or
                  self.rng.random() >= self.config.classical_loss)
            self.transcript.record(direction, msg, delivered=ok)
            if ok:
                return
        raise ProtocolAbortError(
            f"{msg.variant} at ({msg.x},{msg.y}) lost "
            f"{self.config.retransmit_limit + 1} times")

    def qubit(self, direction: str, msg, state: StateVector | None,
              wires: tuple[int, ...] = ()) -> None:
        # qubits are not retransmittable; noise acts on the payload instead
        self.transcript.record(direction, msg, delivered=True)
        if state is not None and self.config.depolarizing > 0.0:
            for w in wires:
                sc.depolarize(state, w, self.config.depolarizing, self.rng)


class _Buffers:
    """Receive-buffer bookkeeping: physical qubits received but not yet
    consumed (entangled / measured / selected) by each party."""

    def __init__(self):
        self.held = {"alice": 0, "bob": 0}
        self.high_water = 0

    def receive(self, party: str, weight: int) -> None:
        self.held[party] += weight
        self.high_water = max(self.high_water, self.held[party])

    def consume(self, party: str, weight: int) -> None:
        self.held[party] -= weight


@dataclasses.dataclass
class ProtocolResult:
    protocol: str
    backend: str
    n: int
    m: int
    transcript: Transcript
    estimate: ledger.Estimate
    corrected_outcomes: dict[tuple[int, int], int]
    raw_outcomes: dict[tuple[int, int], int]
    announced_angles: dict[tuple[int, int], int]
    output: StateVector | None
    buffer_high_water: int
    transmitted_prep: int
    transmitted_total: int

    def output_fidelity(self, reference: StateVector) -> float:
        if self.output is None:
            raise ValueError("no output state in tally mode")
        return sc.fidelity(self.output, reference)


def _draw_secrets(layout: bw.BrickworkLayout, rng: np.random.Generator,
                  with_selection: bool) -> AliceSecrets:
    cols = bw.columns(layout.m)
    coords = [(x, y) for x in range(1, cols + 1)
              for y in range(1, layout.n + 1)]
    theta = {c: int(rng.integers(0, 8)) for c in coords}
    r = {c: int(rng.integers(0, 2)) for c in coords if c[0] <= 4 * layout.m}
    program = {c: int(layout.phi[c]) for c in layout.phi}
    sel = {c: theta[c] for c in coords} if with_selection else None
    return AliceSecrets(program=program, theta=theta, r=r, selection=sel)


def _weight(protocol: str) -> int:
    return 1 if protocol == "bfk_basic" else ledger.BLOCK_SIZE


def run_protocol(protocol: str, layout: bw.BrickworkLayout, seed: int,
                 backend: str = "exact",
                 channel: ChannelConfig | None = None,
                 secrets: AliceSecrets | None = None,
                 record_transcript: bool = True) -> ProtocolResult:
    """Drive one full blind session.

    The client walks the pattern column-major, announcing
    delta = (-1)^{sX} phi + 4 sZ + theta + 4 r for every measured node and
    folding the server's raw bit b back to s = b xor r.  Output-column
    qubits come back at the end and are unblinded with Rz(-theta) plus the
    accumulated byproducts.
    """
    if protocol not in ledger.PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol!r}; "
                         f"choose from {ledger.PROTOCOLS}")
    if backend not in ("exact", "tally"):
        raise ValueError(f"unknown backend {backend!r}")
    config = channel or ChannelConfig()
    ss = np.random.SeedSequence(seed)
    alice_ss, bob_ss, chan_ss = ss.spawn(3)
    alice_rng = np.random.default_rng(alice_ss)
    bob_rng = np.random.default_rng(bob_ss)
    transcript = Transcript(keep_entries=record_transcript)
    chan = _Channel(config, np.random.default_rng(chan_ss), transcript)
    buffers = _Buffers()
    if secrets is None:
        secrets = _draw_secrets(layout, alice_rng,
                                with_selection=protocol == "protocol2_bsa")
    w = _weight(protocol)
    tag = "q" if protocol == "bfk_basic" else "blk"

    n, m = layout.n, layout.m
    cols = bw.columns(m)
    coords_all = [(x, y) for x in range(1, cols + 1)
                  for y in range(1, n + 1)]
    coords_meas = [(x, y) for (x, y) in coords_all if x <= 4 * m]
    out_col = [(cols, y) for y in range(1, n + 1)]

    state: StateVector | None = None
    if backend == "exact":
        state = sc.new_state(layout.qubits)
        bw.build_brickwork_state(
            state, layout,
            input_angles=[secrets.theta[(1, y)] for y in range(1, n + 1)],
            prep_angles={c: secrets.theta[c] for c in coords_all
                         if c[0] >= 2})

    def deliver(coord: tuple[int, int]) -> None:
        """Preparation exchange for one node."""
        x, y = coord
        if protocol == "protocol2_bsa":
            # the server ships all eight candidates in fixed octant order;
            # the client keeps the one matching her secret and hands it
            # back under a fresh handle
            for k in range(8):
                chan.qubit(B_TO_A, QubitTransfer(x, y, f"cand-{x}-{y}-{k}"),
                           None)
                buffers.receive("alice", w)
            chan.classical(A_TO_B, SelectionReturn(x, y, f"sel-{x}-{y}"))
            buffers.consume("alice", 8 * w)
            chan.qubit(A_TO_B, QubitTransfer(x, y, f"sel-{x}-{y}"), state,
                       (layout.wire(x, y),) if state is not None else ())
            buffers.receive("bob", w)
        else:
            chan.qubit(A_TO_B, QubitTransfer(x, y, f"{tag}-{x}-{y}"), state,
                       (layout.wire(x, y),) if state is not None else ())
            buffers.receive("bob", w)

    sent: set[tuple[int, int]] = set()

    def ensure(coord: tuple[int, int]) -> None:
        if coord not in sent:
            sent.add(coord)
            deliver(coord)

    s_bits: dict[tuple[int, int], int] = {}
    raw_bits: dict[tuple[int, int], int] = {}
    announced: dict[tuple[int, int], int] = {}
    for i, c in enumerate(coords_meas):
        ensure(c)
        if i + 1 < len(coords_meas):
            ensure(coords_meas[i + 1])  # one node of send-ahead
        x, y = c
        s_x, s_z = _flow(layout, s_bits, c)
        phi_c = bw.corrected_angle(layout.phi[c], s_x, s_z)
        delta = phi_c + Octant(secrets.theta[c]) + Octant(4 * secrets.r[c])
        announced[c] = int(delta)
        chan.classical(A_TO_B, AngleAnnounce(x, y, int(delta)))
        if backend == "exact":
            b = sc.measure_in_angle_basis(state, layout.wire(c[0], c[1]),
                                          delta, bob_rng)
        else:
            b = int(bob_rng.integers(0, 2))
        chan.classical(B_TO_A, ResultAnnounce(x, y, b))
        buffers.consume("bob", w)
        raw_bits[c] = b
        s_bits[c] = b ^ secrets.r[c]

    output: StateVector | None = None
    byp_x: dict[int, int] = {}
    byp_z: dict[int, int] = {}
    for y in range(1, n + 1):
        byp_x[y], byp_z[y] = _flow(layout, s_bits, (cols, y))
    for c in out_col:
        ensure(c)
        x, y = c
        chan.qubit(B_TO_A, QubitTransfer(x, y, f"out-{x}-{y}"), state,
                   (layout.wire(x, y),) if state is not None else ())
        buffers.consume("bob", w)
    if backend == "exact":
        # unblind: the teleported state carries Rz(theta) X^sx Z^sz in
        # front, so peel them off in that order
        for y in range(1, n + 1):
            wire = layout.wire(cols, y)
            sc.apply_gate(state, Gate(
                "RZ", (wire,), octant=-Octant(secrets.theta[(cols, y)])))
            if byp_x[y]:
                sc.apply_gate(state, Gate("X", (wire,)))
            if byp_z[y]:
                sc.apply_gate(state, Gate("Z", (wire,)))
        output = bw.extract_output_state(state, layout, raw_bits)

    est = ledger.estimate(protocol, n, m)
    n_qubit_msgs = sum(v for (d, var), v in transcript.counts.items()
                       if var == "qubit")
    prep = (n_qubit_msgs - n) * w
    return ProtocolResult(
        protocol=protocol, backend=backend, n=n, m=m,
        transcript=transcript, estimate=est,
        corrected_outcomes=s_bits, raw_outcomes=raw_bits,
        announced_angles=announced, output=output,
        buffer_high_water=buffers.high_water,
        transmitted_prep=prep, transmitted_total=n_qubit_msgs * w)


def _flow(layout: bw.BrickworkLayout,
          s_bits: Mapping[tuple[int, int], int],
          coord: tuple[int, int]) -> tuple[int, int]:
    s_x = 0
    for c in layout.x_dep[coord]:
        s_x ^= s_bits[c]
    s_z = 0
    for c in layout.z_dep[coord]:
        s_z ^= s_bits[c]
    return s_x, s_z


def run_bfk_basic(layout, seed, **kw) -> ProtocolResult:
    return run_protocol("bfk_basic", layout, seed, **kw)


def run_protocol1(layout, seed, **kw) -> ProtocolResult:
    return run_protocol("protocol1", layout, seed, **kw)


def run_protocol2_bsa(layout, seed, **kw) -> ProtocolResult:
    return run_protocol("protocol2_bsa", layout, seed, **kw)


def verify_transcript(result: ProtocolResult, secrets: AliceSecrets,
                      layout: bw.BrickworkLayout) -> bool:
    """Recompute every announced angle from the secrets and the reported
    bits; any mismatch means the session drifted from the protocol."""
    announced = {(e["payload"]["x"], e["payload"]["y"]):
                 e["payload"]["delta"]
                 for e in result.transcript.delivered("angle")}
    reported = {(e["payload"]["x"], e["payload"]["y"]): e["payload"]["bit"]
                for e in result.transcript.delivered("result")}
    s_bits: dict[tuple[int, int], int] = {}
    for x in range(1, 4 * layout.m + 1):
        for y in range(1, layout.n + 1):
            c = (x, y)
            s_x, s_z = _flow(layout, s_bits, c)
            phi_c = bw.corrected_angle(layout.phi[c], s_x, s_z)
            delta = phi_c + Octant(secrets.theta[c]) \
                + Octant(4 * secrets.r[c])
            if announced.get(c) != int(delta):
                return False
            if reported.get(c) != result.raw_outcomes[c]:
                return False
            s_bits[c] = reported[c] ^ secrets.r[c]
    return s_bits == result.corrected_outcomes


# ---------------------------------------------------------------------------
# single-qubit encoded round: the full physical leg on 22 wires

@dataclasses.dataclass(frozen=True)
class PipelineResult:
    theta: int
    r: int
    delta: int
    raw_bit: int
    corrected_bit: int
    tally: tuple[int, int, int, int]
    transcript: Transcript


def protocol1_qubit_pipeline(phi_prime: int, seed: int,
                             theta: int | None = None,
                             r: int | None = None) -> PipelineResult:
    """One client qubit end to end at the encoded physical layer.

    The client prepares |+_theta> fault-tolerantly on a seven-wire block
    (consuming her magic bank when theta is odd), ships the block, and the
    server measures it at delta = phi' + theta + 4r: a logical phase shift
    by -delta, a transversal H, then the destructive logical readout.  The
    corrected bit b xor r follows the |+_{phi'}> Born rule; phi' = 0 makes
    it deterministically 0.

    Wire budget: data block 7 + magic bank 7 + cat 7 + verify 1 = 22.
    """
    ss = np.random.SeedSequence(seed)
    alice_ss, bob_ss = ss.spawn(2)
    alice_rng = np.random.default_rng(alice_ss)
    bob_rng = np.random.default_rng(bob_ss)
    if theta is None:
        theta = int(alice_rng.integers(0, 8))
    if r is None:
        r = int(alice_rng.integers(0, 2))

    state = sc.new_state(22)
    bank_a = st.CodeBlock(tuple(range(7)))
    bank_b = st.CodeBlock(tuple(range(7, 14)))
    cat = tuple(range(14, 21))
    verify = 21
    counter = OpCounter()
    transcript = Transcript()

    block = st.prepare_plus_theta_logical(
        state, bank_a, theta, bank_b if theta % 2 else None, cat, verify,
        alice_rng, counter)
    transcript.record(A_TO_B, QubitTransfer(1, 1, "blk-1-1"))

    delta = int(Octant(phi_prime) + Octant(theta) + Octant(4 * r))
    transcript.record(A_TO_B, AngleAnnounce(1, 1, delta))

    # the server's magic bank is whichever seven-wire bank the block does
    # not occupy; collapsed wires from the client's T round are reset first
    spare = bank_b if block == bank_a else bank_a
    for wire in spare.wires:
        if sc.measure_z(state, wire, bob_rng, None):
            sc.apply_gate(state, Gate("X", (wire,)), None)
    block = st.apply_logical_phase(
        state, block, -Octant(delta), spare if delta % 2 else None, cat,
        verify, bob_rng, counter)
    st.transversal_gate(state, block, "H", counter)
    b = st.ft_meas_z(state, block, cat, verify, bob_rng, counter)
    transcript.record(B_TO_A, ResultAnnounce(1, 1, b))

    return PipelineResult(
        theta=theta, r=r, delta=delta, raw_bit=b, corrected_bit=b ^ r,
        tally=(counter.t_gates, counter.two_qubit, counter.one_qubit,
               counter.measurements),
        transcript=transcript)


# ---------------------------------------------------------------------------
# blindness audit

@dataclasses.dataclass(frozen=True)
class AuditReport:
    runs: int
    coords: int
    samples_per_coord: int
    chi2: dict[tuple[int, int], float]
    chi2_critical: float
    mi_bits: dict[tuple[int, int], float]
    mi_limit: float

    @property
    def max_chi2(self) -> float:
        return max(self.chi2.values())

    @property
    def max_mi(self) -> float:
        return max(self.mi_bits.values())

    @property
    def uniform_ok(self) -> bool:
        return all(v < self.chi2_critical for v in self.chi2.values())

    @property
    def mi_ok(self) -> bool:
        return all(v < self.mi_limit for v in self.mi_bits.values())

    @property
    def passed(self) -> bool:
        return self.uniform_ok and self.mi_ok


def blindness_audit(n: int = 2, m: int = 1, runs: int = 10_000,
                    seed: int = 0, min_samples: int = 1000,
                    program: Mapping[tuple[int, int], int] | None = None
                    ) -> AuditReport:
    """Announce-side leakage check over many sessions: per measured
    coordinate, the delta stream must pass a chi-squared uniformity test on
    the octant ring and show negligible mutual information with the secret
    program angle.

    With ``program`` fixed the test exercises the angles a real session
    would leak; by default every run draws a fresh random program, which
    also gives the mutual-information estimate its full range.
    """
    if runs < min_samples:
        raise ValueError(
            f"refusing to audit on {runs} runs; need at least "
            f"{min_samples} samples per coordinate")
    ss = np.random.SeedSequence(seed)
    seeds = ss.generate_state(runs, dtype=np.uint32)
    coords = [(x, y) for x in range(1, 4 * m + 1) for y in range(1, n + 1)]
    joint = {c: np.zeros((8, 8), dtype=np.int64) for c in coords}
    program_rng = np.random.default_rng(ss.spawn(1)[0])
    for i in range(runs):
        if program is None:
            phi = {c: int(program_rng.integers(0, 8)) for c in coords}
        else:
            phi = {c: int(program.get(c, 0)) for c in coords}
        layout = bw.BrickworkLayout.create(n, m, phi)
        res = run_protocol("bfk_basic", layout, int(seeds[i]),
                           backend="tally", record_transcript=False)
        for c, delta in res.announced_angles.items():
            joint[c][phi[c], delta] += 1
    chi2 = {}
    mi = {}
    expect = runs / 8.0
    for c in coords:
        marg = joint[c].sum(axis=0).astype(np.float64)
        chi2[c] = float(((marg - expect) ** 2 / expect).sum())
        mi[c] = _mutual_information_bits(joint[c])
    return AuditReport(runs=runs, coords=len(coords),
                       samples_per_coord=runs, chi2=chi2,
                       chi2_critical=CHI2_CRITICAL, mi_bits=mi,
                       mi_limit=MI_LIMIT_BITS)


def transcript_signature(transcript: Transcript) -> list[tuple]:
    """Shape of the session as the server sees it: direction, variant, and
    coordinate per message, with all payload values stripped.  Two runs of
    the same-size pattern must produce identical signatures regardless of
    the programs or secrets."""
    return [(e["direction"], e["variant"], e["payload"]["x"],
             e["payload"]["y"]) for e in transcript.entries]


def _mutual_information_bits(joint: np.ndarray) -> float:
    total = joint.sum()
    p = joint / total
    px = p.sum(axis=1, keepdims=True)
    py = p.sum(axis=0, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = p * np.log2(p / (px @ py))
    return float(np.nansum(terms))
