"""Command-line front end: compile circuits to bricks, run blind sessions,
print the resource tables, and drive the verification suites.

Exit codes: 0 success, 2 parse or configuration error, 3 protocol abort,
4 uncorrectable error, 5 reference-check mismatch.  Every command is
deterministic given its flags and seed, and every file written starts with
a format-version field.
"""
from __future__ import annotations

import argparse
import json
import os
import pathlib
import sys

from bqcsim import brickwork as bw
from bqcsim import compiler as cp
from bqcsim import ledger as lg
from bqcsim import protocol as pr
from bqcsim import simcore as sc
from bqcsim import steane as st
from bqcsim import suites

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ABORT = 3
EXIT_UNCORRECTABLE = 4
EXIT_CHECK_MISMATCH = 5

LAYOUT_FORMAT = "bqcsim-layout"
TALLY_FORMAT = "bqcsim-tally"
VERSION = 1

PROTOCOL_ALIASES = {
    "bfk": "bfk_basic", "bfk_basic": "bfk_basic",
    "p1": "protocol1", "protocol1": "protocol1",
    "bsa": "protocol2_bsa", "protocol2_bsa": "protocol2_bsa",
}


def _out_dir(args) -> pathlib.Path:
    root = args.out or os.environ.get("BQCSIM_OUTPUT_DIR") or "."
    path = pathlib.Path(root)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_circuit(spec: str) -> cp.CircuitIR:
    if spec == "toffoli":
        return cp.toffoli_circuit()
    if spec.startswith("qcla:"):
        return cp.qcla_adder(int(spec.split(":", 1)[1]))
    return cp.CircuitIR.from_text(pathlib.Path(spec).read_text())


def _compile(circuit: cp.CircuitIR):
    flat = cp.decompose(circuit)
    routed = cp.insert_swaps(flat)
    layout, report = cp.place_bricks(routed.circuit)
    return flat, routed, layout, report


def write_layout(layout: bw.BrickworkLayout, path: pathlib.Path) -> None:
    lines = [f"# {LAYOUT_FORMAT} {VERSION}",
             f"GRID {layout.n} {layout.m}"]
    for (x, y), phi in sorted(layout.phi.items()):
        if int(phi):
            lines.append(f"PHI {x} {y} {int(phi)}")
    path.write_text("\n".join(lines) + "\n")


def read_layout(path: pathlib.Path) -> bw.BrickworkLayout:
    n = m = None
    phi = {}
    for idx, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "GRID" and len(parts) == 3:
            n, m = int(parts[1]), int(parts[2])
        elif parts[0] == "PHI" and len(parts) == 4:
            phi[(int(parts[1]), int(parts[2]))] = int(parts[3])
        else:
            raise cp.CompileError(f"{path}:{idx}: bad layout line {raw!r}")
    if n is None:
        raise cp.CompileError(f"{path}: missing GRID line")
    return bw.BrickworkLayout.create(n, m, phi)


def _census_line(layout: bw.BrickworkLayout) -> str:
    bricks, halves, qubits = bw.brick_census(layout.n, layout.m)
    return f"({layout.n}, {layout.m}, {bricks}, {halves}, {qubits})"


def cmd_compile(args) -> int:
    try:
        circuit = _load_circuit(args.circuit)
    except (cp.CompileError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    flat, routed, layout, report = _compile(circuit)
    out = _out_dir(args)
    stem = args.name or pathlib.Path(args.circuit.replace(":", "-")).stem
    layout_path = out / f"{stem}.layout"
    write_layout(layout, layout_path)
    tally = circuit.tally()
    flat_tally = flat.tally()
    report_lines = [
        f"# {TALLY_FORMAT} {VERSION}",
        f"source {args.circuit}",
        f"wires {circuit.num_wires}",
        f"toffoli {tally.toffoli}",
        f"cnot {tally.cnot}",
        f"not {tally.x}",
        f"decomposed_t {flat_tally.t_like}",
        f"decomposed_cnot {flat_tally.cnot}",
        f"decomposed_one_qubit {flat_tally.one_qubit_other}",
        f"swaps {routed.swap_count}",
        f"layers {layout.m}",
        f"merged {report.merged_gates}",
        f"absorbed {report.absorbed_gates}",
    ]
    tally_path = out / f"{stem}.tally"
    tally_path.write_text("\n".join(report_lines) + "\n")
    csv_path = out / f"{stem}.tally.csv"
    csv_rows = [f"# {TALLY_FORMAT} {VERSION}", "metric,value"]
    for line in report_lines[1:]:
        k, v = line.rsplit(" ", 1)
        csv_rows.append(f"{k},{v}")
    csv_path.write_text("\n".join(csv_rows) + "\n")
    print(f"wrote {layout_path} and {tally_path}")
    print(_census_line(layout))
    return EXIT_OK


def _resolve_layout(args) -> bw.BrickworkLayout | None:
    if args.census:
        n, m = (int(v) for v in args.census.lower().split("x"))
        return bw.BrickworkLayout.create(n, m)
    if args.target:
        path = pathlib.Path(args.target)
        if path.suffix == ".layout" and path.exists():
            return read_layout(path)
        circuit = _load_circuit(args.target)
        _, _, layout, _ = _compile(circuit)
        return layout
    return None


def cmd_run(args) -> int:
    protocol = PROTOCOL_ALIASES[args.protocol]
    try:
        layout = _resolve_layout(args)
    except (cp.CompileError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if layout is None:
        layout = bw.BrickworkLayout.create(2, 1)  # 2-wire identity
    channel = pr.ChannelConfig(depolarizing=args.depolarizing,
                               classical_loss=args.loss)
    try:
        result = pr.run_protocol(
            protocol, layout, args.seed, backend=args.backend,
            channel=channel, record_transcript=not args.no_transcript)
    except pr.ProtocolAbortError as exc:
        print(f"abort: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except (st.FaultEscalationError, pr.BlindnessError) as exc:
        print(f"uncorrectable: {exc}", file=sys.stderr)
        return EXIT_UNCORRECTABLE
    except sc.ResourceLimitError as exc:
        print(f"error: {exc} (use --backend tally for large grids)",
              file=sys.stderr)
        return EXIT_CONFIG
    out = _out_dir(args)
    stem = f"run-{protocol}-{args.seed}"
    if not args.no_transcript:
        (out / f"{stem}.transcript.jsonl").write_text(
            result.transcript.to_jsonl())
    est = result.estimate
    (out / f"{stem}.ledger.txt").write_text(lg.render_estimate(est) + "\n")
    (out / f"{stem}.ledger.csv").write_text(
        lg.render_estimate_csv(est) + "\n")
    (out / f"{stem}.ledger.json").write_text(
        json.dumps(lg.estimate_as_dict(est), indent=2) + "\n")
    print(f"{protocol} on {layout.n} x {layout.m} "
          f"seed {args.seed} backend {args.backend}")
    print(f"messages {sum(result.transcript.counts.values())} "
          f"dropped {result.transcript.dropped}")
    print(f"prep qubits transmitted {result.transmitted_prep}, "
          f"buffer high water {result.buffer_high_water}")
    if result.output is not None:
        fid = result.output_fidelity(bw.direct_state(layout))
        print(f"fidelity {fid:.9f}")
    print(f"wrote {stem}.* to {out}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    try:
        layout = _resolve_layout(args)
    except (cp.CompileError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.check:
        rows = lg.cross_check()
        bad = [r for r in rows if not r.ok]
        for r in rows:
            mark = "ok " if r.ok else "BAD"
            print(f"[{mark}] {r.label}: computed {r.computed}"
                  + ("" if r.ok else f" expected {r.expected}"))
        if bad:
            print(f"{len(bad)} reference totals do not reproduce",
                  file=sys.stderr)
            return EXIT_CHECK_MISMATCH
        print(f"all {len(rows)} reference totals reproduce exactly")
    if layout is not None:
        census = (layout.n, layout.m)
        if census != lg.STUDY_GRID:
            print(f"note: census {census} differs from the hand-packed "
                  f"study census {lg.STUDY_GRID}; per-protocol numbers "
                  f"below use {census}")
        for name in args.protocols:
            est = lg.estimate(PROTOCOL_ALIASES[name], layout.n, layout.m)
            print()
            print(lg.render_estimate(est))
    print()
    for title, rows in (
            ("overhead vs bare circuit (T, 2q, 1q)",
             lg.overhead_vs_bare()),
            ("overhead vs encoded circuit (T, 2q, 1q, meas)",
             lg.overhead_vs_ft_circuit()),
            ("overhead vs plain blind server (T, 2q, 1q, meas)",
             lg.overhead_vs_plain_blind())):
        print(title)
        for row in rows:
            cells = "  ".join(f"{v:>9,}x" for v in row.ratios)
            print(f"  {row.label:<22}{cells}")
    return EXIT_OK


def cmd_verify(args) -> int:
    names = sorted(suites.SUITES) if "all" in args.suite else args.suite
    failed = 0
    for name in names:
        ok, results = suites.run_suite(name)
        print(f"suite {name}: {'pass' if ok else 'FAIL'}")
        for r in results:
            print(r.line())
        failed += 0 if ok else 1
    return EXIT_OK if failed == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="bqcsim",
        description="Workbench for fault-tolerant blind computation: "
                    "compile circuits to bricks, run blind sessions, "
                    "reproduce the resource tables, verify invariants.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile",
                       help="circuit -> brickwork layout + gate tally")
    c.add_argument("circuit",
                   help="circuit file, or builtin qcla:<bits> / toffoli")
    c.add_argument("--out", help="output directory "
                   "(default $BQCSIM_OUTPUT_DIR or .)")
    c.add_argument("--name", help="output file stem")
    c.set_defaults(func=cmd_compile)

    r = sub.add_parser("run", help="execute one blind session")
    r.add_argument("target", nargs="?",
                   help="layout file, circuit file, or builtin; "
                        "default 2-wire identity")
    r.add_argument("--protocol", required=True,
                   choices=sorted(PROTOCOL_ALIASES))
    r.add_argument("--backend", default="exact",
                   choices=("exact", "tally"))
    r.add_argument("--seed", type=int, required=True,
                   help="mandatory; no ambient randomness")
    r.add_argument("--census", help="NxM grid instead of a circuit")
    r.add_argument("--depolarizing", type=float, default=0.0)
    r.add_argument("--loss", type=float, default=0.0)
    r.add_argument("--no-transcript", action="store_true",
                   help="skip transcript recording (large runs)")
    r.add_argument("--out", help="output directory")
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("estimate",
                       help="resource totals and the comparison tables")
    e.add_argument("target", nargs="?",
                   help="layout file, circuit file, or builtin")
    e.add_argument("--census", help="NxM grid, e.g. 35x612")
    e.add_argument("--protocols", nargs="+",
                   default=["bfk", "p1", "bsa"],
                   choices=sorted(PROTOCOL_ALIASES))
    e.add_argument("--check", action="store_true",
                   help="recompute every frozen reference total; "
                        "mismatch exits 5")
    e.add_argument("--out", help="output directory")
    e.set_defaults(func=cmd_estimate)

    v = sub.add_parser("verify", help="run named invariant suites")
    v.add_argument("suite", nargs="+",
                   choices=sorted(suites.SUITES) + ["all"])
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
