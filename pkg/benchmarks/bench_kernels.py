"""Head-to-head timing of the compiled gate kernels against the numpy
fallback, on the same amplitude arrays.  Both modules are imported directly
so one process can drive both; agreement is checked before timing.

    python3 benchmarks/bench_kernels.py [--qubits 20] [--reps 5]
"""
from __future__ import annotations

import argparse
import math
import time

import numpy as np

from bqcsim import _kernels_py as knp

try:
    from bqcsim import _kernels_cy as kcy
except ImportError:
    kcy = None

H = 1 / math.sqrt(2)
T_PHASE = complex(math.cos(math.pi / 4), math.sin(math.pi / 4))


def workloads(n: int):
    """(name, callable(impl, array)) pairs; each touches every amplitude."""
    pairs = [(b, b + 1) for b in range(n - 1)]

    def w_1q(impl, a):
        for b in range(n):
            impl.apply_1q(a, b, H, H, H, -H)

    def w_diag(impl, a):
        for b in range(n):
            impl.apply_diag(a, b, 1.0, T_PHASE)

    def w_cnot(impl, a):
        for c, t in pairs:
            impl.apply_cnot(a, c, t)

    def w_cphase(impl, a):
        for b1, b2 in pairs:
            impl.apply_cphase(a, b1, b2, -1.0)

    def w_swap(impl, a):
        for b1, b2 in pairs:
            impl.apply_swap(a, b1, b2)

    def w_toffoli(impl, a):
        for b in range(n - 2):
            impl.apply_toffoli(a, b, b + 1, b + 2)

    def w_measure(impl, a):
        for b in range(n):
            p = impl.prob_one(a, b)
            impl.collapse(a, b, 1, 1.0 / math.sqrt(p))
            impl.apply_1q(a, b, H, H, H, -H)

    def w_sumsq(impl, a):
        for _ in range(n):
            impl.sumsq(a)

    return [("apply_1q", w_1q), ("apply_diag", w_diag),
            ("apply_cnot", w_cnot), ("apply_cphase", w_cphase),
            ("apply_swap", w_swap), ("apply_toffoli", w_toffoli),
            ("measure", w_measure), ("sumsq", w_sumsq)]


def random_state(n: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return (a / np.linalg.norm(a)).astype(np.complex128)


def check_agreement(n: int, rng: np.random.Generator) -> float:
    base = random_state(n, rng)
    worst = 0.0
    for _, work in workloads(n):
        a, b = base.copy(), base.copy()
        work(knp, a)
        work(kcy, b)
        worst = max(worst, float(np.max(np.abs(a - b))))
    return worst


def time_one(impl, work, base: np.ndarray, reps: int) -> float:
    best = math.inf
    for _ in range(reps):
        a = base.copy()
        t0 = time.perf_counter()
        work(impl, a)
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qubits", type=int, default=20)
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if kcy is None:
        print("compiled kernels unavailable; only the numpy fallback exists")
        return 1

    n = args.qubits
    rng = np.random.default_rng(args.seed)
    worst = check_agreement(min(n, 12), rng)
    print(f"backends agree on {min(n, 12)}-qubit workloads "
          f"(max |delta| = {worst:.2e})")
    if worst > 1e-12:
        print("DISAGREEMENT above 1e-12, refusing to time")
        return 1

    base = random_state(n, rng)
    print(f"\n{1 << n:,} amplitudes ({n} qubits), best of {args.reps} reps")
    print(f"{'kernel':<14} {'numpy':>10} {'cython':>10} {'speedup':>8}")
    for name, work in workloads(n):
        t_np = time_one(knp, work, base, args.reps)
        t_cy = time_one(kcy, work, base, args.reps)
        print(f"{name:<14} {t_np * 1e3:>8.2f}ms {t_cy * 1e3:>8.2f}ms "
              f"{t_np / t_cy:>7.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
