"""Gate kernels on 1-D complex128 amplitude arrays, numpy edition.

Indices here are raw bit positions (0 = least significant); the wire-to-bit
mapping is the caller's business.  Every kernel mutates ``a`` in place.
The compiled module `_kernels_cy` implements the same contract.
"""
from __future__ import annotations

import numpy as np

BACKEND = "numpy"


def _one_bit_view(a: np.ndarray, bit: int) -> np.ndarray:
    # axes: (bits above, this bit, bits below)
    return a.reshape(-1, 2, 1 << bit)


def _two_bit_view(a: np.ndarray, hi: int, lo: int) -> np.ndarray:
    # axes: (above hi, hi, between, lo, below lo); requires hi > lo
    return a.reshape(-1, 2, 1 << (hi - lo - 1), 2, 1 << lo)


def apply_1q(a: np.ndarray, bit: int, m00: complex, m01: complex,
             m10: complex, m11: complex) -> None:
    v = _one_bit_view(a, bit)
    x0 = v[:, 0, :].copy()
    x1 = v[:, 1, :]
    v[:, 0, :] = m00 * x0 + m01 * x1
    v[:, 1, :] = m10 * x0 + m11 * x1


def apply_diag(a: np.ndarray, bit: int, p0: complex, p1: complex) -> None:
    v = _one_bit_view(a, bit)
    if p0 != 1:
        v[:, 0, :] *= p0
    if p1 != 1:
        v[:, 1, :] *= p1


def apply_cnot(a: np.ndarray, cbit: int, tbit: int) -> None:
    hi, lo = (cbit, tbit) if cbit > tbit else (tbit, cbit)
    v = _two_bit_view(a, hi, lo)
    if cbit > tbit:
        x = v[:, 1, :, 0, :].copy()
        v[:, 1, :, 0, :] = v[:, 1, :, 1, :]
        v[:, 1, :, 1, :] = x
    else:
        x = v[:, 0, :, 1, :].copy()
        v[:, 0, :, 1, :] = v[:, 1, :, 1, :]
        v[:, 1, :, 1, :] = x


def apply_cphase(a: np.ndarray, bit1: int, bit2: int, phase: complex) -> None:
    hi, lo = (bit1, bit2) if bit1 > bit2 else (bit2, bit1)
    v = _two_bit_view(a, hi, lo)
    v[:, 1, :, 1, :] *= phase


def apply_swap(a: np.ndarray, bit1: int, bit2: int) -> None:
    hi, lo = (bit1, bit2) if bit1 > bit2 else (bit2, bit1)
    v = _two_bit_view(a, hi, lo)
    x = v[:, 0, :, 1, :].copy()
    v[:, 0, :, 1, :] = v[:, 1, :, 0, :]
    v[:, 1, :, 0, :] = x


def apply_toffoli(a: np.ndarray, c1bit: int, c2bit: int, tbit: int) -> None:
    idx = np.arange(a.shape[0])
    sel = ((idx >> c1bit) & (idx >> c2bit) & ~(idx >> tbit) & 1).astype(bool)
    i0 = idx[sel]
    i1 = i0 | (1 << tbit)
    tmp = a[i0].copy()
    a[i0] = a[i1]
    a[i1] = tmp


def prob_one(a: np.ndarray, bit: int) -> float:
    v = _one_bit_view(a, bit)[:, 1, :]
    return float(np.sum(v.real * v.real + v.imag * v.imag))


def collapse(a: np.ndarray, bit: int, outcome: int, scale: float) -> None:
    v = _one_bit_view(a, bit)
    v[:, 1 - outcome, :] = 0.0
    v[:, outcome, :] *= scale


def sumsq(a: np.ndarray) -> float:
    return float(np.vdot(a, a).real)
