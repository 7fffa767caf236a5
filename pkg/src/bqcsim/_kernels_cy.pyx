# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Gate kernels on contiguous complex128 buffers, compiled edition.

Same contract as `_kernels_py`: raw bit positions, in-place mutation.
"""

BACKEND = "cython"


def apply_1q(double complex[::1] a, Py_ssize_t bit,
             double complex m00, double complex m01,
             double complex m10, double complex m11):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t step = 1 << bit
    cdef Py_ssize_t i, j
    cdef double complex x0, x1
    for i in range(0, n, 2 * step):
        for j in range(i, i + step):
            x0 = a[j]
            x1 = a[j + step]
            a[j] = m00 * x0 + m01 * x1
            a[j + step] = m10 * x0 + m11 * x1


def apply_diag(double complex[::1] a, Py_ssize_t bit,
               double complex p0, double complex p1):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t step = 1 << bit
    cdef Py_ssize_t i, j
    for i in range(0, n, 2 * step):
        for j in range(i, i + step):
            a[j] = a[j] * p0
            a[j + step] = a[j + step] * p1


def apply_cnot(double complex[::1] a, Py_ssize_t cbit, Py_ssize_t tbit):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t cmask = 1 << cbit
    cdef Py_ssize_t tmask = 1 << tbit
    cdef Py_ssize_t i, j
    cdef double complex x
    for i in range(n):
        if (i & cmask) and not (i & tmask):
            j = i | tmask
            x = a[i]
            a[i] = a[j]
            a[j] = x


def apply_cphase(double complex[::1] a, Py_ssize_t bit1, Py_ssize_t bit2,
                 double complex phase):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t mask = (1 << bit1) | (1 << bit2)
    cdef Py_ssize_t i
    for i in range(n):
        if (i & mask) == mask:
            a[i] = a[i] * phase


def apply_swap(double complex[::1] a, Py_ssize_t bit1, Py_ssize_t bit2):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t m1 = 1 << bit1
    cdef Py_ssize_t m2 = 1 << bit2
    cdef Py_ssize_t i, j
    cdef double complex x
    for i in range(n):
        if (i & m1) and not (i & m2):
            j = (i ^ m1) | m2
            x = a[i]
            a[i] = a[j]
            a[j] = x


def apply_toffoli(double complex[::1] a, Py_ssize_t c1bit, Py_ssize_t c2bit,
                  Py_ssize_t tbit):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t cmask = (1 << c1bit) | (1 << c2bit)
    cdef Py_ssize_t tmask = 1 << tbit
    cdef Py_ssize_t i, j
    cdef double complex x
    for i in range(n):
        if (i & cmask) == cmask and not (i & tmask):
            j = i | tmask
            x = a[i]
            a[i] = a[j]
            a[j] = x


def prob_one(double complex[::1] a, Py_ssize_t bit):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t step = 1 << bit
    cdef Py_ssize_t i, j
    cdef double p = 0.0
    for i in range(0, n, 2 * step):
        for j in range(i + step, i + 2 * step):
            p += a[j].real * a[j].real + a[j].imag * a[j].imag
    return p


def collapse(double complex[::1] a, Py_ssize_t bit, int outcome, double scale):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t step = 1 << bit
    cdef Py_ssize_t i, j
    if outcome == 0:
        for i in range(0, n, 2 * step):
            for j in range(i, i + step):
                a[j] = a[j] * scale
                a[j + step] = 0.0
    else:
        for i in range(0, n, 2 * step):
            for j in range(i, i + step):
                a[j] = 0.0
                a[j + step] = a[j + step] * scale


def sumsq(double complex[::1] a):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i
    cdef double p = 0.0
    for i in range(n):
        p += a[i].real * a[i].real + a[i].imag * a[i].imag
    return p
