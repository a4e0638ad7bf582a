# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled energy-splatting loop.

Distributes per-source intensities into an accumulator through a shared
kernel, gated by a per-target allowance mask. Must stay numerically
interchangeable with fsr._splat_py.splat_group.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def splat_group(
    const cnp.int64_t[::1] ys,
    const cnp.int64_t[::1] xs,
    const cnp.float64_t[:, ::1] values,
    const cnp.float64_t[:, ::1] kernel,
    const cnp.float64_t[:, ::1] allowed,
    cnp.float64_t[:, :, ::1] energy,
    cnp.float64_t[:, ::1] weight,
):
    """Accumulate energy[p] += a(p)*K(p-q)*v(q) and weight[p] += a(p)*K(p-q)
    for every source q over the kernel support. Out-of-frame taps are dropped.
    """
    cdef Py_ssize_t n = ys.shape[0]
    cdef Py_ssize_t kh = kernel.shape[0]
    cdef Py_ssize_t kw = kernel.shape[1]
    cdef Py_ssize_t ry = kh // 2
    cdef Py_ssize_t rx = kw // 2
    cdef Py_ssize_t h = weight.shape[0]
    cdef Py_ssize_t w = weight.shape[1]
    cdef Py_ssize_t i, dy, dx, ty, tx
    cdef double kv, a, wgt, v0, v1, v2

    for i in range(n):
        v0 = values[i, 0]
        v1 = values[i, 1]
        v2 = values[i, 2]
        for dy in range(kh):
            ty = ys[i] + dy - ry
            if ty < 0 or ty >= h:
                continue
            for dx in range(kw):
                tx = xs[i] + dx - rx
                if tx < 0 or tx >= w:
                    continue
                kv = kernel[dy, dx]
                if kv == 0.0:
                    continue
                a = allowed[ty, tx]
                if a == 0.0:
                    continue
                wgt = kv * a
                energy[ty, tx, 0] += wgt * v0
                energy[ty, tx, 1] += wgt * v1
                energy[ty, tx, 2] += wgt * v2
                weight[ty, tx] += wgt
