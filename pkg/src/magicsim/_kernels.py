"""Compiled state-vector kernels.

Each kernel works on the flattened amplitude array with the acted axis
factored as (left, 2, right).  Numba is optional; the numpy fallbacks
in backend_statevec are used when it is unavailable.
"""
from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except Exception:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*a, **k):
        def wrap(f):
            return f
        return wrap


@njit(cache=True)
def apply_1q(state, left, right, m00, m01, m10, m11):
    for i in range(left):
        base = i * 2 * right
        for j in range(right):
            a = state[base + j]
            b = state[base + right + j]
            state[base + j] = m00 * a + m01 * b
            state[base + right + j] = m10 * a + m11 * b


@njit(cache=True)
def apply_cnot(state, left, mid, right, control_first):
    # axes factored as (left, 2, mid, 2, right); swap the target pair
    # on the control-1 stratum
    block = 2 * mid * 2 * right
    for i in range(left):
        for m in range(mid):
            if control_first:
                lo = i * block + block // 2 + m * 2 * right
                hi = lo + right
            else:
                lo = i * block + m * 2 * right + right
                hi = lo + block // 2
            for j in range(right):
                tmp = state[lo + j]
                state[lo + j] = state[hi + j]
                state[hi + j] = tmp


@njit(cache=True)
def branch_weights(state, left, right):
    w0 = 0.0
    w1 = 0.0
    for i in range(left):
        base = i * 2 * right
        for j in range(right):
            a = state[base + j]
            b = state[base + right + j]
            w0 += a.real * a.real + a.imag * a.imag
            w1 += b.real * b.real + b.imag * b.imag
    return w0, w1


@njit(cache=True)
def collapse(state, left, right, outcome, inv_norm, out):
    for i in range(left):
        src = i * 2 * right + outcome * right
        dst = i * right
        for j in range(right):
            out[dst + j] = state[src + j] * inv_norm


@njit(cache=True)
def grow(state, n, basis_x, out):
    # append a fresh qubit as the last axis
    inv = 0.7071067811865476
    for i in range(n):
        a = state[i]
        if basis_x:
            out[2 * i] = a * inv
            out[2 * i + 1] = a * inv
        else:
            out[2 * i] = a
            out[2 * i + 1] = 0.0
