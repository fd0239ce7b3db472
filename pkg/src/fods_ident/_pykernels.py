"""Pure-Python/numpy fallback for the compiled kernels in ``_ckernels.pyx``.

The loops keep the compiled code's summation order (lag by lag, ascending)
so both backends return identical bits.
"""
import numpy as np


def gl_table(alphas, horizon):
    alphas = np.asarray(alphas, dtype=np.float64)
    out = np.empty((horizon + 1, alphas.shape[0]), dtype=np.float64)
    out[0] = 1.0
    for j in range(1, horizon + 1):
        out[j] = out[j - 1] * ((float(j - 1) - alphas) / float(j))
    return out


def lagged_sum(table, states, offset):
    n, d = states.shape
    last = n - 1 + offset
    acc = np.zeros(d, dtype=np.float64)
    for j in range(offset, last + 1):
        acc += table[j] * states[last - j]
    return acc


def gl_filter(table, states):
    n, d = states.shape
    out = np.zeros((n, d), dtype=np.float64)
    for k in range(n):
        acc = out[k]
        for j in range(k + 1):
            acc += table[j] * states[k - j]
    return out
