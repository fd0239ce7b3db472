"""Grünwald-Letnikov coefficients and the fractional difference operator.

The coefficient of lag ``j`` for order ``a`` is

    psi(a, j) = Gamma(j - a) / (Gamma(-a) Gamma(j + 1))

and is evaluated with the multiplicative recurrence
``psi(a, j) = psi(a, j - 1) * (j - 1 - a) / j`` starting from ``psi(a, 0) = 1``.
The Gamma ratio itself overflows long before the lags a long-memory
simulation needs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import DimensionError, HorizonError, OrderError


@dataclass(frozen=True, eq=False)
class FractionalOrder:
    """Per-coordinate fractional orders, each in (0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64).reshape(-1)
        if vals.size < 1:
            raise OrderError("fractional order needs at least one coordinate")
        if not np.all(np.isfinite(vals)):
            raise OrderError(f"fractional order must be finite, got {vals.tolist()}")
        bad = (vals <= 0.0) | (vals > 1.0)
        if np.any(bad):
            raise OrderError(
                f"orders must lie in (0, 1]; got {vals[bad].tolist()} at "
                f"coordinates {np.flatnonzero(bad).tolist()}"
            )
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def of(cls, alpha) -> "FractionalOrder":
        if isinstance(alpha, cls):
            return alpha
        return cls(np.atleast_1d(alpha))

    @property
    def d(self) -> int:
        return self.values.shape[0]

    def __eq__(self, other):
        return isinstance(other, FractionalOrder) and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash(self.values.tobytes())

    def __repr__(self):
        return f"FractionalOrder({self.values.tolist()})"


@dataclass(frozen=True, eq=False)
class GlCoefficients:
    """Immutable lag-major table: ``table[j, i] == psi(order[i], j)`` for j <= horizon."""

    order: FractionalOrder
    table: np.ndarray

    @property
    def horizon(self) -> int:
        return self.table.shape[0] - 1

    @property
    def d(self) -> int:
        return self.order.d

    def matrix(self, j: int) -> np.ndarray:
        """The diagonal matrix psi(alpha, j)."""
        self._check_lag(j)
        return np.diag(self.table[j])

    def _check_lag(self, k: int):
        if k > self.horizon:
            raise HorizonError(f"lag {k} exceeds precomputed horizon {self.horizon}")


def gl_coefficients(order, horizon: int) -> GlCoefficients:
    """Coefficient table for lags ``0 .. horizon``."""
    order = FractionalOrder.of(order)
    if int(horizon) != horizon or horizon < 0:
        raise HorizonError(f"horizon must be a nonnegative integer, got {horizon!r}")
    table = kernels.gl_table(np.ascontiguousarray(order.values), int(horizon))
    table.flags.writeable = False
    return GlCoefficients(order, table)


def _as_states(states, d: int) -> np.ndarray:
    arr = np.asarray(states, dtype=np.float64)
    if arr.ndim == 1 and d == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[1] != d:
        raise DimensionError(f"expected states of shape (k+1, {d}), got {np.shape(states)}")
    if arr.shape[0] < 1:
        raise DimensionError("state sequence is empty")
    return np.ascontiguousarray(arr)


def fractional_difference(coeffs: GlCoefficients, states) -> np.ndarray:
    """Delta^alpha x_k for the sequence ``states = x_0 .. x_k``.

    Summation runs over lags j = 0 .. k in ascending order.
    """
    arr = _as_states(states, coeffs.d)
    coeffs._check_lag(arr.shape[0] - 1)
    return kernels.lagged_sum(coeffs.table, arr, 0)


def fractional_difference_all(coeffs: GlCoefficients, states) -> np.ndarray:
    """Delta^alpha x_k for every k = 0 .. len(states) - 1, stacked row-wise."""
    arr = _as_states(states, coeffs.d)
    coeffs._check_lag(arr.shape[0] - 1)
    return kernels.gl_filter(coeffs.table, arr)


def memory_term(coeffs: GlCoefficients, history) -> np.ndarray:
    """sum_{j=1}^{k+1} psi(alpha, j) x_{k+1-j} for ``history = x_0 .. x_k``."""
    arr = _as_states(history, coeffs.d)
    coeffs._check_lag(arr.shape[0])
    return kernels.lagged_sum(coeffs.table, arr, 1)
