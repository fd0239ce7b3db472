"""Sample-complexity bounds for the repeated-observation estimator.

For ``beta_hat = (C^T C)^{-1} C^T mean(y)`` the error is Gaussian with
covariance ``Sigma = (1/N) (C^T C)^{-1} C^T K_w C (C^T C)^{-1}``.

``chi2_tail_bound`` evaluates the published closed form

    exp(-(t/lam + sqrt(2 t d / lam - d^2)) / 2),   t > lam d / 2

verbatim. Inverting the Laurent-Massart inequality
``P(|V|^2 >= d + 2 sqrt(d x) + 2 x) <= exp(-x)`` actually gives a minus sign
in front of the square root; that version is ``laurent_massart_tail_bound``.
Monte Carlo shows the plus-sign form is violated for moderate t.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import eigh

from .errors import DesignError, DimensionError

SYMMETRY_RTOL = 1e-8


def sym_eigvalsh(M) -> np.ndarray:
    """Ascending eigenvalues of a symmetric matrix; asserts symmetry, then symmetrises."""
    M = np.asarray(M, dtype=np.float64)
    scale = max(np.abs(M).max(), 1e-300)
    if np.abs(M - M.T).max() > SYMMETRY_RTOL * scale:
        raise ValueError("matrix is not symmetric")
    return eigh(0.5 * (M + M.T), eigvals_only=True)


@dataclass(frozen=True, eq=False)
class BoundInputs:
    """Design ``C`` (dp x d), diagonal noise covariance ``K_w`` (dp x dp) and sample count N.

    ``noise_cov`` may also be given as its diagonal, as a d x d per-state
    covariance (tiled over the p blocks), or as a scalar variance.
    """

    design: np.ndarray
    noise_cov: np.ndarray
    N: int

    def __post_init__(self):
        C = np.atleast_2d(np.asarray(self.design, dtype=np.float64))
        if C.shape[0] < C.shape[1]:
            raise DesignError("design needs at least as many rows as columns")
        dp, d = C.shape
        K = np.asarray(self.noise_cov, dtype=np.float64)
        if K.ndim == 0:
            K = np.full(dp, float(K))
        if K.ndim == 2:
            if np.any(K != np.diag(np.diag(K))):
                raise ValueError("noise covariance must be diagonal")
            K = np.diag(K)
        if K.shape[0] == d and dp % d == 0 and dp != d:
            K = np.tile(K, dp // d)
        if K.shape != (dp,):
            raise DimensionError(f"noise covariance of size {K.shape[0]} does not match dp = {dp}")
        if np.any(K < 0):
            raise ValueError("noise variances must be nonnegative")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError("N must be a positive integer")
        gram_eigs = sym_eigvalsh(C.T @ C)
        if gram_eigs[0] <= 1e-12 * max(gram_eigs[-1], 1e-300):
            raise DesignError("C^T C is singular; the design does not identify every coordinate")
        object.__setattr__(self, "design", C)
        object.__setattr__(self, "noise_cov", np.diag(K))
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "_gram_eigs", gram_eigs)

    @property
    def d(self) -> int:
        return self.design.shape[1]

    @property
    def gram(self) -> np.ndarray:
        return self.design.T @ self.design

    def with_N(self, N: int) -> "BoundInputs":
        return BoundInputs(self.design, self.noise_cov, N)


@dataclass(frozen=True, eq=False)
class Sigma:
    """Error covariance of the estimator together with its largest eigenvalue."""

    matrix: np.ndarray
    lambda_max: float

    @property
    def eigenvalues(self) -> np.ndarray:
        return sym_eigvalsh(self.matrix)


class TailBound(NamedTuple):
    probability: float
    valid: bool  # False when t is outside the bound's stated range and 1.0 is returned


def error_covariance(inputs: BoundInputs) -> Sigma:
    C = inputs.design
    G = C.T @ C
    # (C^T C)^{-1} C^T via a solve, not an explicit inverse
    P = np.linalg.solve(G, C.T)
    S = (P * np.diag(inputs.noise_cov)) @ P.T / inputs.N
    S = 0.5 * (S + S.T)
    return Sigma(S, float(sym_eigvalsh(S)[-1]))


def expectation_bound(inputs: BoundInputs) -> float:
    """(d / N) * lam_max(C^T C) * lam_max(K_w) / lam_min(C^T C)^2."""
    eig = inputs._gram_eigs
    kmax = float(np.diag(inputs.noise_cov).max())
    return float(inputs.d / inputs.N * eig[-1] * kmax / eig[0] ** 2)


def exact_expected_error(inputs: BoundInputs) -> float:
    """E|beta_hat - beta|^2 = trace(Sigma)."""
    return float(np.trace(error_covariance(inputs).matrix))


def _lam(sigma) -> float:
    lam = sigma.lambda_max if isinstance(sigma, Sigma) else float(sigma)
    if not lam > 0:
        raise ValueError("largest error-covariance eigenvalue must be positive")
    return lam


def _check_t(t):
    if not t > 0:
        raise ValueError(f"threshold must be positive, got {t!r}")


def chi2_tail_bound(sigma, d: int, t: float) -> TailBound:
    """Published chi-square tail bound on P(|beta_hat - beta|^2 >= t), valid for t > lam d / 2."""
    _check_t(t)
    lam = _lam(sigma)
    if t <= lam * d / 2:
        return TailBound(1.0, False)
    r = t / lam
    return TailBound(min(1.0, math.exp(-(r + math.sqrt(2 * r * d - d * d)) / 2)), True)


def laurent_massart_tail_bound(sigma, d: int, t: float) -> TailBound:
    """Correct inversion of the chi-square deviation inequality, valid for t >= lam d."""
    _check_t(t)
    lam = _lam(sigma)
    if t < lam * d:
        return TailBound(1.0, False)
    r = t / lam
    return TailBound(min(1.0, math.exp(-(r - math.sqrt(max(2 * r * d - d * d, 0.0))) / 2)), True)


def subexp_tail_bound(sigma, d: int, t: float) -> TailBound:
    """Sub-exponential (Bernstein-type) tail bound, valid for t >= lam d.

    exp(-d (s - 1)^2 / 8) for 1 <= s <= 2 and exp(-d (s - 1) / 8) beyond,
    with s = t / (lam d).
    """
    _check_t(t)
    lam = _lam(sigma)
    if t < lam * d:
        return TailBound(1.0, False)
    excess = t / (lam * d) - 1.0
    expo = d * excess**2 / 8 if excess <= 1.0 else d * excess / 8
    return TailBound(math.exp(-expo), True)


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:count`` -> linspace."""
    try:
        a, b, n = text.split(":")
        return np.linspace(float(a), float(b), int(n))
    except ValueError:
        raise ValueError(f"bad grid {text!r}; expected START:STOP:COUNT") from None


def bound_table(inputs: BoundInputs, t_grid) -> dict:
    """Everything the ``bound`` command reports, as plain Python values."""
    sig = error_covariance(inputs)
    d = inputs.d
    rows = []
    for t in np.asarray(t_grid, dtype=np.float64):
        c = chi2_tail_bound(sig, d, t)
        s = subexp_tail_bound(sig, d, t)
        lm = laurent_massart_tail_bound(sig, d, t)
        rows.append((float(t), c, s, lm))
    return {
        "N": inputs.N,
        "d": d,
        "lambda": sig.lambda_max,
        "exact": exact_expected_error(inputs),
        "expectation_bound": expectation_bound(inputs),
        "chi2": [[t, c.probability] for t, c, _, _ in rows],
        "chi2_valid": [c.valid for _, c, _, _ in rows],
        "subexp": [[t, s.probability] for t, _, s, _ in rows],
        "subexp_valid": [s.valid for _, _, s, _ in rows],
        "laurent_massart": [[t, lm.probability] for t, _, _, lm in rows],
    }
