"""Least-squares identification of the fractional order.

* ``identify_known``: f and g given; regress ``x1 - f(x0) - g(x0) u0`` on the
  stacked ``diag(x0)`` design.
* ``identify_unknown``: f and g expanded in orthogonal bases and estimated
  jointly with the order, optionally with a ridge penalty.
* ``estimate_from_repeated``: average N repeated observations, then solve once.

All solves go through a QR factorisation; no normal-equation inverses.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .basis import BasisSpec, assemble_blocks
from .errors import ConditioningWarning, DesignError
from .experiment import check_design, design_matrix

DEFAULT_RIDGE = 1e-6


@dataclass(frozen=True, eq=False)
class IdentResult:
    alpha_hat: np.ndarray
    gamma_hat: np.ndarray | None = None
    beta_hat: np.ndarray | None = None
    residual_norm: float = 0.0
    design_condition: float = 1.0
    ridge_lambda: float = 0.0

    @property
    def theta(self) -> np.ndarray:
        parts = [v for v in (self.gamma_hat, self.beta_hat) if v is not None]
        return np.concatenate(parts + [self.alpha_hat])

    def to_json(self) -> dict:
        def vec(v):
            return None if v is None else [float(x) for x in v]

        return {
            "alpha_hat": vec(self.alpha_hat),
            "gamma_hat": vec(self.gamma_hat),
            "beta_hat": vec(self.beta_hat),
            "residual_norm": float(self.residual_norm),
            "condition": float(self.design_condition),
            "lambda": float(self.ridge_lambda),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"


def solve_least_squares(A, b, ridge=0.0, penalty_mask=None):
    """Minimise ``|b - A theta|^2 + ridge * |mask * theta|^2``.

    Returns ``(theta, residual_norm, condition)`` where the residual excludes the
    penalty and ``condition`` is the 2-norm condition number of ``A``.
    """
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n = A.shape[1]
    s = np.linalg.svd(A, compute_uv=False)
    cond = float(s[0] / s[-1]) if A.shape[0] >= n and s[-1] > 0 else np.inf
    if ridge < 0:
        raise ValueError("ridge weight must be nonnegative")
    if ridge > 0:
        mask = np.ones(n) if penalty_mask is None else np.asarray(penalty_mask, dtype=np.float64)
        A_aug = np.vstack([A, np.sqrt(ridge) * np.diag(mask)])
        b_aug = np.concatenate([b, np.zeros(n)])
    else:
        A_aug, b_aug = A, b
    if A_aug.shape[0] < n:
        raise DesignError(f"{A.shape[0]} equations for {n} unknowns")
    Q, R = np.linalg.qr(A_aug)
    diag = np.abs(np.diag(R))
    tol = max(A_aug.shape) * np.finfo(float).eps * (diag.max() if diag.size else 0.0)
    if diag.size == 0 or diag.min() <= tol:
        raise DesignError(
            "least-squares design is singular; drop the linear Chebyshev term "
            "(use cheb_gap) or use a positive ridge weight"
        )
    theta = solve_triangular(R, Q.T @ b_aug)
    resid = float(np.linalg.norm(b - A @ theta))
    return theta, resid, cond


def known_residuals(batch, dyn) -> np.ndarray:
    """``x1^i - f(x0^i) - g(x0^i) u0^i`` stacked into a (dp,) vector."""
    y = np.empty_like(batch.x1)
    for i in range(batch.p):
        y[i] = batch.x1[i] - dyn.drift(batch.x0[i], batch.u0[i])
    return y.reshape(-1)


def identify_known(batch, dyn) -> IdentResult:
    """Estimate the order when f and g are known."""
    C = design_matrix(batch.x0)
    check_design(C)
    y = known_residuals(batch, dyn)
    alpha, resid, cond = solve_least_squares(C, y)
    return IdentResult(alpha, residual_norm=resid, design_condition=cond)


def identify_unknown(batch, f_spec: BasisSpec, g_spec: BasisSpec, ridge: float = DEFAULT_RIDGE,
                     penalize_alpha: bool = True) -> IdentResult:
    """Jointly estimate basis coefficients and the order.

    With ``penalize_alpha=False`` the ridge term leaves the order block free.
    """
    blocks = assemble_blocks(batch, f_spec, g_spec, check_condition=False)
    xi = blocks.xi
    d = batch.d
    nH, nL = blocks.pi.shape[1], blocks.phi.shape[1]
    if xi.shape[0] < xi.shape[1]:
        warnings.warn(f"{xi.shape[0]} equations for {xi.shape[1]} unknowns; "
                      "the fit relies on the ridge term", ConditioningWarning, stacklevel=2)
    mask = np.ones(xi.shape[1])
    if not penalize_alpha:
        mask[-d:] = 0.0
    X = batch.x1.reshape(-1)
    theta, resid, cond = solve_least_squares(xi, X, ridge=ridge, penalty_mask=mask)
    return IdentResult(
        theta[nH + nL:], gamma_hat=theta[:nH], beta_hat=theta[nH:nH + nL],
        residual_norm=resid, design_condition=cond, ridge_lambda=float(ridge),
    )


def estimate_from_repeated(obs) -> IdentResult:
    """Solve ``C beta = mean_k y_k`` in the least-squares sense."""
    C = obs.design
    check_design(C)
    beta, resid, cond = solve_least_squares(C, obs.mean())
    return IdentResult(beta, residual_norm=resid, design_condition=cond)
