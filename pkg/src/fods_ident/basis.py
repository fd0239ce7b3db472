"""Orthogonal basis families and the stacked regression blocks.

Basis functions act coordinate-wise: the functions attached to state
coordinate ``k`` are evaluated at ``x[k]``.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConditioningWarning, DesignError, DomainWarning

FAMILIES = ("trig", "cheb_gap", "chebyshev")
_ALIASES = {"trigonometric": "trig", "chebyshev-gap": "cheb_gap", "chebyshev_gap": "cheb_gap"}
CONDITION_LIMIT = 1e10


@dataclass(frozen=True)
class BasisSpec:
    """Basis family plus number of terms.

    ``cheb_gap`` is the Chebyshev family with T_1 dropped,
    ``[T_0, T_2, T_3, ...]``; plain ``chebyshev`` keeps T_1.
    """

    family: str
    count: int

    def __post_init__(self):
        fam = _ALIASES.get(self.family, self.family)
        if fam not in FAMILIES:
            raise ValueError(f"unknown basis family {self.family!r}; expected one of {FAMILIES}")
        if int(self.count) != self.count or self.count < 1:
            raise ValueError(f"basis count must be a positive integer, got {self.count!r}")
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "count", int(self.count))

    @property
    def skip_linear(self) -> bool:
        return self.family == "cheb_gap"

    def evaluate(self, x) -> np.ndarray:
        """Basis values at each point of ``x``: shape ``x.shape + (count,)``."""
        if self.family == "trig":
            return eval_trig(self.count, x)
        if self.family == "cheb_gap":
            return eval_chebyshev_gap(self.count, x)
        return eval_chebyshev(self.count, x)

    def to_json(self) -> dict:
        return {"family": self.family, "count": self.count}

    @classmethod
    def from_json(cls, obj) -> "BasisSpec":
        if isinstance(obj, str):
            obj = json.loads(obj)
        return cls(obj["family"], obj["count"])

    @classmethod
    def parse(cls, text: str) -> "BasisSpec":
        """Parse the ``family:count`` shorthand used on the command line."""
        fam, _, count = text.partition(":")
        try:
            return cls(fam, int(count))
        except ValueError:
            raise ValueError(f"bad basis {text!r}; expected FAMILY:COUNT") from None


def eval_trig(count: int, x) -> np.ndarray:
    """``[sin(pi x), cos(pi x), sin(2 pi x), cos(2 pi x), ...]`` cut to ``count`` terms."""
    if count < 1:
        raise ValueError("count must be >= 1")
    x = np.asarray(x, dtype=np.float64)
    out = np.empty(x.shape + (count,))
    for n in range(count):
        freq = (n // 2 + 1) * np.pi
        out[..., n] = np.sin(freq * x) if n % 2 == 0 else np.cos(freq * x)
    return out


def _chebyshev_table(degree: int, x: np.ndarray) -> np.ndarray:
    t = np.empty(x.shape + (degree + 1,))
    t[..., 0] = 1.0
    if degree >= 1:
        t[..., 1] = x
    for j in range(2, degree + 1):
        t[..., j] = 2.0 * x * t[..., j - 1] - t[..., j - 2]
    return t


def _domain_check(x):
    if np.any(np.abs(x) > 1.0):
        warnings.warn("Chebyshev basis evaluated outside [-1, 1]", DomainWarning, stacklevel=3)


def eval_chebyshev_gap(count: int, x) -> np.ndarray:
    """``[T_0, T_2, T_3, ..., T_count]`` evaluated at ``x``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    x = np.asarray(x, dtype=np.float64)
    _domain_check(x)
    t = _chebyshev_table(count, x)
    return np.concatenate([t[..., :1], t[..., 2:]], axis=-1)


def eval_chebyshev(count: int, x) -> np.ndarray:
    """``[T_0, T_1, ..., T_{count-1}]`` evaluated at ``x``."""
    if count < 1:
        raise ValueError("count must be >= 1")
    x = np.asarray(x, dtype=np.float64)
    _domain_check(x)
    return _chebyshev_table(count - 1, x)


@dataclass(frozen=True, eq=False)
class RegressorBlocks:
    pi: np.ndarray     # (dp, dH)
    phi: np.ndarray    # (dp, dL)
    omega: np.ndarray  # (dp, d)

    @property
    def xi(self) -> np.ndarray:
        return np.hstack([self.pi, self.phi, self.omega])

    def condition(self) -> float:
        return float(np.linalg.cond(self.xi))


def _block_diag_rows(values: np.ndarray) -> np.ndarray:
    """(p, d, K) per-sample/per-coordinate features -> (dp, dK) block rows.

    Row ``i*d + k`` carries sample i's features for coordinate k in columns
    ``k*K .. (k+1)*K - 1``.
    """
    p, d, K = values.shape
    out = np.zeros((p, d, d, K))
    idx = np.arange(d)
    out[:, idx, idx, :] = values
    return out.reshape(p * d, d * K)


def assemble_blocks(batch, f_spec: BasisSpec, g_spec: BasisSpec, allow_collinear=False,
                    check_condition=True) -> RegressorBlocks:
    """Stack the drift block ``pi``, input block ``phi`` and order block ``omega``."""
    x0 = np.asarray(batch.x0, dtype=np.float64)
    u0 = np.asarray(batch.u0, dtype=np.float64)
    if x0.ndim != 2 or x0.shape[0] < 1:
        raise DesignError("batch must contain at least one record")
    p, d = x0.shape
    if u0.shape[1] != 1:
        raise NotImplementedError("basis regression is implemented for scalar inputs (m = 1)")
    if d == 1 and g_spec.family == "chebyshev" and g_spec.count >= 2 and not allow_collinear:
        raise DesignError(
            "with d = 1 the T_1 input term duplicates the order column; use cheb_gap"
        )
    pi = _block_diag_rows(f_spec.evaluate(x0))
    phi = _block_diag_rows(g_spec.evaluate(x0) * u0[:, :, None])
    omega = _block_diag_rows(x0[:, :, None])
    blocks = RegressorBlocks(pi, phi, omega)
    if check_condition:
        cond = blocks.condition()
        if cond > CONDITION_LIMIT:
            warnings.warn(f"regression design is near singular (condition {cond:.3g})",
                          ConditioningWarning, stacklevel=2)
    return blocks
