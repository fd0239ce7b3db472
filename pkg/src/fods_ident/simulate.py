"""Forward simulation of affine discrete-time fractional-order systems.

    x_{k+1} = f(x_k) + g(x_k) u_k - sum_{j=1}^{k+1} psi(alpha, j) x_{k+1-j}

Measurement noise, when requested, is added to every x_{k+1} and the noisy
value is what enters the memory of later steps.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _csv
from .errors import DimensionError, DivergenceError, FodsError
from .gl import FractionalOrder, gl_coefficients, memory_term

DIVERGENCE_LIMIT = 1e12


@dataclass(frozen=True)
class DynamicsFn:
    """Known drift ``f: R^d -> R^d`` and input gain ``g: R^d -> R^{d x m}``."""

    f: Callable
    g: Callable
    d: int = 1
    m: int = 1
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def evaluate_f(self, x) -> np.ndarray:
        out = np.asarray(self.f(np.asarray(x, dtype=np.float64)), dtype=np.float64).reshape(-1)
        if out.shape != (self.d,):
            raise DimensionError(f"f returned shape {out.shape}, expected ({self.d},)")
        return out

    def evaluate_g(self, x) -> np.ndarray:
        out = np.asarray(self.g(np.asarray(x, dtype=np.float64)), dtype=np.float64)
        out = out.reshape(self.d, self.m)
        return out

    def drift(self, x, u) -> np.ndarray:
        """f(x) + g(x) u."""
        u = np.asarray(u, dtype=np.float64).reshape(self.m)
        return self.evaluate_f(x) + self.evaluate_g(x) @ u


def logistic_cosexp(mu=1.0, a=-1.0, b=4.0, c=0.7, d=1) -> DynamicsFn:
    """Logistic drift with a cosine-exponential input gain, applied per coordinate.

    f(x) = mu x (1 - x),  g(x) = a cos(x) exp(b (sin(x - c pi) - 1)).
    """

    def f(x):
        return mu * x * (1.0 - x)

    def g(x):
        return (a * np.cos(x) * np.exp(b * (np.sin(x - c * np.pi) - 1.0))).reshape(-1, 1)

    return DynamicsFn(f, g, d=d, m=1, name="logistic-cosexp",
                      params={"mu": mu, "a": a, "b": b, "c": c})


def zero_dynamics(d=1, m=1) -> DynamicsFn:
    return DynamicsFn(lambda x: np.zeros(d), lambda x: np.zeros((d, m)), d=d, m=m, name="zero")


MODELS = {"logistic-cosexp": logistic_cosexp}


@dataclass(frozen=True, eq=False)
class NoiseSpec:
    """Zero-mean Gaussian noise with diagonal covariance ``K_w`` and an explicit seed.

    Zero variances are accepted and mean that coordinate is noiseless.
    """

    covariance: np.ndarray
    seed: int = 0

    def __post_init__(self):
        cov = np.array(self.covariance, dtype=np.float64)
        if cov.ndim == 1:
            cov = np.diag(cov)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
            raise DimensionError(f"covariance must be square, got shape {cov.shape}")
        if np.any(cov != np.diag(np.diag(cov))):
            raise ValueError("noise covariance must be diagonal")
        if np.any(~np.isfinite(np.diag(cov))) or np.any(np.diag(cov) < 0):
            raise ValueError("noise variances must be finite and nonnegative")
        cov.flags.writeable = False
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def isotropic(cls, sigma: float, d: int, seed: int = 0) -> "NoiseSpec":
        return cls(np.full(d, float(sigma) ** 2), seed)

    @property
    def dim(self) -> int:
        return self.covariance.shape[0]

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(np.diag(self.covariance))

    @property
    def sigma(self) -> float:
        """Largest per-coordinate standard deviation."""
        return float(self.std.max())

    def generator(self, *key) -> np.random.Generator:
        """PCG64 stream for ``(seed, *key)``; distinct keys give independent streams."""
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence([self.seed, *key])))


@dataclass(frozen=True, eq=False)
class Trajectory:
    states: np.ndarray  # (T+1, d)
    inputs: np.ndarray  # (T, m)
    noisy: bool = False

    def __post_init__(self):
        if self.states.shape[0] != self.inputs.shape[0] + 1:
            raise DimensionError("trajectory needs exactly one more state than inputs")

    @property
    def T(self) -> int:
        return self.inputs.shape[0]

    def to_csv(self, path):
        d, m = self.states.shape[1], self.inputs.shape[1]
        header = ["k"] + [f"x_{i + 1}" for i in range(d)] + [f"u_{i + 1}" for i in range(m)]
        rows = []
        for k in range(self.T + 1):
            u = list(self.inputs[k]) if k < self.T else [None] * m
            rows.append([k, *self.states[k], *u])
        _csv.write_rows(path, header, rows)

    @classmethod
    def from_csv(cls, path, noisy=False) -> "Trajectory":
        header, rows = _csv.read_rows(path)
        groups = _csv.column_groups(header, ["x_", "u_"])
        states = np.array([[float(r[i]) for i in groups["x_"]] for r in rows])
        inputs = np.array([[float(r[i]) for i in groups["u_"]] for r in rows[:-1]])
        return cls(states, inputs.reshape(len(rows) - 1, len(groups["u_"])), noisy)


def step(dyn: DynamicsFn, coeffs, history, u) -> np.ndarray:
    """Noiseless next state from the full history ``x_0 .. x_k`` and input ``u_k``."""
    hist = np.asarray(history, dtype=np.float64)
    if hist.ndim == 1:
        hist = hist.reshape(-1, dyn.d) if dyn.d > 1 else hist.reshape(-1, 1)
    if hist.shape[0] < 1:
        raise DimensionError("history must contain at least x_0")
    if hist.shape[1] != dyn.d or coeffs.d != dyn.d:
        raise DimensionError(
            f"state dimension mismatch: history {hist.shape[1]}, dynamics {dyn.d}, order {coeffs.d}"
        )
    return dyn.drift(hist[-1], u) - memory_term(coeffs, hist)


def simulate(dyn: DynamicsFn, order, x0, inputs, noise: NoiseSpec | None = None) -> Trajectory:
    """Iterate ``step`` over ``inputs`` (shape (T, m)) starting at the noise-free ``x0``."""
    order = FractionalOrder.of(order)
    x0 = np.asarray(x0, dtype=np.float64).reshape(-1)
    if x0.shape != (dyn.d,):
        raise DimensionError(f"x0 has shape {x0.shape}, expected ({dyn.d},)")
    u = np.asarray(inputs, dtype=np.float64)
    u = u.reshape(u.shape[0] if u.ndim else 1, -1) if u.size else np.zeros((0, dyn.m))
    if u.shape[1] != dyn.m:
        raise DimensionError(f"inputs have width {u.shape[1]}, expected {dyn.m}")
    T = u.shape[0]
    coeffs = gl_coefficients(order, T)
    states = np.empty((T + 1, dyn.d))
    states[0] = x0
    if noise is not None:
        if noise.dim != dyn.d:
            raise DimensionError(f"noise dimension {noise.dim} != state dimension {dyn.d}")
        rng = noise.generator()
        std = noise.std
    for k in range(T):
        try:
            nxt = step(dyn, coeffs, states[: k + 1], u[k])
        except FodsError:
            raise
        except Exception as exc:
            raise DivergenceError(f"dynamics failed at step {k + 1}: {exc}", step=k + 1) from exc
        if noise is not None:
            nxt = nxt + std * rng.standard_normal(dyn.d)
        if not np.all(np.isfinite(nxt)) or np.any(np.abs(nxt) > DIVERGENCE_LIMIT):
            raise DivergenceError(f"state diverged at step {k + 1}: {nxt.tolist()}", step=k + 1)
        states[k + 1] = nxt
    return Trajectory(states, u, noisy=noise is not None)
