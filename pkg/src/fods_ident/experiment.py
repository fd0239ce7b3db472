"""Data-generation protocols.

One-step batches: from p noise-free initial conditions ``x0^i`` with inputs
``u0^i`` record ``x1^i = f(x0^i) + g(x0^i) u0^i + A x0^i + w^i`` where
``A = diag(alpha)`` (since psi(alpha, 1) = -alpha).

Repeated observations: for a fixed design ``C`` (stacked diag(x0^i)) draw
``y_k = C beta + w_k`` for k = 1 .. N.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _csv
from .errors import DesignError, DimensionError, FodsError
from .gl import FractionalOrder
from .simulate import NoiseSpec

DEFAULT_X_RANGE = (0.05, 0.95)
DEFAULT_U_RANGE = (-1.0, 1.0)
DEFAULT_SIGMA = 0.05


@dataclass(frozen=True, eq=False)
class ExperimentBatch:
    x0: np.ndarray  # (p, d)
    u0: np.ndarray  # (p, m)
    x1: np.ndarray  # (p, d)
    noise: NoiseSpec | None = None
    truth: tuple | None = None  # (FractionalOrder, DynamicsFn)

    def __post_init__(self):
        if self.x0.ndim != 2 or self.x0.shape[0] < 1:
            raise DimensionError("batch needs at least one record")
        if self.x1.shape != self.x0.shape or self.u0.shape[0] != self.x0.shape[0]:
            raise DimensionError("records disagree in shape")

    @property
    def p(self) -> int:
        return self.x0.shape[0]

    @property
    def d(self) -> int:
        return self.x0.shape[1]

    @property
    def m(self) -> int:
        return self.u0.shape[1]

    def metadata(self) -> dict:
        seed = self.noise.seed if self.noise is not None else None
        sigma = self.noise.sigma if self.noise is not None else 0.0
        return {"seed": seed, "sigma": sigma, "d": self.d, "m": self.m, "p": self.p}

    def to_csv(self, path):
        """Write the batch CSV plus a ``<stem>.meta.json`` sidecar."""
        path = Path(path)
        d, m = self.d, self.m
        header = (["i"] + [f"x0_{k + 1}" for k in range(d)] + [f"u0_{k + 1}" for k in range(m)]
                  + [f"x1_{k + 1}" for k in range(d)])
        rows = [[i, *self.x0[i], *self.u0[i], *self.x1[i]] for i in range(self.p)]
        _csv.write_rows(path, header, rows)
        meta_path(path).write_text(json.dumps(self.metadata(), sort_keys=True) + "\n")

    @classmethod
    def from_csv(cls, path) -> "ExperimentBatch":
        path = Path(path)
        header, rows = _csv.read_rows(path)
        g = _csv.column_groups(header, ["x0_", "u0_", "x1_"])
        if not g["x0_"] or len(g["x0_"]) != len(g["x1_"]) or not g["u0_"]:
            raise ValueError(f"{path}: header must be i,x0_1..x0_d,u0_1..u0_m,x1_1..x1_d")
        try:
            arr = {k: np.array([[float(r[i]) for i in idx] for r in rows]) for k, idx in g.items()}
        except (ValueError, IndexError) as exc:
            raise ValueError(f"{path}: malformed row ({exc})") from None
        if not rows:
            raise ValueError(f"{path}: no records")
        noise = None
        mp = meta_path(path)
        if mp.exists():
            meta = json.loads(mp.read_text())
            if meta.get("sigma") and meta.get("seed") is not None:
                noise = NoiseSpec.isotropic(meta["sigma"], len(g["x0_"]), meta["seed"])
        return cls(arr["x0_"], arr["u0_"], arr["x1_"], noise)


def meta_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def sample_inits(rng: np.random.Generator, p: int, d: int = 1, m: int = 1,
                 x_range=DEFAULT_X_RANGE, u_range=DEFAULT_U_RANGE):
    """I.i.d. uniform initial states and inputs: arrays of shape (p, d) and (p, m)."""
    x0 = rng.uniform(x_range[0], x_range[1], size=(p, d))
    u0 = rng.uniform(u_range[0], u_range[1], size=(p, m))
    return x0, u0


def generate_batch(dyn, order, inits, noise: NoiseSpec | None = None) -> ExperimentBatch:
    """Run one noisy step from each ``(x0, u0)`` in ``inits``.

    ``inits`` is either a list of pairs or a tuple of arrays ``(x0s, u0s)``.
    Record ``i`` draws its noise from the stream ``(noise.seed, i)``.
    """
    order = FractionalOrder.of(order)
    if isinstance(inits, tuple) and len(inits) == 2 and np.ndim(inits[0]) == 2:
        x0s, u0s = (np.asarray(a, dtype=np.float64) for a in inits)
    else:
        inits = list(inits)
        if not inits:
            raise DesignError("need at least one initial condition")
        x0s = np.array([np.reshape(x, -1) for x, _ in inits], dtype=np.float64)
        u0s = np.array([np.reshape(u, -1) for _, u in inits], dtype=np.float64)
    if x0s.shape[0] < 1:
        raise DesignError("need at least one initial condition")
    if x0s.shape[1] != order.d or x0s.shape[1] != dyn.d:
        raise DimensionError(f"state dimension {x0s.shape[1]} disagrees with order/dynamics")
    u0s = u0s.reshape(x0s.shape[0], dyn.m)
    if noise is not None and noise.dim != dyn.d:
        raise DimensionError(f"noise dimension {noise.dim} != state dimension {dyn.d}")
    alpha = order.values
    x1 = np.empty_like(x0s)
    for i in range(x0s.shape[0]):
        try:
            x1[i] = dyn.drift(x0s[i], u0s[i]) + alpha * x0s[i]
        except FodsError:
            raise
        except Exception as exc:
            raise FodsError(f"dynamics evaluation failed for record {i}: {exc}") from exc
        if noise is not None:
            x1[i] += noise.std * noise.generator(i).standard_normal(dyn.d)
    return ExperimentBatch(x0s, u0s, x1, noise, truth=(order, dyn))


def design_matrix(x0s) -> np.ndarray:
    """Stacked ``diag(x0^i)``: shape (dp, d)."""
    x0s = np.atleast_2d(np.asarray(x0s, dtype=np.float64))
    p, d = x0s.shape
    out = np.zeros((p, d, d))
    idx = np.arange(d)
    out[:, idx, idx] = x0s
    return out.reshape(p * d, d)


def check_design(C: np.ndarray):
    """Raise ``DesignError`` naming the coordinates whose column of C is (near) zero."""
    if C.shape[0] < C.shape[1]:
        raise DesignError(f"design has {C.shape[0]} rows for {C.shape[1]} unknowns")
    norms = np.linalg.norm(C, axis=0)
    scale = norms.max() if norms.size and norms.max() > 0 else 1.0
    dead = np.flatnonzero(norms <= 1e-12 * scale)
    if dead.size:
        raise DesignError(
            f"design is rank deficient: coordinate(s) {(dead + 1).tolist()} are zero in every "
            "initial condition"
        )
    s = np.linalg.svd(C, compute_uv=False)
    if s[-1] <= 1e-12 * s[0]:
        raise DesignError(f"design is rank deficient (singular values {s.tolist()})")


def expand_noise(noise: NoiseSpec, d: int, p: int) -> NoiseSpec:
    """Tile a per-state (d x d) covariance over p blocks; a (dp x dp) one is returned as is."""
    if noise.dim == d * p:
        return noise
    if noise.dim == d:
        return NoiseSpec(np.tile(np.diag(noise.covariance), p), noise.seed)
    raise DimensionError(f"noise dimension {noise.dim} fits neither d={d} nor dp={d * p}")


@dataclass(frozen=True, eq=False)
class RepeatedObservations:
    design: np.ndarray   # C, (dp, d)
    samples: np.ndarray  # (N, dp)
    noise: NoiseSpec | None = None
    truth: np.ndarray | None = None

    @property
    def N(self) -> int:
        return self.samples.shape[0]

    @property
    def d(self) -> int:
        return self.design.shape[1]

    def mean(self) -> np.ndarray:
        return self.samples.mean(axis=0)

    def to_csv(self, path, design_path=None):
        path = Path(path)
        design_path = Path(design_path) if design_path else path.with_name(path.stem + ".design.csv")
        header = ["k"] + [f"y_{j + 1}" for j in range(self.samples.shape[1])]
        _csv.write_rows(path, header, [[k + 1, *y] for k, y in enumerate(self.samples)])
        _csv.write_matrix(design_path, self.design)

    @classmethod
    def from_csv(cls, path, design_path=None) -> "RepeatedObservations":
        path = Path(path)
        design_path = Path(design_path) if design_path else path.with_name(path.stem + ".design.csv")
        header, rows = _csv.read_rows(path)
        idx = _csv.column_groups(header, ["y_"])["y_"]
        samples = np.array([[float(r[i]) for i in idx] for r in rows])
        return cls(_csv.read_matrix(design_path), samples)


def generate_repeated(truth, design_inits, N: int, noise: NoiseSpec | None,
                      stream=()) -> RepeatedObservations:
    """N i.i.d. samples ``y_k = C beta + w_k`` for the design built from ``design_inits``.

    ``stream`` extends the noise seed so independent trials can share one NoiseSpec.
    """
    beta = FractionalOrder.of(truth).values
    if N < 1:
        raise ValueError("N must be >= 1")
    C = design_matrix(design_inits)
    if C.shape[1] != beta.shape[0]:
        raise DimensionError(f"design has {C.shape[1]} columns, order has {beta.shape[0]}")
    check_design(C)
    mean = C @ beta
    if noise is None:
        samples = np.tile(mean, (N, 1))
    else:
        noise = expand_noise(noise, C.shape[1], C.shape[0] // C.shape[1])
        rng = noise.generator(*stream)
        samples = rng.standard_normal((N, C.shape[0]))
        samples *= noise.std
        samples += mean
    return RepeatedObservations(C, samples, noise, beta.copy())
