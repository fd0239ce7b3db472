"""Monte Carlo experiment runner.

Two modes:

* accuracy: repeated one-step batches identified with known and with
  basis-approximated dynamics; one row per trial.
* sample complexity: repeated-observation estimation at each N of a grid,
  mean squared error next to the exact expectation and its upper bound.

Every random draw comes from a stream keyed by (seed, purpose, index), so
results do not depend on the number of worker threads.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import _csv, svg
from .basis import BasisSpec
from .bounds import BoundInputs, exact_expected_error, expectation_bound
from .errors import FodsError
from .experiment import DEFAULT_SIGMA, DEFAULT_U_RANGE, DEFAULT_X_RANGE, design_matrix, \
    generate_batch, generate_repeated, sample_inits
from .gl import FractionalOrder
from .identify import DEFAULT_RIDGE, estimate_from_repeated, identify_known, identify_unknown
from .simulate import MODELS, NoiseSpec

SCENARIOS = ("known_fg", "unknown_fg", "sample_complexity")
DEFAULT_N_GRID = (10, 20, 50, 100, 200, 500, 1000)

# stream purposes
_INITS, _BATCH_NOISE, _DESIGN = 1, 2, 3


def derive_seed(*key) -> int:
    """64-bit seed hashed from an integer key tuple."""
    return int(np.random.SeedSequence([int(k) for k in key]).generate_state(1, np.uint64)[0])


def _rng(*key) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(k) for k in key])))


@dataclass
class ExperimentPlan:
    scenario: str
    alpha_true: list
    trials: int = 100
    N_grid: list = field(default_factory=lambda: list(DEFAULT_N_GRID))
    sigma: float = DEFAULT_SIGMA
    seed: int = 0
    f_basis: dict | None = field(default_factory=lambda: {"family": "trig", "count": 2})
    g_basis: dict | None = field(default_factory=lambda: {"family": "cheb_gap", "count": 7})
    ridge: float = DEFAULT_RIDGE
    p: int = 100
    model: str = "logistic-cosexp"
    model_params: dict = field(default_factory=dict)
    x_range: list = field(default_factory=lambda: list(DEFAULT_X_RANGE))
    u_range: list = field(default_factory=lambda: list(DEFAULT_U_RANGE))

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        self.alpha_true = [float(a) for a in np.atleast_1d(self.alpha_true)]
        FractionalOrder.of(self.alpha_true)
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValueError("trials must be a positive integer")
        self.trials = int(self.trials)
        self.N_grid = [int(n) for n in self.N_grid]
        if any(b <= a for a, b in zip(self.N_grid, self.N_grid[1:])) or any(n < 1 for n in self.N_grid):
            raise ValueError("N_grid must be strictly increasing positive integers")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.scenario == "unknown_fg" and (self.f_basis is None or self.g_basis is None):
            raise ValueError("unknown_fg needs f_basis and g_basis")

    @property
    def order(self) -> FractionalOrder:
        return FractionalOrder.of(self.alpha_true)

    @property
    def d(self) -> int:
        return len(self.alpha_true)

    def dynamics(self):
        return MODELS[self.model](d=self.d, **self.model_params)

    def bases(self):
        if self.f_basis is None or self.g_basis is None:
            return None
        return BasisSpec.from_json(self.f_basis), BasisSpec.from_json(self.g_basis)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj) -> "ExperimentPlan":
        if isinstance(obj, (str, Path)):
            obj = json.loads(Path(obj).read_text())
        known = set(cls.__dataclass_fields__)
        extra = set(obj) - known
        if extra:
            raise ValueError(f"unknown plan fields: {sorted(extra)}")
        return cls(**obj)


@dataclass
class ExperimentReport:
    plan: ExperimentPlan
    header: list
    rows: list
    summary: dict
    plot: str = ""
    errors: dict | None = None  # per-N squared errors, complexity mode only

    def write(self, out_dir) -> dict:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        plan_json = json.dumps(self.plan.to_json(), sort_keys=True)
        comments = [f"plan {plan_json}", f"summary {json.dumps(self.summary, sort_keys=True)}"]
        paths = {"report": out / "report.csv", "plot": out / "plot.svg", "plan": out / "plan.echo.json"}
        _csv.write_rows(paths["report"], self.header, self.rows, comments)
        paths["plot"].write_text(self.plot)
        paths["plan"].write_text(json.dumps(self.plan.to_json(), sort_keys=True, indent=2) + "\n")
        return paths


def _map(fn, items, workers):
    if workers is None or workers <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _accuracy_trial(plan: ExperimentPlan, dyn, bases, trial: int):
    x0, u0 = sample_inits(_rng(plan.seed, _INITS, trial), plan.p, plan.d, 1,
                          plan.x_range, plan.u_range)
    noise = None
    if plan.sigma > 0:
        noise = NoiseSpec.isotropic(plan.sigma, plan.d, derive_seed(plan.seed, _BATCH_NOISE, trial))
    batch = generate_batch(dyn, plan.order, (x0, u0), noise)
    known = identify_known(batch, dyn).alpha_hat
    unknown = None
    if bases is not None:
        unknown = identify_unknown(batch, bases[0], bases[1], ridge=plan.ridge).alpha_hat
    return known, unknown


def run_accuracy(plan: ExperimentPlan, workers: int = 1) -> ExperimentReport:
    """One row per trial with the known-dynamics and basis-model estimates."""
    if plan.scenario not in ("known_fg", "unknown_fg"):
        raise ValueError("run_accuracy needs scenario known_fg or unknown_fg")
    dyn, bases = plan.dynamics(), plan.bases()

    def one(t):
        try:
            return _accuracy_trial(plan, dyn, bases, t)
        except FodsError as exc:
            raise type(exc)(f"trial {t}: {exc}") from exc

    results = _map(one, range(plan.trials), workers)
    d = plan.d
    header = ["trial"] + [f"alpha_known_{k + 1}" for k in range(d)]
    if bases is not None:
        header += [f"alpha_unknown_{k + 1}" for k in range(d)]
    rows = []
    for t, (kn, un) in enumerate(results):
        rows.append([t, *kn] + ([*un] if un is not None else []))
    known = np.array([r[0] for r in results])
    summary = {"alpha_true": plan.alpha_true, "mean_known": _fmean(known), "std_known": known.std(axis=0).tolist()}
    groups = [("known f, g", known[:, 0].tolist())]
    if bases is not None:
        unk = np.array([r[1] for r in results])
        summary.update(mean_unknown=_fmean(unk), std_unknown=unk.std(axis=0).tolist())
        groups.append(("basis approximation", unk[:, 0].tolist()))
    key = "mean_known" if plan.scenario == "known_fg" or bases is None else "mean_unknown"
    summary["mean_alpha_hat"] = summary[key]
    plot = svg.histogram_chart(groups, title=f"Estimated order over {plan.trials} trials",
                               xlabel="alpha_hat (coordinate 1)", marker=plan.alpha_true[0])
    return ExperimentReport(plan, header, rows, summary, plot)


def _fmean(arr) -> list:
    arr = np.atleast_2d(np.asarray(arr, dtype=np.float64))
    return [math.fsum(arr[:, k]) / arr.shape[0] for k in range(arr.shape[1])]


def complexity_design(plan: ExperimentPlan) -> np.ndarray:
    """Initial conditions (p, d) shared by every trial of a complexity run."""
    x0, _ = sample_inits(_rng(plan.seed, _DESIGN), plan.p, plan.d, 1, plan.x_range, plan.u_range)
    return x0


def squared_errors(alpha, design_inits, N: int, sigma: float, trials: int, seed: int,
                   workers: int = 1) -> np.ndarray:
    """|beta_hat - beta|^2 for ``trials`` independent repeated-observation experiments."""
    beta = FractionalOrder.of(alpha).values
    d = beta.shape[0]
    p = np.asarray(design_inits).shape[0]

    def one(t):
        noise = NoiseSpec.isotropic(sigma, d * p, derive_seed(seed, t, N))
        obs = generate_repeated(beta, design_inits, N, noise)
        err = estimate_from_repeated(obs).alpha_hat - beta
        return float(err @ err)

    return np.array(_map(one, range(trials), workers))


def run_complexity(plan: ExperimentPlan, workers: int = 1, keep_errors: bool = False) -> ExperimentReport:
    """Empirical mean squared error against the exact expectation and its bound, per N."""
    if plan.scenario != "sample_complexity":
        raise ValueError("run_complexity needs scenario sample_complexity")
    if not plan.N_grid:
        raise ValueError("N_grid is empty")
    x0 = complexity_design(plan)
    C = design_matrix(x0)
    base = BoundInputs(C, plan.sigma**2, plan.N_grid[0])
    header = ["N", "empirical_mse", "mc_se", "exact_expected_error", "expectation_bound"]
    rows, errors = [], {}
    for N in plan.N_grid:
        errs = squared_errors(plan.alpha_true, x0, N, plan.sigma, plan.trials, plan.seed, workers)
        inp = base.with_N(N)
        mse = math.fsum(errs) / errs.size
        se = float(errs.std(ddof=1) / math.sqrt(errs.size)) if errs.size > 1 else float("nan")
        rows.append([N, mse, se, exact_expected_error(inp), expectation_bound(inp)])
        if keep_errors:
            errors[N] = errs
    Ns = np.array(plan.N_grid, dtype=float)
    mses = np.array([r[1] for r in rows])
    slope = float(np.polyfit(np.log(Ns), np.log(mses), 1)[0]) if len(Ns) > 1 and np.all(mses > 0) else float("nan")
    summary = {
        "alpha_true": plan.alpha_true,
        "loglog_slope": slope,
        "dominated": all(r[1] <= r[4] for r in rows),
        "max_rel_dev_from_exact": max(abs(r[1] / r[3] - 1) for r in rows) if plan.sigma > 0 else 0.0,
    }
    plot = ""
    if plan.sigma > 0:
        plot = svg.xy_chart(
            [("empirical MSE", Ns, mses, "points"),
             ("exact E|error|^2", Ns, [r[3] for r in rows], "line"),
             ("expectation bound", Ns, [r[4] for r in rows], "line")],
            title=f"Sample complexity, alpha = {plan.alpha_true}",
            xlabel="N (repeated observations)", ylabel="E |beta_hat - beta|^2",
            logx=True, logy=True)
    return ExperimentReport(plan, header, rows, summary, plot, errors if keep_errors else None)


def run_plan(plan: ExperimentPlan, workers: int = 1) -> ExperimentReport:
    if plan.scenario == "sample_complexity":
        return run_complexity(plan, workers)
    return run_accuracy(plan, workers)


FIGURES = {
    1: ("unknown_fg", 0.8), 2: ("unknown_fg", 0.6), 3: ("unknown_fg", 0.4),
    4: ("sample_complexity", 0.8), 5: ("sample_complexity", 0.6), 6: ("sample_complexity", 0.4),
}


def figure_plan(figure: int, seed: int = 0, sigma: float = DEFAULT_SIGMA, trials: int | None = None) -> ExperimentPlan:
    """Plan reproducing one of the six published figures (1-3 accuracy, 4-6 complexity)."""
    if figure not in FIGURES:
        raise ValueError(f"figure must be one of {sorted(FIGURES)}")
    scenario, alpha = FIGURES[figure]
    if trials is None:
        trials = 100 if scenario == "unknown_fg" else 1000
    return ExperimentPlan(scenario, [alpha], trials=trials, sigma=sigma, seed=seed)
