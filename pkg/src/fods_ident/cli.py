"""``fods-ident`` command line.

Subcommands: simulate, generate, identify, bound, montecarlo, reproduce.
Failures print ``error: <category>: <message>`` on stderr and exit nonzero.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import _csv, harness
from .basis import BasisSpec
from .bounds import BoundInputs, bound_table, parse_grid
from .errors import FodsError
from .experiment import ExperimentBatch, RepeatedObservations, generate_batch, generate_repeated, \
    sample_inits
from .identify import DEFAULT_RIDGE, estimate_from_repeated, identify_known, identify_unknown
from .simulate import MODELS, NoiseSpec, simulate

EXIT_CODES = {"usage": 2, "io": 2, "format": 3, "design": 4, "value": 5, "divergence": 6}


class CliError(Exception):
    def __init__(self, category, message):
        super().__init__(message)
        self.category = category


def _floats(text):
    return [float(v) for v in str(text).split(",")]


def _model(args, d):
    params = {k: getattr(args, k) for k in ("mu", "a", "b", "c")}
    return MODELS[args.model](d=d, **params)


def _write_echo(path: Path, args, extra=None):
    cfg = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    if extra:
        cfg.update(extra)
    path.write_text(json.dumps(cfg, sort_keys=True, indent=2, default=str) + "\n")


def _echo_path(out: Path) -> Path:
    return out.with_name(out.stem + ".config.json")


def _add_model_args(p):
    p.add_argument("--model", default="logistic-cosexp", choices=sorted(MODELS))
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--a", type=float, default=-1.0)
    p.add_argument("--b", type=float, default=4.0)
    p.add_argument("--c", type=float, default=0.7)


def cmd_simulate(args):
    alpha = _floats(args.alpha)
    d = len(alpha)
    x0 = _floats(args.x0)
    if args.inputs:
        inputs = _csv.read_matrix(args.inputs)
    else:
        inputs = np.full((args.T, 1), args.u)
    noise = None
    if args.sigma > 0:
        if args.seed is None:
            raise CliError("usage", "--seed is required when --sigma > 0")
        noise = NoiseSpec.isotropic(args.sigma, d, args.seed)
    traj = simulate(_model(args, d), alpha, x0, inputs, noise)
    out = Path(args.out)
    traj.to_csv(out)
    _write_echo(_echo_path(out), args)


def cmd_generate(args):
    alpha = _floats(args.alpha)
    d = len(alpha)
    out = Path(args.out)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([args.seed, 1])))
    x0, u0 = sample_inits(rng, args.p, d, 1, (args.x_min, args.x_max), (args.u_min, args.u_max))
    noise = NoiseSpec.isotropic(args.sigma, d, args.seed)
    if args.repeated:
        obs = generate_repeated(alpha, x0, args.repeated, noise)
        obs.to_csv(out)
    else:
        batch = generate_batch(_model(args, d), alpha, (x0, u0), noise)
        batch.to_csv(out)
    _write_echo(_echo_path(out), args)


def cmd_identify(args):
    if args.repeated:
        obs = RepeatedObservations.from_csv(args.batch, args.design)
        res = estimate_from_repeated(obs)
    else:
        batch = ExperimentBatch.from_csv(args.batch)
        if args.mode == "known":
            res = identify_known(batch, _model(args, batch.d))
        else:
            res = identify_unknown(batch, BasisSpec.parse(args.f_basis), BasisSpec.parse(args.g_basis),
                                   ridge=args.ridge, penalize_alpha=not args.free_alpha)
    text = res.dumps()
    if args.out:
        out = Path(args.out)
        out.write_text(text)
        _write_echo(_echo_path(out), args)
    else:
        sys.stdout.write(text)


def _read_kw(path):
    if path is None:
        raise CliError("usage", "--kw is required unless --inputs is given")
    K = _csv.read_matrix(path)
    return K.reshape(-1) if 1 in K.shape else K


def cmd_bound(args):
    if args.inputs:
        obj = json.loads(Path(args.inputs).read_text())
        inputs = BoundInputs(np.array(obj["design"]), np.array(obj["noise_cov"]), obj["N"])
        grid = parse_grid(obj["t_grid"]) if isinstance(obj.get("t_grid"), str) else obj.get("t_grid")
    else:
        if args.design is None or args.N is None:
            raise CliError("usage", "--design and --N are required unless --inputs is given")
        inputs = BoundInputs(_csv.read_matrix(args.design), _read_kw(args.kw), args.N)
        grid = None
    if args.t_grid:
        grid = parse_grid(args.t_grid)
    if grid is None:
        raise CliError("usage", "a t grid is required (--t-grid START:STOP:COUNT)")
    table = bound_table(inputs, grid)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "bounds.json").write_text(json.dumps(table, sort_keys=True, indent=2) + "\n")
        rows = [[c[0], c[1], cv, s[1], sv, lm[1]] for c, cv, s, sv, lm in
                zip(table["chi2"], table["chi2_valid"], table["subexp"], table["subexp_valid"],
                    table["laurent_massart"])]
        _csv.write_rows(out / "bounds.csv",
                        ["t", "chi2", "chi2_valid", "subexp", "subexp_valid", "laurent_massart"],
                        [[t, c, int(cv), s, int(sv), lm] for t, c, cv, s, sv, lm in rows],
                        comments=[f"exact {_csv.fmt(table['exact'])}",
                                  f"expectation_bound {_csv.fmt(table['expectation_bound'])}",
                                  f"lambda {_csv.fmt(table['lambda'])}"])
        _write_echo(out / "config.json", args)
    else:
        sys.stdout.write(json.dumps(table, sort_keys=True, indent=2) + "\n")


def cmd_montecarlo(args):
    plan = harness.ExperimentPlan.from_json(args.plan)
    report = harness.run_plan(plan, workers=args.workers)
    report.write(args.out)
    print(json.dumps(report.summary, sort_keys=True))


def cmd_reproduce(args):
    plan = harness.figure_plan(args.figure, seed=args.seed, sigma=args.sigma, trials=args.trials)
    report = harness.run_plan(plan, workers=args.workers)
    report.write(args.out)
    print(json.dumps(report.summary, sort_keys=True))


def build_parser():
    parser = argparse.ArgumentParser(prog="fods-ident", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a trajectory")
    _add_model_args(p)
    p.add_argument("--alpha", required=True, help="order(s), comma separated")
    p.add_argument("--x0", required=True, help="initial state, comma separated")
    p.add_argument("--T", type=int, default=50)
    p.add_argument("--u", type=float, default=0.0, help="constant input when --inputs is absent")
    p.add_argument("--inputs", help="CSV of inputs, one row per step")
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("generate", help="generate a one-step or repeated-observation dataset")
    _add_model_args(p)
    p.add_argument("--alpha", required=True)
    p.add_argument("--p", type=int, default=100)
    p.add_argument("--sigma", type=float, default=0.05)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--x-min", type=float, default=0.05)
    p.add_argument("--x-max", type=float, default=0.95)
    p.add_argument("--u-min", type=float, default=-1.0)
    p.add_argument("--u-max", type=float, default=1.0)
    p.add_argument("--repeated", type=int, metavar="N", help="emit N repeated observations instead")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("identify", help="estimate the order from a dataset")
    _add_model_args(p)
    p.add_argument("--batch", required=True)
    p.add_argument("--mode", choices=("known", "unknown"), default="known")
    p.add_argument("--f-basis", default="trig:2")
    p.add_argument("--g-basis", default="cheb_gap:7")
    p.add_argument("--ridge", type=float, default=DEFAULT_RIDGE)
    p.add_argument("--free-alpha", action="store_true", help="exclude the order from the ridge penalty")
    p.add_argument("--repeated", action="store_true", help="--batch holds repeated observations")
    p.add_argument("--design", help="design CSV for --repeated (default <stem>.design.csv)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("bound", help="evaluate the expectation and tail bounds")
    p.add_argument("--inputs", help="JSON with design, noise_cov, N and optional t_grid")
    p.add_argument("--design")
    p.add_argument("--kw")
    p.add_argument("--N", type=int)
    p.add_argument("--t-grid")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("montecarlo", help="run an experiment plan")
    p.add_argument("--plan", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("reproduce", help="reproduce one published figure")
    p.add_argument("--figure", type=int, required=True, choices=sorted(harness.FIGURES))
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma", type=float, default=0.05)
    p.add_argument("--trials", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_reproduce)
    return parser


def _fail(category, message):
    sys.stderr.write(f"error: {category}: {message}\n")
    return EXIT_CODES.get(category, 1)


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_CODES["usage"]
    try:
        args.func(args)
    except CliError as exc:
        return _fail(exc.category, exc)
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        return _fail("io", f"{exc.strerror}: {exc.filename}")
    except FodsError as exc:
        return _fail(exc.category if exc.category in EXIT_CODES else "value", exc)
    except (json.JSONDecodeError, KeyError) as exc:
        return _fail("format", exc)
    except (ValueError, NotImplementedError) as exc:
        return _fail("value", exc)
    return 0


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
