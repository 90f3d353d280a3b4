"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 computation or file error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import bounds as bounds_mod
from . import io as mio
from .errors import RacosError
from .experiments import (
    SweepConfig,
    bench_missing,
    bench_noisy,
    run_phase,
    run_sweep,
    write_csv,
    write_json,
    write_phase_csv,
)
from .pipelines import RacosIParams, RacosNParams, racos_i, racos_n
from .sampling import RngSeed
from .solvers import SolverOptions
from .synth import make_incomplete_problem, make_noisy_problem


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; the contract here is 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-iters", type=int, default=2000, help="ADMM iteration cap")
    p.add_argument("--tol", type=float, default=1e-6, help="primal/dual residual tolerance")


def _solver_from(args) -> SolverOptions:
    return SolverOptions(
        max_iters=args.max_iters, primal_tolerance=args.tol, dual_tolerance=args.tol
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="racos", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect-noisy", help="run the noisy detector on a dense CSV matrix")
    p.add_argument("--input", required=True, help="dense matrix CSV")
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--gamma", type=float, default=0.2, help="column subsampling probability")
    p.add_argument("--m", type=int, required=True, help="row compression size")
    p.add_argument("--q", type=int, default=0, help="second-stage reduction size (0 = identity)")
    p.add_argument("--lambda", dest="lam", type=float, default=0.4, help="regularization weight")
    p.add_argument("--alpha", type=float, default=None, help="fixed subspace threshold")
    p.add_argument(
        "--alpha-energy",
        type=float,
        default=0.99,
        help="energy fraction the kept spectrum must retain (ignored with --alpha)",
    )
    p.add_argument("--eps1", type=float, default=0.0, help="data-fit slack radius")
    p.add_argument(
        "--eps2", default="auto", help="detection threshold: 'auto' (largest gap) or a number"
    )
    p.add_argument("--seed", type=int, default=0)
    _add_solver_flags(p)

    p = sub.add_parser("detect-missing", help="run the incomplete-data detector on a NaN-masked CSV")
    p.add_argument("--input", required=True, help="NaN-masked matrix CSV")
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--gamma1", type=float, default=0.5, help="row subsampling probability")
    p.add_argument("--gamma2", type=float, default=0.3, help="column subsampling probability")
    p.add_argument("--rho", type=float, default=None, help="trimming cap fraction (omit to disable)")
    p.add_argument("--lambda", dest="lam", type=float, default=0.4, help="regularization weight")
    p.add_argument("--floor-rel", type=float, default=1e-8, help="relative detection floor")
    p.add_argument("--seed", type=int, default=0)
    _add_solver_flags(p)

    p = sub.add_parser("synth", help="write a synthetic problem to CSV + JSON files")
    p.add_argument("--kind", choices=["noisy", "incomplete"], required=True)
    p.add_argument("--n1", type=int, required=True)
    p.add_argument("--n2", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--sigma-r", type=float, default=None, help="target smallest singular value")
    p.add_argument("--noise", choices=["gaussian", "laplace"], default="gaussian")
    p.add_argument("--sigma", type=float, default=0.0, help="gaussian std / laplace scale")
    p.add_argument("--p", type=float, default=0.5, help="observation rate (incomplete kind)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("bounds", help="print the theory-bound table as JSON")
    for name, typ in [
        ("n1", int), ("n2", int), ("n-l", int), ("r", int),
        ("mu-u", float), ("mu-v", float), ("mu-l", float), ("kappa", float),
        ("delta", float), ("p", float), ("gamma", float), ("gamma1", float),
        ("gamma2", float), ("tau1", float), ("eta-n", float), ("sigma", float),
        ("phi", float), ("beta", float),
    ]:
        p.add_argument(f"--{name}", type=typ, default=None)
    p.add_argument("--c-p", type=float, default=1.0)
    p.add_argument("--c-k", type=float, default=1.0)
    p.add_argument("--c-gamma2", type=float, default=1.0)

    p = sub.add_parser("sweep", help="run a Monte Carlo sweep from a JSON config")
    p.add_argument("--config", required=True, help="SweepConfig JSON file")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--json", default=None, help="optional JSON output path")
    p.add_argument("--workers", type=int, default=None)

    p = sub.add_parser("phase", help="run a 2-d phase/timing grid from a JSON config")
    p.add_argument("--config", required=True, help="config JSON with grid + base SweepConfig")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--workers", type=int, default=None)

    p = sub.add_parser("bench", help="time the subsampled detector against the full solve")
    p.add_argument("--kind", choices=["noisy", "incomplete"], required=True)
    p.add_argument("--n1", type=int, required=True)
    p.add_argument("--n2", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int, default=None, help="row compression size (noisy kind)")
    p.add_argument("--gamma", type=float, default=0.2)
    p.add_argument("--gamma1", type=float, default=0.3)
    p.add_argument("--gamma2", type=float, default=0.3)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)

    return parser


def _cmd_detect_noisy(args) -> int:
    m = mio.read_dense_csv(args.input)
    alpha_policy = ("fixed", args.alpha) if args.alpha is not None else ("energy", args.alpha_energy)
    eps2_policy = ("largest_gap",) if args.eps2 == "auto" else ("fixed", float(args.eps2))
    params = RacosNParams(
        gamma=args.gamma,
        m=args.m,
        q=args.q,
        lambda_policy=("fixed", args.lam),
        alpha_policy=alpha_policy,
        epsilon1=args.eps1,
        epsilon2_policy=eps2_policy,
        seed=RngSeed(args.seed),
        solver=_solver_from(args),
    )
    report = racos_n(m, params)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")
    print(f"outliers: {report.estimated_outliers.to_list()}")
    return 0


def _cmd_detect_missing(args) -> int:
    m = mio.read_masked_csv(args.input)
    params = RacosIParams(
        gamma1=args.gamma1,
        gamma2=args.gamma2,
        lambda_policy=("fixed", args.lam),
        trim_rho=args.rho,
        residual_floor_rel=args.floor_rel,
        seed=RngSeed(args.seed),
        solver=_solver_from(args),
    )
    report = racos_i(m, params)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")
    print(f"outliers: {report.estimated_outliers.to_list()}")
    return 0


def _cmd_synth(args) -> int:
    from pathlib import Path

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    seed = RngSeed(args.seed)
    if args.kind == "noisy":
        problem = make_noisy_problem(
            args.n1, args.n2, args.k, args.r, seed,
            sigma_r=args.sigma_r, noise=(args.noise, args.sigma),
        )
        mio.write_dense_csv(out / "M.csv", problem.m)
    else:
        problem = make_incomplete_problem(
            args.n1, args.n2, args.k, args.r, args.p, seed, sigma_r=args.sigma_r
        )
        mio.write_masked_csv(out / "M.csv", problem.m)
    with open(out / "truth.json", "w", encoding="utf-8") as fh:
        json.dump({"outliers": problem.truth.to_list()}, fh, indent=2)
        fh.write("\n")
    with open(out / "meta.json", "w", encoding="utf-8") as fh:
        json.dump(problem.meta, fh, indent=2)
        fh.write("\n")
    print(f"wrote {out / 'M.csv'}")
    return 0


def _cmd_bounds(args) -> int:
    inputs = bounds_mod.TheoryInputs(
        n1=args.n1, n2=args.n2, n_l=args.n_l, r=args.r,
        mu_u=args.mu_u, mu_v=args.mu_v, mu_l=args.mu_l, kappa=args.kappa,
        delta=args.delta, p=args.p, gamma=args.gamma, gamma1=args.gamma1,
        gamma2=args.gamma2, tau1=args.tau1, eta_n=args.eta_n, sigma=args.sigma,
        phi=args.phi, beta=args.beta, c_p=args.c_p, c_k=args.c_k,
        c_gamma2=args.c_gamma2,
    )
    print(json.dumps(bounds_mod.all_bounds(inputs), indent=2))
    return 0


def _cmd_sweep(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        config = SweepConfig.from_dict(json.load(fh))
    result = run_sweep(config, workers=args.workers)
    write_csv(result, args.out)
    if args.json:
        write_json(result, args.json)
    print(f"wrote {args.out}")
    return 0


def _cmd_phase(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    grid1 = (raw["param1"]["name"], raw["param1"]["values"])
    grid2 = (raw["param2"]["name"], raw["param2"]["values"])
    config = SweepConfig.from_dict(raw["base"])
    result = run_phase(grid1, grid2, config, workers=args.workers)
    write_phase_csv(result, args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_bench(args) -> int:
    seed = RngSeed(args.seed)
    if args.kind == "noisy":
        if args.m is None:
            raise RacosError("bench --kind noisy requires --m")
        out = bench_noisy(
            args.n1, args.n2, args.r, args.k, args.m, args.gamma, seed, trials=args.trials
        )
    else:
        out = bench_missing(
            args.n1, args.n2, args.r, args.k, args.gamma1, args.gamma2, args.p,
            seed, trials=args.trials,
        )
    print(json.dumps(out, indent=2))
    return 0


_COMMANDS = {
    "detect-noisy": _cmd_detect_noisy,
    "detect-missing": _cmd_detect_missing,
    "synth": _cmd_synth,
    "bounds": _cmd_bounds,
    "sweep": _cmd_sweep,
    "phase": _cmd_phase,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except RacosError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (KeyError, ValueError, TypeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entrypoint()
