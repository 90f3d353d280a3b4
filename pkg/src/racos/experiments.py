"""Monte Carlo harness: success-probability sweeps, phase grids, timing benches.

Trials are pure seeded computations keyed by (value index, trial index), so
results are byte-identical regardless of worker count or completion order;
only the wall-clock timing columns vary between runs.  Timing covers the
detection call only, never problem generation.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import InvalidInput, RacosError, require
from .pipelines import (
    OutlierReport,
    RacosIParams,
    RacosNParams,
    racos_i,
    racos_n,
    separation_success,
)
from .sampling import RngSeed
from .solvers import SolverOptions, manipulator_pursuit, outlier_pursuit_noisy
from .synth import SyntheticProblem, make_incomplete_problem, make_noisy_problem


@dataclass
class SweepConfig:
    kind: str  # "noisy" | "incomplete"
    problem: dict
    algorithm: dict
    sweep_name: str
    sweep_values: list
    trials: int
    base_seed: int
    success_rule: str = "exact_support"
    rescale_name: str | None = None
    rescale_params: dict = field(default_factory=dict)
    label: str | None = None

    def __post_init__(self):
        require(self.kind in ("noisy", "incomplete"), f"unknown kind {self.kind!r}")
        require(self.trials >= 1, "trials must be at least 1")
        require(len(self.sweep_values) > 0, "sweep values must be nonempty")
        require(
            self.success_rule in ("exact_support", "separation"),
            f"unknown success rule {self.success_rule!r}",
        )
        in_problem = self.sweep_name in self.problem
        in_algorithm = self.sweep_name in self.algorithm
        require(
            in_problem != in_algorithm,
            f"swept parameter {self.sweep_name!r} must appear in exactly one of "
            "problem/algorithm",
        )

    @staticmethod
    def from_dict(d: dict) -> "SweepConfig":
        return SweepConfig(**d)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SweepRecord:
    value: float
    rescaled_value: float | None
    successes: int
    trials: int
    success_rate: float
    mean_runtime_ms: float
    failure_reasons: list = field(default_factory=list)


@dataclass
class SweepResult:
    label: str
    param_name: str
    records: list


def rescale_value(name: str | None, raw: float, params: dict) -> float:
    """Divide a raw swept value by the named threshold formula.

    Missing symbols raise InvalidInput.  Supported names: sigma_r, gamma,
    m_log_k, m_log_n2, gamma1, gamma2, none.
    """

    def need(*keys):
        vals = []
        for key in keys:
            if key not in params:
                raise InvalidInput(f"rescale {name!r} needs parameter {key!r}")
            vals.append(float(params[key]))
        return vals

    if name is None or name == "none":
        return float(raw)
    if name == "sigma_r":
        gamma, n2, eta = need("gamma", "n2", "eta_n")
        return raw / (math.sqrt(gamma) * n2 * eta)
    if name == "gamma":
        r, mu_v, n_l = need("r", "mu_v", "n_l")
        require(r > 1, "gamma rescale needs r > 1 (log r vanishes at r = 1)")
        return raw / (r * mu_v * math.log(r) / n_l)
    if name == "m_log_k":
        r, k = need("r", "k")
        return raw / (r + 1.0 + math.log(k))
    if name == "m_log_n2":
        r, n2 = need("r", "n2")
        return raw / (r + 1.0 + math.log(n2))
    if name == "gamma1":
        mu_l, r, n2, n1, p = need("mu_l", "r", "n2", "n1", "p")
        return raw / (mu_l * r * math.log(n2) / (n1 * p))
    if name == "gamma2":
        mu_l, r, n2, n_l, p = need("mu_l", "r", "n2", "n_l", "p")
        return raw / (mu_l * r * math.log(n2) / (n_l * p))
    raise InvalidInput(f"unknown rescale formula {name!r}")


def _worker_count(workers: int | None) -> int:
    if workers is not None:
        return max(1, workers)
    env = os.environ.get("RACOS_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _build_problem(kind: str, problem_args: dict, seed: RngSeed) -> SyntheticProblem:
    if kind == "noisy":
        noise = problem_args.get("noise", ("gaussian", 0.0))
        return make_noisy_problem(
            n1=problem_args["n1"],
            n2=problem_args["n2"],
            k=problem_args["k"],
            r=problem_args["r"],
            seed=seed,
            sigma_r=problem_args.get("sigma_r"),
            noise=tuple(noise),
        )
    return make_incomplete_problem(
        n1=problem_args["n1"],
        n2=problem_args["n2"],
        k=problem_args["k"],
        r=problem_args["r"],
        p=problem_args["p"],
        seed=seed,
        sigma_r=problem_args.get("sigma_r"),
    )


def _build_params(kind: str, algo_args: dict, seed: RngSeed):
    args = dict(algo_args)
    solver = args.pop("solver", None)
    if solver is not None and not isinstance(solver, SolverOptions):
        solver = SolverOptions(**solver)
    for key in ("lambda_policy", "alpha_policy", "epsilon2_policy"):
        if key in args and isinstance(args[key], list):
            args[key] = tuple(args[key])
    if solver is not None:
        args["solver"] = solver
    if kind == "noisy":
        return RacosNParams(seed=seed, **args)
    return RacosIParams(seed=seed, **args)


def _judge(rule: str, report: OutlierReport, problem: SyntheticProblem) -> bool:
    if rule == "exact_support":
        return report.estimated_outliers == problem.truth
    return separation_success(report.residuals, problem.truth)


def run_trial(config: SweepConfig, value, trial_index: int, value_index: int) -> tuple:
    """One seeded trial: returns (success, runtime_ms, failure_reason)."""
    seed = RngSeed(config.base_seed).derive(value_index, trial_index)
    problem_args = dict(config.problem)
    algo_args = dict(config.algorithm)
    if config.sweep_name in problem_args:
        problem_args[config.sweep_name] = value
    else:
        algo_args[config.sweep_name] = value
    try:
        problem = _build_problem(config.kind, problem_args, seed.derive("problem"))
        params = _build_params(config.kind, algo_args, seed.derive("algorithm"))
        t0 = time.perf_counter()
        if config.kind == "noisy":
            report = racos_n(problem.m, params)
        else:
            report = racos_i(problem.m, params)
        runtime_ms = (time.perf_counter() - t0) * 1000.0
        return _judge(config.success_rule, report, problem), runtime_ms, None
    except (RacosError, np.linalg.LinAlgError) as exc:
        return False, 0.0, f"{type(exc).__name__}: {exc}"


def run_sweep(config: SweepConfig, workers: int | None = None) -> SweepResult:
    """Monte Carlo success rates over the swept values.

    Per-trial seeds depend only on (base_seed, value index, trial index), and
    results are merged by index, so the worker count never changes the output.
    Trial errors count as failures with a recorded reason.
    """
    jobs = [
        (vi, value, t)
        for vi, value in enumerate(config.sweep_values)
        for t in range(config.trials)
    ]
    with ThreadPoolExecutor(max_workers=_worker_count(workers)) as pool:
        outcomes = list(
            pool.map(lambda job: run_trial(config, job[1], job[2], job[0]), jobs)
        )

    records = []
    for vi, value in enumerate(config.sweep_values):
        chunk = outcomes[vi * config.trials : (vi + 1) * config.trials]
        successes = sum(1 for ok, _, _ in chunk if ok)
        runtimes = [ms for _, ms, _ in chunk]
        reasons = [reason for _, _, reason in chunk if reason]
        rescaled = (
            rescale_value(config.rescale_name, value, config.rescale_params)
            if config.rescale_name
            else None
        )
        records.append(
            SweepRecord(
                value=float(value),
                rescaled_value=rescaled,
                successes=successes,
                trials=config.trials,
                success_rate=successes / config.trials,
                mean_runtime_ms=float(np.mean(runtimes)),
                failure_reasons=reasons,
            )
        )
    return SweepResult(
        label=config.label or config.sweep_name,
        param_name=config.sweep_name,
        records=records,
    )


@dataclass
class PhaseResult:
    param1_name: str
    param2_name: str
    values1: list
    values2: list
    success_rate: np.ndarray
    mean_runtime_ms: np.ndarray
    speedup: np.ndarray


def run_phase(
    param1: tuple[str, list],
    param2: tuple[str, list],
    config: SweepConfig,
    workers: int | None = None,
    reference: tuple | None = None,
) -> PhaseResult:
    """Monte Carlo over a 2-d parameter grid with runtime contours.

    speedup(cell) = runtime(reference cell) / runtime(cell); the reference
    defaults to (max(values1), max(values2)), the full-size configuration, and
    is run as an extra cell when not already on the grid.
    """
    name1, values1 = param1
    name2, values2 = param2
    require(len(values1) > 0 and len(values2) > 0, "phase grid must be nonempty")
    ref = reference if reference is not None else (max(values1), max(values2))

    cells = [(v1, v2) for v1 in values1 for v2 in values2]
    extra_ref = ref not in cells
    all_cells = cells + ([ref] if extra_ref else [])

    def cell_config(v1, v2):
        algo = dict(config.algorithm)
        algo[name1] = v1
        algo[name2] = v2
        return SweepConfig(
            kind=config.kind,
            problem=config.problem,
            algorithm=algo,
            sweep_name=name2,
            sweep_values=[v2],
            trials=config.trials,
            base_seed=config.base_seed,
            success_rule=config.success_rule,
            label=f"{name1}={v1},{name2}={v2}",
        )

    rate = np.zeros((len(values1), len(values2)))
    runtime = np.zeros_like(rate)
    ref_runtime = None
    for idx, (v1, v2) in enumerate(all_cells):
        cfg = cell_config(v1, v2)
        # the cell index doubles as the seed stream label, so cells are independent
        result = _run_cell(cfg, idx, workers)
        if idx < len(cells):
            i, j = divmod(idx, len(values2))
            rate[i, j] = result.success_rate
            runtime[i, j] = result.mean_runtime_ms
        if (v1, v2) == ref and ref_runtime is None:
            ref_runtime = result.mean_runtime_ms
    speedup = ref_runtime / runtime
    return PhaseResult(
        param1_name=name1,
        param2_name=name2,
        values1=list(values1),
        values2=list(values2),
        success_rate=rate,
        mean_runtime_ms=runtime,
        speedup=speedup,
    )


def _run_cell(config: SweepConfig, cell_index: int, workers: int | None) -> SweepRecord:
    jobs = list(range(config.trials))
    value = config.sweep_values[0]

    def job(t):
        return run_trial(config, value, t, cell_index)

    with ThreadPoolExecutor(max_workers=_worker_count(workers)) as pool:
        outcomes = list(pool.map(job, jobs))
    successes = sum(1 for ok, _, _ in outcomes if ok)
    return SweepRecord(
        value=float(value),
        rescaled_value=None,
        successes=successes,
        trials=config.trials,
        success_rate=successes / config.trials,
        mean_runtime_ms=float(np.mean([ms for _, ms, _ in outcomes])),
    )


def _fmt(x) -> str:
    if x is None:
        return ""
    return repr(float(x))


SWEEP_HEADER = "param,value,rescaled_value,trials,successes,success_rate,mean_runtime_ms"
PHASE_HEADER = "param1,param2,success_rate,mean_runtime_ms,speedup"


def write_csv(results, path) -> None:
    """Sweep records as CSV with the fixed header; accepts one result or a list."""
    if isinstance(results, SweepResult):
        results = [results]
    lines = [SWEEP_HEADER]
    for result in results:
        for rec in result.records:
            lines.append(
                ",".join(
                    [
                        result.label,
                        _fmt(rec.value),
                        _fmt(rec.rescaled_value),
                        str(rec.trials),
                        str(rec.successes),
                        _fmt(rec.success_rate),
                        _fmt(rec.mean_runtime_ms),
                    ]
                )
            )
    _write_text(path, "\n".join(lines) + "\n")


def write_phase_csv(result: PhaseResult, path) -> None:
    lines = [PHASE_HEADER]
    for i, v1 in enumerate(result.values1):
        for j, v2 in enumerate(result.values2):
            lines.append(
                ",".join(
                    [
                        _fmt(v1),
                        _fmt(v2),
                        _fmt(result.success_rate[i, j]),
                        _fmt(result.mean_runtime_ms[i, j]),
                        _fmt(result.speedup[i, j]),
                    ]
                )
            )
    _write_text(path, "\n".join(lines) + "\n")


def write_json(results, path) -> None:
    import json

    if isinstance(results, SweepResult):
        results = [results]
    payload = [
        {
            "label": r.label,
            "param": r.param_name,
            "records": [
                {
                    "value": rec.value,
                    "rescaled_value": rec.rescaled_value,
                    "trials": rec.trials,
                    "successes": rec.successes,
                    "success_rate": rec.success_rate,
                    "mean_runtime_ms": rec.mean_runtime_ms,
                    "failure_reasons": rec.failure_reasons,
                }
                for rec in r.records
            ],
        }
        for r in results
    ]
    _write_text(path, json.dumps(payload, indent=2) + "\n")


def read_sweep_csv(path) -> list[dict]:
    """Round-trip reader for the sweep schema."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        require(header == SWEEP_HEADER, f"unexpected sweep header {header!r}")
        for line in fh:
            parts = line.rstrip("\n").split(",")
            rows.append(
                {
                    "param": parts[0],
                    "value": float(parts[1]),
                    "rescaled_value": float(parts[2]) if parts[2] else None,
                    "trials": int(parts[3]),
                    "successes": int(parts[4]),
                    "success_rate": float(parts[5]),
                    "mean_runtime_ms": float(parts[6]),
                }
            )
    return rows


def _write_text(path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def bench_noisy(
    n1: int,
    n2: int,
    r: int,
    k: int,
    m: int,
    gamma: float,
    seed: RngSeed,
    trials: int = 10,
    noise: tuple = ("gaussian", 0.01),
    lam: float = 0.4,
    solver: SolverOptions = SolverOptions(max_iters=400, primal_tolerance=1e-5, dual_tolerance=1e-5),
) -> dict:
    """Mean wall-clock of the subsampled detector vs the full-matrix solve."""
    racos_ms = []
    full_ms = []
    for t in range(trials):
        problem = make_noisy_problem(n1, n2, k, r, seed.derive("bench", t), noise=noise)
        params = RacosNParams(
            gamma=gamma,
            m=m,
            q=0,
            lambda_policy=("fixed", lam),
            seed=seed.derive("bench", t, "algo"),
            solver=solver,
        )
        t0 = time.perf_counter()
        racos_n(problem.m, params)
        racos_ms.append((time.perf_counter() - t0) * 1000.0)

        t0 = time.perf_counter()
        outlier_pursuit_noisy(problem.m, lam, 0.0, solver)
        full_ms.append((time.perf_counter() - t0) * 1000.0)
    r_mean = float(np.mean(racos_ms))
    f_mean = float(np.mean(full_ms))
    return {"racos_mean_ms": r_mean, "full_mean_ms": f_mean, "speedup": f_mean / r_mean}


def bench_missing(
    n1: int,
    n2: int,
    r: int,
    k: int,
    gamma1: float,
    gamma2: float,
    p: float,
    seed: RngSeed,
    trials: int = 10,
    lam: float = 0.4,
    trim_rho: float | None = None,
    solver: SolverOptions = SolverOptions(max_iters=400, primal_tolerance=1e-5, dual_tolerance=1e-5),
) -> dict:
    """Mean wall-clock of the subsampled masked detector vs the full masked solve."""
    racos_ms = []
    full_ms = []
    for t in range(trials):
        problem = make_incomplete_problem(n1, n2, k, r, p, seed.derive("bench", t))
        params = RacosIParams(
            gamma1=gamma1,
            gamma2=gamma2,
            lambda_policy=("fixed", lam),
            trim_rho=trim_rho,
            seed=seed.derive("bench", t, "algo"),
            solver=solver,
        )
        t0 = time.perf_counter()
        racos_i(problem.m, params)
        racos_ms.append((time.perf_counter() - t0) * 1000.0)

        t0 = time.perf_counter()
        manipulator_pursuit(problem.m, lam, solver)
        full_ms.append((time.perf_counter() - t0) * 1000.0)
    r_mean = float(np.mean(racos_ms))
    f_mean = float(np.mean(full_ms))
    return {"racos_mean_ms": r_mean, "full_mean_ms": f_mean, "speedup": f_mean / r_mean}
