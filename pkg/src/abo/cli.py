"""Benchmark command line: config parsing, seeded runs, CSV traces.

Config files are flat INI documents. Experiment-level keys live either at
the top of the file or in an ``[experiment]`` section; each algorithm gets
its own ``[algorithm.NAME]`` section.
"""

from __future__ import annotations

import argparse
import configparser
import io
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from . import algorithms
from .algorithms import AlgorithmConfig, RunTrace
from .errors import ConfigError
from .kernels import KernelSpec
from .objectives import (
    ObjectiveSpec,
    bump_linear_preset,
    make_gp_sample_function,
    make_rkhs_function,
)
from .rng import GENERATOR_NAME

PROBLEMS = ("example_rkhs", "gp_sample", "synthetic_4d")

_FLOAT_FMT = "%.17g"

_EXPERIMENT_KEYS = {
    "problem", "seeds", "iterations", "output_dir", "init_points",
}
_ALGO_KEYS = {
    "variant", "estimator", "map_mode", "beta_mode", "beta_constant",
    "theta0", "b0", "delta", "noise_sigma", "lambda", "reference_exponent",
    "kappa", "prior_shape", "prior_rate",
}


@dataclass
class ExperimentConfig:
    problem: str = "example_rkhs"
    algorithms: list = field(default_factory=list)
    seeds: list = field(default_factory=lambda: list(range(10)))
    iterations: int = 100
    output_dir: str = "results"
    init_points: int | None = None

    def __post_init__(self):
        if not self.seeds:
            raise ConfigError("seeds must be nonempty")
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        if self.problem not in PROBLEMS:
            raise ConfigError(
                f"unknown problem {self.problem!r}; choose from {PROBLEMS}"
            )
        if not self.algorithms:
            self.algorithms = [AlgorithmConfig(name="agp_ucb")]


def _parse_float(section, key, value, lo=None, hi=None, open_ends=False):
    try:
        v = float(value)
    except ValueError:
        raise ConfigError(f"{section}.{key}: not a number: {value!r}")
    if lo is not None and (v <= lo if open_ends else v < lo):
        raise ConfigError(f"{section}.{key}: must be > {lo}, got {v}")
    if hi is not None and (v >= hi if open_ends else v > hi):
        raise ConfigError(f"{section}.{key}: must be < {hi}, got {v}")
    return v


def _parse_algorithm(name: str, items: dict) -> AlgorithmConfig:
    sec = f"algorithm.{name}"
    kwargs = {"name": name}
    for key, value in items.items():
        if key not in _ALGO_KEYS:
            raise ConfigError(f"unknown key {key!r} in [{sec}]")
        if key == "theta0":
            parts = [p for p in value.replace(",", " ").split() if p]
            theta = tuple(
                _parse_float(sec, key, p, lo=0.0, open_ends=True)
                for p in parts
            )
            kwargs["theta0"] = theta[0] if len(theta) == 1 else theta
        elif key == "lambda":
            kwargs["lam"] = _parse_float(sec, key, value, lo=0.0)
        elif key in ("variant", "estimator", "map_mode", "beta_mode"):
            kwargs[key] = value.strip()
        elif key == "delta":
            kwargs["delta"] = _parse_float(
                sec, key, value, lo=0.0, hi=1.0, open_ends=True
            )
        elif key == "reference_exponent":
            kwargs[key] = _parse_float(
                sec, key, value, lo=0.0, hi=1.0, open_ends=True
            )
        elif key in ("noise_sigma", "b0", "kappa", "prior_shape", "prior_rate"):
            kwargs[key] = _parse_float(sec, key, value, lo=0.0, open_ends=True)
        else:
            kwargs[key] = _parse_float(sec, key, value)
    try:
        return AlgorithmConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"[{sec}]: {exc}") from exc


def parse_config(text: str) -> ExperimentConfig:
    """Parse an INI-style experiment document; empty text gives defaults."""
    parser = configparser.ConfigParser(default_section="__defaults__")
    try:
        # allow bare top-level keys by treating them as [experiment]
        if text.lstrip().startswith("["):
            parser.read_string(text)
        else:
            parser.read_string("[experiment]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc

    exp_kwargs: dict = {}
    algos = []
    for section in parser.sections():
        items = dict(parser.items(section))
        if section == "experiment":
            for key, value in items.items():
                if key not in _EXPERIMENT_KEYS:
                    raise ConfigError(f"unknown key {key!r} in [experiment]")
                if key == "seeds":
                    try:
                        exp_kwargs["seeds"] = [
                            int(s)
                            for s in value.replace(",", " ").split()
                        ]
                    except ValueError:
                        raise ConfigError(f"experiment.seeds: bad value {value!r}")
                elif key in ("iterations", "init_points"):
                    try:
                        exp_kwargs[key] = int(value)
                    except ValueError:
                        raise ConfigError(f"experiment.{key}: bad value {value!r}")
                else:
                    exp_kwargs[key] = value.strip()
        elif section.startswith("algorithm."):
            algos.append(_parse_algorithm(section[len("algorithm."):], items))
        else:
            raise ConfigError(f"unknown section [{section}]")
    return ExperimentConfig(algorithms=algos, **exp_kwargs)


def serialize_config(config: ExperimentConfig) -> str:
    """Inverse of parse_config up to formatting."""
    out = io.StringIO()
    out.write("[experiment]\n")
    out.write(f"problem = {config.problem}\n")
    out.write(f"seeds = {', '.join(str(s) for s in config.seeds)}\n")
    out.write(f"iterations = {config.iterations}\n")
    out.write(f"output_dir = {config.output_dir}\n")
    if config.init_points is not None:
        out.write(f"init_points = {config.init_points}\n")
    for algo in config.algorithms:
        out.write(f"\n[algorithm.{algo.name}]\n")
        out.write(f"variant = {algo.variant}\n")
        out.write(f"estimator = {algo.estimator}\n")
        out.write(f"map_mode = {algo.map_mode}\n")
        out.write(f"beta_mode = {algo.beta_mode}\n")
        out.write(f"beta_constant = {algo.beta_constant!r}\n")
        theta0 = np.atleast_1d(np.asarray(algo.theta0, dtype=float))
        out.write(f"theta0 = {', '.join(repr(v) for v in theta0.tolist())}\n")
        out.write(f"b0 = {algo.b0!r}\n")
        out.write(f"delta = {algo.delta!r}\n")
        out.write(f"noise_sigma = {algo.noise_sigma!r}\n")
        out.write(f"lambda = {algo.lam!r}\n")
        out.write(f"reference_exponent = {algo.reference_exponent!r}\n")
        out.write(f"kappa = {algo.kappa!r}\n")
        out.write(f"prior_shape = {algo.prior_shape!r}\n")
        out.write(f"prior_rate = {algo.prior_rate!r}\n")
    return out.getvalue()


def make_objective(problem: str, seed: int) -> ObjectiveSpec:
    """Objective generator per problem family; seeded where random."""
    if problem == "example_rkhs":
        return bump_linear_preset()
    if problem == "gp_sample":
        kernel = KernelSpec(lengthscales=np.array([0.1]))
        return make_gp_sample_function(kernel, grid_size=30, target_norm=4.0, seed=seed)
    if problem == "synthetic_4d":
        kernel = KernelSpec(lengthscales=np.full(4, 0.3))
        return make_rkhs_function(kernel, m=30, target_norm=2.0, seed=seed)
    raise ConfigError(f"unknown problem {problem!r}")


def trace_header(dim: int) -> list[str]:
    return (
        ["iter"]
        + [f"x_{i}" for i in range(dim)]
        + ["y", "beta_sqrt", "g", "b", "h"]
        + [f"theta_{i}" for i in range(dim)]
        + ["simple_regret", "cumulative_regret"]
    )


def emit_trace(trace: RunTrace, path: str) -> None:
    """Write the trace CSV atomically (temp file + rename)."""
    rows = []
    for i in range(len(trace)):
        row = (
            [str(trace.iters[i])]
            + [_FLOAT_FMT % v for v in trace.X[i]]
            + [
                _FLOAT_FMT % trace.y[i],
                _FLOAT_FMT % trace.beta_sqrt[i],
                _FLOAT_FMT % trace.g[i],
                _FLOAT_FMT % trace.b[i],
                _FLOAT_FMT % trace.h[i],
            ]
            + [_FLOAT_FMT % v for v in trace.theta[i]]
            + [
                _FLOAT_FMT % trace.simple_regret[i],
                _FLOAT_FMT % trace.cumulative_regret[i],
            ]
        )
        rows.append(",".join(row))
    content = "\n".join([",".join(trace_header(trace.dim))] + rows) + "\n"
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            fh.write(content)
        os.replace(tmp, path)
    except OSError as exc:
        raise IOError(f"cannot write trace to {path}: {exc}") from exc


def read_trace(path: str) -> dict:
    """Parse a trace CSV back into named float columns."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.size == 0:
        data = np.zeros((0, len(header)))
    return {name: data[:, i] for i, name in enumerate(header)}


def _seed_offset() -> int:
    return int(os.environ.get("ABO_SEED_OFFSET", "0"))


def _execute_run(args):
    """One (algorithm, seed) cell; module-level for process pools."""
    algo, seed, problem, iterations, init_points, out_dir = args
    from dataclasses import replace

    effective_seed = seed + _seed_offset()
    objective = make_objective(problem, effective_seed)
    config = replace(
        algo,
        seed=effective_seed,
        iterations=iterations,
        init_points=init_points,
    )
    trace = algorithms.run(objective, config)
    path = os.path.join(out_dir, f"{algo.name}_seed{seed}.csv")
    emit_trace(trace, path)
    if trace.aborted:
        raise RuntimeError(f"run {algo.name} seed {seed} aborted")
    return path


def _write_summary(name: str, paths: list[str], out_dir: str) -> str:
    """Per-iteration mean/std of simple and cumulative regret across seeds."""
    columns = [read_trace(p) for p in sorted(paths)]
    iters = columns[0]["iter"]
    simple = np.vstack([c["simple_regret"] for c in columns])
    cumulative = np.vstack([c["cumulative_regret"] for c in columns])
    lines = [
        f"# generator: {GENERATOR_NAME}",
        f"# seeds: {len(paths)}",
        "iter,simple_mean,simple_std,cumulative_mean,cumulative_std",
    ]
    for j, it in enumerate(iters):
        lines.append(
            ",".join(
                [str(int(it))]
                + [
                    _FLOAT_FMT % v
                    for v in (
                        simple[:, j].mean(),
                        simple[:, j].std(),
                        cumulative[:, j].mean(),
                        cumulative[:, j].std(),
                    )
                ]
            )
        )
    path = os.path.join(out_dir, f"{name}_summary.csv")
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, path)
    return path


def run_experiment(config: ExperimentConfig, parallel: int = 1) -> dict:
    """Run every (algorithm, seed) cell; returns a summary dict.

    Failures are recorded per run; the remaining runs still execute.
    """
    out_dir = config.output_dir
    os.makedirs(out_dir, exist_ok=True)
    jobs = [
        (algo, seed, config.problem, config.iterations, config.init_points, out_dir)
        for algo in config.algorithms
        for seed in config.seeds
    ]
    results: dict = {"traces": {}, "failures": [], "summaries": {}}
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            outcomes = list(pool.map(_try_run, jobs))
    else:
        outcomes = [_try_run(job) for job in jobs]
    for (algo, seed, *_), (path, error) in zip(jobs, outcomes):
        if error is not None:
            results["failures"].append((algo.name, seed, error))
        if path is not None:
            results["traces"].setdefault(algo.name, []).append(path)
    for name, paths in results["traces"].items():
        results["summaries"][name] = _write_summary(name, paths, out_dir)
    return results


def _try_run(args):
    try:
        return _execute_run(args), None
    except Exception as exc:  # noqa: BLE001 - run isolation is the contract
        return None, str(exc)


def _cmd_run(args) -> int:
    try:
        with open(args.config) as fh:
            config = parse_config(fh.read())
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        config.output_dir = args.out
    results = run_experiment(config, parallel=args.parallel)
    for name, seed, error in results["failures"]:
        print(f"FAILED {name} seed={seed}: {error}", file=sys.stderr)
    n_runs = len(config.algorithms) * len(config.seeds)
    print(
        f"completed {n_runs - len(results['failures'])}/{n_runs} runs "
        f"into {config.output_dir}"
    )
    return 1 if results["failures"] else 0


def _cmd_list_presets(_args) -> int:
    print("problems:")
    for p in PROBLEMS:
        print(f"  {p}")
    print("algorithm variants:")
    for v in (algorithms.AGP_UCB, algorithms.FIXED_GP_UCB, algorithms.WANG_SHRINK):
        print(f"  {v}")
    print("estimators: regret_bound, one_step")
    print("map modes: off, combine_max, combine_scale")
    return 0


def _cmd_summarize(args) -> int:
    paths = {}
    for entry in sorted(os.listdir(args.dir)):
        if entry.endswith(".csv") and "_seed" in entry:
            name = entry.rsplit("_seed", 1)[0]
            paths.setdefault(name, []).append(os.path.join(args.dir, entry))
    if not paths:
        print(f"no trace files in {args.dir}", file=sys.stderr)
        return 1
    for name, files in paths.items():
        summary = _write_summary(name, files, args.dir)
        cols = read_summary(summary)
        final = cols["simple_mean"][-1]
        print(
            f"{name}: {len(files)} seeds, final mean simple regret "
            f"{final:.6g} -> {summary}"
        )
    return 0


def read_summary(path: str) -> dict:
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    header = lines[0].strip().split(",")
    data = np.loadtxt(lines[1:], delimiter=",", ndmin=2)
    return {name: data[:, i] for i, name in enumerate(header)}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="abo", description="Adaptive Bayesian optimization benchmarks"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--parallel", type=int, default=1)
    p_run.set_defaults(func=_cmd_run)

    p_list = sub.add_parser("list-presets", help="list problems and variants")
    p_list.set_defaults(func=_cmd_list_presets)

    p_sum = sub.add_parser("summarize", help="recompute summaries for a directory")
    p_sum.add_argument("dir")
    p_sum.set_defaults(func=_cmd_summarize)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
