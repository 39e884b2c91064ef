"""Command-line driver: seeded strategy sweeps, the latency study, metrics and comparisons.

Exit status: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml
from scipy import stats

from . import het_study, metrics
from .moea_core import nondominated_mask
from .problems import ProblemInstance, problem_from_descriptor, reference_front
from .sim_clock import SimConfig, SimulationError, StoppingMode, per_objective_budget
from .strategies import (
    BudgetTooSmall,
    RunRecord,
    StrategyConfig,
    StrategyKind,
    SurrogateFitFailure,
    run_strategy,
)

SCHEMA_VERSION = 1
SUMMARY_COLUMNS = ("strategy", "seed", "fe_slow", "fe_fast", "hv", "igd")
EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


class ConfigInvalid(ValueError):
    def __init__(self, field_name: str, reason: str):
        super().__init__(f"{field_name}: {reason}")
        self.field = field_name


class InsufficientPairs(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    problem: dict
    sim: SimConfig
    strategies: tuple[StrategyConfig, ...]
    seeds: tuple[int, ...]
    output_dir: Path
    reference_point: tuple[float, ...] | None = None


def _require(d: dict, key: str, where: str):
    if not isinstance(d, dict) or key not in d:
        raise ConfigInvalid(f"{where}.{key}" if where else key, "missing")
    return d[key]


def load_yaml(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigInvalid("config", f"cannot read {path}: {exc.strerror}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigInvalid("config", f"not valid YAML ({exc})") from exc
    if not isinstance(data, dict):
        raise ConfigInvalid("config", "top level must be a mapping")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ConfigInvalid("schema_version", f"expected {SCHEMA_VERSION}, got {version!r}")
    return data


def parse_experiment(data: dict, seed: int | None = None, out: str | None = None) -> ExperimentConfig:
    problem = _require(data, "problem", "")
    _require(problem, "kind", "problem")
    _require(problem, "latencies", "problem")
    try:
        instance = problem_from_descriptor(problem)
    except KeyError as exc:
        raise ConfigInvalid(f"problem.params.{exc.args[0]}", "missing") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid("problem", str(exc)) from exc

    sim_d = _require(data, "sim", "")
    try:
        sim = SimConfig(
            int(_require(sim_d, "total_time_steps", "sim")),
            int(_require(sim_d, "batch_capacity", "sim")),
            sim_d.get("stopping_mode", StoppingMode.TIME_STEPS.value),
            sim_d.get("max_fe_per_objective"),
        )
        sim.validate_for(instance.n_objectives)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigInvalid):
            raise
        raise ConfigInvalid("sim", str(exc)) from exc

    raw = _require(data, "strategies", "")
    if not isinstance(raw, list) or not raw:
        raise ConfigInvalid("strategies", "must be a nonempty list")
    strategies = []
    for i, s in enumerate(raw):
        try:
            strategies.append(StrategyConfig.from_dict(dict(s)))
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid(f"strategies[{i}]", str(exc)) from exc
    labels = [s.label for s in strategies]
    if len(set(labels)) != len(labels):
        raise ConfigInvalid("strategies", "labels must be unique; set 'name' to disambiguate")

    seeds = [seed] if seed is not None else _require(data, "seeds", "")
    if not isinstance(seeds, list) or not seeds:
        raise ConfigInvalid("seeds", "must be a nonempty list of integers")
    try:
        seeds = tuple(int(s) for s in seeds)
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid("seeds", "must be integers") from exc
    if any(s < 0 for s in seeds):
        raise ConfigInvalid("seeds", "must be nonnegative")

    output_dir = Path(out if out is not None else data.get("output_dir", "results"))
    ref = data.get("metrics", {}).get("reference_point") if isinstance(data.get("metrics"), dict) else None
    if ref is not None:
        try:
            ref = tuple(float(v) for v in ref)
        except (TypeError, ValueError) as exc:
            raise ConfigInvalid("metrics.reference_point", "must be a list of numbers") from exc
    return ExperimentConfig(problem, sim, tuple(strategies), seeds, output_dir, ref)


def parse_study(data: dict | None, seed: int | None = None) -> het_study.StudyConfig:
    section = dict((data or {}).get("study", {}) or {})
    allowed = {"objective_counts", "distributions", "realizations", "rng_seed", "nested"}
    unknown = set(section) - allowed
    if unknown:
        raise ConfigInvalid(f"study.{sorted(unknown)[0]}", "unknown field")
    if seed is not None:
        section["rng_seed"] = seed
    try:
        return het_study.StudyConfig(**section)
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid("study", str(exc)) from exc


def sim_for(strategy: StrategyConfig, sim: SimConfig, problem: ProblemInstance) -> SimConfig:
    """The surrogate strategy counts evaluations; derive its caps from the time budget."""
    if strategy.kind is not StrategyKind.SURROGATE_INTERLEAVE:
        return sim
    if sim.stopping_mode is StoppingMode.PER_OBJECTIVE_EVALUATIONS:
        return sim
    caps = tuple(
        per_objective_budget(sim.total_time_steps, sim.batch_capacity, k)
        for k in problem.latency_profile.latencies
    )
    return SimConfig(sim.total_time_steps, sim.batch_capacity, StoppingMode.PER_OBJECTIVE_EVALUATIONS, caps)


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "NA"
    return repr(float(v)) if isinstance(v, float) else str(v)


def summary_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in SUMMARY_COLUMNS])
    return buf.getvalue()


def read_summary_csv(text: str) -> list[dict]:
    out = []
    for r in csv.DictReader(io.StringIO(text)):
        row = {"strategy": r["strategy"], "seed": int(r["seed"]),
               "fe_slow": int(r["fe_slow"]), "fe_fast": int(r["fe_fast"])}
        for key in ("hv", "igd"):
            row[key] = float("nan") if r[key] == "NA" else float(r[key])
        out.append(row)
    return out


def run_paths(out_dir: Path, label: str, seed: int) -> tuple[Path, Path]:
    stem = out_dir / "runs" / f"{label}_{seed}"
    return stem.with_suffix(".json"), stem.with_suffix(".events.jsonl")


# ---------------------------------------------------------------------------
# metrics over a set of runs
# ---------------------------------------------------------------------------


def score_records(records: list[tuple[str, RunRecord]], problem: ProblemInstance, reference_point=None) -> list[dict]:
    """Fill ``record.metrics`` with hv and igd using one shared reference per experiment."""
    fronts = [rec.front_array for _, rec in records]
    bi = problem.n_objectives == 2
    nonempty = [f for f in fronts if len(f)]
    ref = None
    if bi and nonempty:
        ref = np.asarray(reference_point, dtype=float) if reference_point is not None else (
            metrics.default_reference_point(nonempty)
        )
    ref_set = reference_front(problem)
    if ref_set is None and nonempty:
        union = np.vstack(nonempty)
        ref_set = union[nondominated_mask(union)]
    rows = []
    for label, rec in records:
        F = rec.front_array
        hv = metrics.hypervolume_or_zero(F, ref) if ref is not None else float("nan")
        gd = metrics.igd(F, ref_set) if len(F) and ref_set is not None else float("nan")
        rec.metrics = {"hv": hv, "igd": gd}
        if ref is not None:
            rec.metrics["reference_point"] = [float(v) for v in ref]
        rows.append({
            "strategy": label, "seed": rec.seed,
            "fe_slow": rec.fe[problem.slow_index], "fe_fast": rec.fe[problem.fast_index],
            "hv": hv, "igd": gd,
        })
    return rows


def median_attainment(records, labels, reference_point) -> dict[str, np.ndarray]:
    out = {}
    for label in labels:
        fronts = [rec.front_array for lab, rec in records if lab == label]
        if any(len(f) for f in fronts):
            corners = metrics.attainment_summary(fronts, 0.5)
            if len(corners):
                out[label] = metrics.staircase_polyline(corners, reference_point)
    return out


def polyline_csv(points: np.ndarray) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["f1", "f2"])
    for x, y in points:
        w.writerow([repr(float(x)), repr(float(y))])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _one_run(problem_desc: dict, sim: SimConfig, strategy: StrategyConfig, seed: int) -> RunRecord:
    problem = problem_from_descriptor(problem_desc)
    cfg = StrategyConfig.from_dict({**strategy.to_dict(), "rng_seed": seed})
    rec = run_strategy(problem, sim_for(cfg, sim, problem), cfg)
    # the process pool cannot ship individuals back; drop them everywhere for uniformity
    rec.front_individuals, rec.individuals = [], {}
    return rec


def execute(exp: ExperimentConfig, jobs: int = 1) -> list[tuple[str, RunRecord]]:
    tasks = [(s, seed) for s in exp.strategies for seed in exp.seeds]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_one_run, exp.problem, exp.sim, s, seed) for s, seed in tasks]
            results = [f.result() for f in futures]
    else:
        results = [_one_run(exp.problem, exp.sim, s, seed) for s, seed in tasks]
    return [(s.label, rec) for (s, _), rec in zip(tasks, results)]


def write_outputs(out_dir: Path, records, problem, reference_point=None) -> list[dict]:
    rows = score_records(records, problem, reference_point)
    for label, rec in records:
        summary_path, events_path = run_paths(out_dir, label, rec.seed)
        atomic_write(summary_path, rec.to_json())
        atomic_write(events_path, rec.events_jsonl())
    if problem.n_objectives == 2 and records:
        ref = records[0][1].metrics.get("reference_point")
        if ref is not None:
            labels = list(dict.fromkeys(lab for lab, _ in records))
            for label, pts in median_attainment(records, labels, ref).items():
                atomic_write(out_dir / "attainment" / f"{label}.csv", polyline_csv(pts))
    atomic_write(out_dir / "summary.csv", summary_csv(rows))
    return rows


def cmd_run(config_path, seed=None, out=None, jobs=1) -> int:
    exp = parse_experiment(load_yaml(config_path), seed, out)
    problem = problem_from_descriptor(exp.problem)
    records = execute(exp, jobs)
    rows = write_outputs(exp.output_dir, records, problem, exp.reference_point)
    print(f"wrote {len(rows)} runs to {exp.output_dir}")
    return EXIT_OK


def cmd_study(config_path=None, seed=None, out=None) -> int:
    data = load_yaml(config_path) if config_path else None
    config = parse_study(data, seed)
    out_dir = Path(out if out is not None else (data or {}).get("output_dir", "results"))
    result = het_study.run_study(config)
    path = out_dir / "study.csv"
    atomic_write(path, result.to_csv())
    print(f"wrote {len(result.cells)} cells to {path}")
    return EXIT_OK


def cmd_metrics(run_dir, config_path=None) -> int:
    """Recompute hv/igd (and attainment surfaces) from the stored run records."""
    run_dir = Path(run_dir)
    files = sorted((run_dir / "runs").glob("*.json"))
    if not files:
        raise FileNotFoundError(f"no run records under {run_dir / 'runs'}")
    records = []
    for path in files:
        rec = RunRecord.from_files(path.read_text())
        strategy = StrategyConfig.from_dict(rec.config["strategy"])
        records.append((strategy.label, rec))
    problems = {json.dumps(rec.config["problem"], sort_keys=True) for _, rec in records}
    if len(problems) != 1:
        raise ValueError("run records come from different problems")
    problem = problem_from_descriptor(records[0][1].config["problem"])
    ref = None
    if config_path:
        ref = parse_experiment(load_yaml(config_path)).reference_point
    order = {}
    records.sort(key=lambda lr: (order.setdefault(lr[0], len(order)), lr[1].seed))
    rows = score_records(records, problem, ref)
    atomic_write(run_dir / "summary.csv", summary_csv(rows))
    sys.stdout.write(summary_csv(rows))
    return EXIT_OK


@dataclass(frozen=True)
class Comparison:
    n: int
    median_difference: float
    statistic: float
    p_value: float

    def to_dict(self) -> dict:
        return {"n": self.n, "median_difference": self.median_difference,
                "statistic": self.statistic, "p_value": self.p_value}


def compare_metric(rows: list[dict], strategy_a: str, strategy_b: str, metric: str,
                   alternative: str = "greater") -> Comparison:
    """Paired one-sided Wilcoxon signed-rank test of A against B over shared seeds."""
    a = {r["seed"]: r[metric] for r in rows if r["strategy"] == strategy_a}
    b = {r["seed"]: r[metric] for r in rows if r["strategy"] == strategy_b}
    seeds = sorted(s for s in set(a) & set(b) if not (math.isnan(a[s]) or math.isnan(b[s])))
    if len(seeds) < 5:
        raise InsufficientPairs(f"{len(seeds)} paired seeds, need at least 5")
    d = np.array([a[s] - b[s] for s in seeds], dtype=float)
    med = float(np.median(d))
    if not np.any(d != 0):
        return Comparison(len(seeds), med, 0.0, 1.0)
    res = stats.wilcoxon(d, alternative=alternative)
    return Comparison(len(seeds), med, float(res.statistic), float(res.pvalue))


def cmd_compare(summary_path, strategy_a, strategy_b, metric="hv", alternative="greater") -> int:
    rows = read_summary_csv(Path(summary_path).read_text())
    if metric not in ("hv", "igd", "fe_slow", "fe_fast"):
        raise ConfigInvalid("metric", f"unknown metric {metric!r}")
    result = compare_metric(rows, strategy_a, strategy_b, metric, alternative)
    print(json.dumps({"a": strategy_a, "b": strategy_b, "metric": metric,
                      "alternative": alternative, **result.to_dict()}))
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hetlat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run every (strategy, seed) pair of an experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, help="run only this seed")
    p.add_argument("--out", help="output directory (overrides output_dir)")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")

    p = sub.add_parser("study", help="pairwise latency-difference study")
    p.add_argument("--config", help="YAML file with an optional 'study' section")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")

    p = sub.add_parser("metrics", help="recompute indicators from stored fronts")
    p.add_argument("--out", required=True, help="directory written by 'run'")
    p.add_argument("--config", help="experiment config (for a fixed reference point)")

    p = sub.add_parser("compare", help="paired one-sided Wilcoxon test between two strategies")
    p.add_argument("--summary", required=True, help="summary.csv written by 'run'")
    p.add_argument("-a", "--strategy-a", required=True)
    p.add_argument("-b", "--strategy-b", required=True)
    p.add_argument("--metric", default="hv")
    p.add_argument("--alternative", choices=("greater", "less"), default="greater",
                   help="'greater' tests A > B")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            if args.jobs < 1:
                raise ConfigInvalid("jobs", "must be >= 1")
            return cmd_run(args.config, args.seed, args.out, args.jobs)
        if args.command == "study":
            return cmd_study(args.config, args.seed, args.out)
        if args.command == "metrics":
            return cmd_metrics(args.out, args.config)
        return cmd_compare(args.summary, args.strategy_a, args.strategy_b, args.metric, args.alternative)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BudgetTooSmall, SimulationError, SurrogateFitFailure, InsufficientPairs,
            OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
