"""Repeated factorize-cluster-score runs and their CSV/PGM reports.

Output files (column orders are fixed):

``summary.csv``
    variant, param, value, repetitions, accuracy_mean, accuracy_std,
    nmi_mean, nmi_std, objective_mean
``runs.csv``
    variant, param, value, repetition, seed, accuracy, nmi,
    final_objective, iterations
``runs.jsonl``
    one :class:`RunRecord` per line, including wall time
``objectives/<tag>_r<rep>.csv``
    iteration, objective, reconstruction_error
``weights/<tag>.csv`` (+ ``<tag>.pgm`` for image data)
    feature, weight
``bases/<tag>.csv``
    M x K base matrix, each column scaled to sum to 1
``embedding/<tag>.csv`` (rank-2 runs only)
    sample, h1, h2, label

``<tag>`` is the variant name, followed by ``_<param>=<value>`` for the
weighted variants. Standard deviations are population (ddof=0). Every
number is written with Python's shortest round-trip ``repr``, so a given
ExperimentSpec produces byte-identical CSV files. Wall times only go to the JSONL.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .config import ExperimentSpec
from .data import Dataset, load_csv_dataset, load_iris, load_pgm_directory, make_low_rank, normalized, write_pgm
from .evaluation import evaluate_clustering
from .nmf import AlgorithmConfig, FactorizationState, Variant
from .numerics import make_rng, split_rng
from .solver import run

log = logging.getLogger(__name__)

CLUSTER_STREAM = 1


class ExperimentError(RuntimeError):
    pass


@dataclass
class RunRecord:
    variant: str
    param: str
    value: float | None
    repetition: int
    seed: int
    accuracy: float
    nmi: float
    final_objective: float
    iterations: int
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunRecord":
        return cls.from_dict(json.loads(text))


@dataclass
class SummaryRow:
    variant: str
    param: str
    value: float | None
    repetitions: int
    accuracy_mean: float
    accuracy_std: float
    nmi_mean: float
    nmi_std: float
    objective_mean: float


@dataclass
class BenchmarkResult:
    records: list[RunRecord]
    summary: list[SummaryRow]
    dataset: Dataset
    rank: int
    histories: dict[tuple[str, int], tuple[list[float], list[float]]] = field(default_factory=dict)
    states: dict[str, FactorizationState] = field(default_factory=dict)

    def best(self, variant: str | Variant, by: str = "accuracy_mean") -> SummaryRow:
        """Highest-scoring grid point of ``variant``."""
        name = Variant.parse(variant).value if isinstance(variant, str) else variant.value
        rows = [r for r in self.summary if r.variant == name]
        if not rows:
            raise KeyError(f"no results for {name}")
        return max(rows, key=lambda r: getattr(r, by))


def format_number(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    text = repr(float(v))
    return text[:-2] if text.endswith(".0") else text


def config_tag(variant: Variant | str, value: float | None) -> str:
    v = Variant.parse(variant) if isinstance(variant, str) else variant
    if v.hyperparameter is None:
        return v.value
    return f"{v.value}_{v.hyperparameter}={format_number(value)}"


def repetition_seed(base_seed: int, repetition: int) -> int:
    return base_seed + repetition


def load_dataset(spec: ExperimentSpec) -> Dataset:
    name = spec.dataset
    if name == "iris":
        ds = load_iris()
    elif name == "synthetic":
        ds = make_low_rank(make_rng(spec.base_seed))
    elif Path(name).is_dir():
        ds = load_pgm_directory(name)
    else:
        ds = load_csv_dataset(name, label_column=spec.label_column, header=spec.header, feature_shape=spec.feature_shape)
    ds = normalized(ds) if spec.normalize else ds
    if np.any(ds.x < 0):
        raise ExperimentError(f"dataset {ds.name} has negative entries; enable normalize or fix the data")
    return ds


def run_benchmark(spec: ExperimentSpec, dataset: Dataset | None = None) -> BenchmarkResult:
    """Factorize, cluster the columns of H with k-means, and score, for every
    configuration and repetition.

    Repetition ``r`` uses seed ``base_seed + r`` for every configuration, so
    all methods share initial factors within a repetition. Factor
    initialization draws from Philox stream 0 of that seed and k-means from
    stream 1.
    """
    ds = dataset if dataset is not None else load_dataset(spec)
    k = ds.n_classes
    rank = spec.rank or k
    records: list[RunRecord] = []
    histories = {}
    states = {}
    for variant, value in spec.configurations():
        tag = config_tag(variant, value)
        for rep in range(spec.repetitions):
            seed = repetition_seed(spec.base_seed, rep)
            cfg = AlgorithmConfig(
                variant=variant,
                rank=rank,
                p=value if variant.uses_p else None,
                gamma=value if variant.uses_gamma else None,
                max_iter=spec.max_iter,
                rel_tol=spec.rel_tol,
                seed=seed,
            )
            start = time.perf_counter()
            try:
                state = run(ds.x, cfg)
                report = evaluate_clustering(state.h, ds.labels, k, split_rng(seed, CLUSTER_STREAM), seed=seed)
            except (ValueError, ArithmeticError) as exc:
                raise ExperimentError(f"{tag} repetition {rep} (seed {seed}) on {ds.name}: {exc}") from exc
            elapsed = time.perf_counter() - start
            records.append(
                RunRecord(
                    variant=variant.value,
                    param=variant.hyperparameter or "",
                    value=value,
                    repetition=rep,
                    seed=seed,
                    accuracy=report.accuracy,
                    nmi=report.nmi,
                    final_objective=state.objective_history[-1],
                    iterations=state.iterations_run,
                    wall_time=elapsed,
                )
            )
            histories[(tag, rep)] = (state.objective_history, state.reconstruction_history)
            if rep == 0:
                states[tag] = state
        log.info("%s: done %d repetitions", tag, spec.repetitions)
    return BenchmarkResult(
        records=records, summary=summarize(records), dataset=ds, rank=rank, histories=histories, states=states
    )


def summarize(records: list[RunRecord]) -> list[SummaryRow]:
    groups: dict[tuple, list[RunRecord]] = {}
    for r in records:
        groups.setdefault((r.variant, r.param, r.value), []).append(r)
    rows = []
    for (variant, param, value), rs in groups.items():
        acc = np.array([r.accuracy for r in rs])
        nm = np.array([r.nmi for r in rs])
        obj = np.array([r.final_objective for r in rs])
        rows.append(
            SummaryRow(
                variant=variant,
                param=param,
                value=value,
                repetitions=len(rs),
                accuracy_mean=float(acc.mean()),
                accuracy_std=float(acc.std()),
                nmi_mean=float(nm.mean()),
                nmi_std=float(nm.std()),
                objective_mean=float(obj.mean()),
            )
        )
    return rows


def _write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_number(c) if not isinstance(c, str) else c for c in row])


def write_objective_csv(path, objective_history, reconstruction_history) -> None:
    rows = ((i + 1, f, r) for i, (f, r) in enumerate(zip(objective_history, reconstruction_history)))
    _write_csv(Path(path), ["iteration", "objective", "reconstruction_error"], rows)


def write_weights(path_stem, w, feature_shape=None) -> None:
    stem = Path(path_stem)
    _write_csv(stem.with_suffix(".csv"), ["feature", "weight"], enumerate(np.asarray(w).tolist()))
    if feature_shape is not None:
        write_pgm(stem.with_suffix(".pgm"), np.asarray(w).reshape(feature_shape))


def write_matrix_csv(path, a) -> None:
    a = np.asarray(a)
    _write_csv(Path(path), [f"c{j + 1}" for j in range(a.shape[1])], a.tolist())


def column_normalized(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    sums = a.sum(axis=0, keepdims=True)
    return np.divide(a, sums, out=np.zeros_like(a), where=sums > 0)


def emit_reports(result: BenchmarkResult, outdir) -> list[Path]:
    """Write every report for ``result`` under ``outdir``; returns the paths."""
    out = Path(outdir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ExperimentError(f"cannot write reports to {out}: {exc}") from exc

    written = []
    summary_path = out / "summary.csv"
    _write_csv(
        summary_path,
        ["variant", "param", "value", "repetitions", "accuracy_mean", "accuracy_std", "nmi_mean", "nmi_std", "objective_mean"],
        (
            [r.variant, r.param, r.value, r.repetitions, r.accuracy_mean, r.accuracy_std, r.nmi_mean, r.nmi_std, r.objective_mean]
            for r in result.summary
        ),
    )
    written.append(summary_path)

    runs_path = out / "runs.csv"
    _write_csv(
        runs_path,
        ["variant", "param", "value", "repetition", "seed", "accuracy", "nmi", "final_objective", "iterations"],
        (
            [r.variant, r.param, r.value, r.repetition, r.seed, r.accuracy, r.nmi, r.final_objective, r.iterations]
            for r in result.records
        ),
    )
    written.append(runs_path)

    jsonl = out / "runs.jsonl"
    jsonl.write_text("".join(r.to_json() + "\n" for r in result.records))
    written.append(jsonl)

    for (tag, rep), (obj, rec) in result.histories.items():
        p = out / "objectives" / f"{tag}_r{rep}.csv"
        write_objective_csv(p, obj, rec)
        written.append(p)

    ds = result.dataset
    for tag, state in result.states.items():
        write_weights(out / "weights" / tag, state.w, ds.feature_shape)
        written.append(out / "weights" / f"{tag}.csv")
        base = column_normalized(state.base(ds.x))
        write_matrix_csv(out / "bases" / f"{tag}.csv", base)
        written.append(out / "bases" / f"{tag}.csv")
        if result.rank == 2:
            p = out / "embedding" / f"{tag}.csv"
            _write_csv(
                p,
                ["sample", "h1", "h2", "label"],
                ([j, state.h[0, j], state.h[1, j], int(ds.labels[j])] for j in range(ds.n_samples)),
            )
            written.append(p)
    return written


# corrupted-pixel weight experiment


@dataclass
class CorruptionRow:
    variant: str
    param: str
    value: float
    corrupted_mean_weight: float
    clean_mean_weight: float
    ratio: float


def weight_suppression(w, corrupted_idx) -> tuple[float, float, float]:
    """Mean weight on corrupted features, on the rest, and their ratio."""
    w = np.asarray(w)
    mask = np.zeros(w.size, dtype=bool)
    mask[np.asarray(corrupted_idx)] = True
    bad, good = float(w[mask].mean()), float(w[~mask].mean())
    return bad, good, bad / good


def corruption_experiment(
    dataset: Dataset,
    corrupted_idx,
    rank: int,
    p_grid=None,
    gamma_grid=None,
    max_iter: int = 300,
    seed: int = 0,
) -> tuple[list[CorruptionRow], dict[str, FactorizationState]]:
    """Learn weights on corrupted data for each fuzzifier/entropy setting."""
    from .config import CORRUPTION_GAMMA_GRID, CORRUPTION_P_GRID

    p_grid = CORRUPTION_P_GRID if p_grid is None else p_grid
    gamma_grid = CORRUPTION_GAMMA_GRID if gamma_grid is None else gamma_grid
    rows, states = [], {}
    jobs = [(Variant.FWNMF, p) for p in p_grid] + [(Variant.ERWNMF, g) for g in gamma_grid]
    for variant, value in jobs:
        cfg = AlgorithmConfig(
            variant=variant,
            rank=rank,
            p=value if variant.uses_p else None,
            gamma=value if variant.uses_gamma else None,
            max_iter=max_iter,
            seed=seed,
        )
        state = run(dataset.x, cfg)
        bad, good, ratio = weight_suppression(state.w, corrupted_idx)
        rows.append(CorruptionRow(variant.value, variant.hyperparameter, value, bad, good, ratio))
        states[config_tag(variant, value)] = state
    return rows, states


def emit_corruption_reports(rows, states, dataset: Dataset, corrupted_idx, outdir, n_images: int = 6) -> list[Path]:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    p = out / "corruption_summary.csv"
    _write_csv(
        p,
        ["variant", "param", "value", "corrupted_mean_weight", "clean_mean_weight", "ratio"],
        ([r.variant, r.param, r.value, r.corrupted_mean_weight, r.clean_mean_weight, r.ratio] for r in rows),
    )
    written.append(p)
    _write_csv(out / "corrupted_features.csv", ["feature"], ([int(i)] for i in np.sort(corrupted_idx)))
    written.append(out / "corrupted_features.csv")
    for tag, state in states.items():
        write_weights(out / "weights" / tag, state.w, dataset.feature_shape)
        written.append(out / "weights" / f"{tag}.csv")
    if dataset.feature_shape is not None:
        for j in range(min(n_images, dataset.n_samples)):
            img = out / "images" / f"sample_{j}.pgm"
            img.parent.mkdir(parents=True, exist_ok=True)
            write_pgm(img, dataset.x[:, j].reshape(dataset.feature_shape))
            written.append(img)
    return written
