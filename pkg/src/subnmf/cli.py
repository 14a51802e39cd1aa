"""Command line entry point: ``subnmf run | corrupt-demo | factorize``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import harness
from .config import ConfigError, load_config, parse_grid
from .data import (
    DatasetError,
    Dataset,
    corrupt_block,
    load_csv_dataset,
    load_iris,
    load_pgm_directory,
    make_low_rank,
    normalize_samples,
    normalized,
    parse_shape,
    read_matrix_csv,
)
from .nmf import AlgorithmConfig, Variant
from .numerics import make_rng, split_rng
from .solver import run


def _cmd_run(args) -> int:
    spec = load_config(args.config)
    if args.out:
        spec.output = args.out
    if not spec.output:
        raise ConfigError("no output directory: set 'output' in the config or pass --out")
    result = harness.run_benchmark(spec)
    harness.emit_reports(result, spec.output)
    for row in result.summary:
        label = harness.config_tag(row.variant, row.value)
        print(f"{label:32s} acc {row.accuracy_mean:.4f}±{row.accuracy_std:.4f}  nmi {row.nmi_mean:.4f}±{row.nmi_std:.4f}")
    print(f"reports written to {spec.output}")
    return 0


def _load_any(path: str, feature_shape, label_column, header) -> Dataset:
    if path == "synthetic":
        return make_low_rank(make_rng(0))
    if path == "iris":
        return load_iris()
    if Path(path).is_dir():
        return load_pgm_directory(path)
    return load_csv_dataset(path, label_column=label_column, header=header, feature_shape=feature_shape)


def _cmd_corrupt_demo(args) -> int:
    shape = parse_shape(args.feature_shape) if args.feature_shape else None
    ds = _load_any(args.dataset, shape, args.label_column, None)
    if ds.feature_shape is None:
        raise DatasetError("corrupt-demo needs image data: pass --feature-shape HxW for CSV input")
    ds = normalized(ds)
    bh, bw = parse_shape(args.block)
    corrupted, idx = corrupt_block(ds, bh, bw, args.position, split_rng(args.seed, 2))
    rank = args.k or ds.n_classes
    p_grid = parse_grid(args.p) if args.p else None
    gamma_grid = parse_grid(args.gamma) if args.gamma else None
    rows, states = harness.corruption_experiment(
        corrupted, idx, rank, p_grid, gamma_grid, max_iter=args.iters, seed=args.seed
    )
    harness.emit_corruption_reports(rows, states, corrupted, idx, args.out)
    print(f"{idx.size} corrupted features")
    for r in rows:
        print(f"{r.variant:8s} {r.param}={harness.format_number(r.value):>6s}  corrupted/clean weight {r.ratio:.4g}")
    print(f"reports written to {args.out}")
    return 0


def _cmd_factorize(args) -> int:
    x = read_matrix_csv(args.input, header=args.header)
    if args.samples_as_rows:
        x = x.T
    if args.normalize:
        x = normalize_samples(x)
    variant = Variant.parse(args.variant)
    cfg = AlgorithmConfig(
        variant=variant,
        rank=args.k,
        p=args.p,
        gamma=args.gamma,
        max_iter=args.iters,
        rel_tol=args.rel_tol,
        seed=args.seed,
    )
    state = run(x, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    harness.write_matrix_csv(out / "S.csv", state.s)
    harness.write_matrix_csv(out / "H.csv", state.h)
    harness.write_weights(out / "W", state.w)
    harness.write_objective_csv(out / "objective.csv", state.objective_history, state.reconstruction_history)
    print(f"{variant.value}: {state.iterations_run} iterations, final objective {state.objective_history[-1]:.6g}")
    print(f"factors written to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="subnmf", description="Subspace NMF with adaptive feature weights.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a benchmark described by a config file")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", help="override the config's output directory")
    p_run.set_defaults(func=_cmd_run)

    p_demo = sub.add_parser("corrupt-demo", help="learn feature weights on images with a corrupted block")
    p_demo.add_argument("--dataset", required=True, help="'synthetic', a PGM directory, or a CSV file")
    p_demo.add_argument("--block", default="12x12")
    p_demo.add_argument("--position", choices=["center", "random"], default="center")
    p_demo.add_argument("--feature-shape", help="HxW image shape for CSV datasets")
    p_demo.add_argument("--label-column", default=-1, type=lambda s: int(s) if s.lstrip("-").isdigit() else s)
    p_demo.add_argument("--k", type=int, help="reduced dimension (default: number of classes)")
    p_demo.add_argument("--p", help="fuzzifier grid (default 4..6.5:0.5)")
    p_demo.add_argument("--gamma", help="entropy grid (default 2^2..2^7)")
    p_demo.add_argument("--iters", type=int, default=300)
    p_demo.add_argument("--seed", type=int, default=0)
    p_demo.add_argument("--out", default="corrupt-demo")
    p_demo.set_defaults(func=_cmd_corrupt_demo)

    p_fac = sub.add_parser("factorize", help="factorize one matrix and write W, S, H")
    p_fac.add_argument("--variant", required=True, choices=[v.value for v in Variant])
    p_fac.add_argument("--k", type=int, required=True)
    p_fac.add_argument("--p", type=float)
    p_fac.add_argument("--gamma", type=float)
    p_fac.add_argument("--iters", type=int, default=300)
    p_fac.add_argument("--rel-tol", type=float, default=0.0)
    p_fac.add_argument("--seed", type=int, default=0)
    p_fac.add_argument("--input", required=True, help="CSV matrix, features as rows unless --samples-as-rows")
    p_fac.add_argument("--header", action="store_true", help="skip the first CSV row")
    p_fac.add_argument("--samples-as-rows", action="store_true")
    p_fac.add_argument("--normalize", action="store_true", help="min-max scale each sample to [0, 1]")
    p_fac.add_argument("--out", required=True)
    p_fac.set_defaults(func=_cmd_factorize)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, DatasetError, FileNotFoundError, harness.ExperimentError, ValueError) as exc:
        print(f"subnmf: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
