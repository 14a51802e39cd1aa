"""Experiment specifications and their flat ``key = value`` file format.

Example::

    # Iris, 20 repetitions of 300 iterations
    dataset = iris
    variants = nmf, fwnmf, erwnmf
    p = 1.5..30:0.5
    gamma = 2^1..2^31
    repetitions = 20
    max_iter = 300
    base_seed = 0
    output = results/iris

Recognized keys:

``dataset``
    ``iris``, ``synthetic``, a CSV file (one sample per row) or a directory
    of PGM images (one subdirectory per class).
``label_column``
    Column index or header name of the labels in a CSV dataset (default -1).
``header``
    ``true``/``false``/``auto`` for CSV datasets (default ``auto``).
``feature_shape``
    ``HxW`` image shape of a CSV dataset's feature vector (optional).
``normalize``
    Min-max scale each sample into [0, 1] before factorizing (default true).
``rank``
    Reduced dimension K (default: number of classes).
``variants``
    Comma-separated variant names.
``p``, ``gamma``
    Hyperparameter grids for the fuzzifier and entropy variants. A grid is a
    comma-separated list whose items are numbers, ``a..b:step`` inclusive
    linear ranges, or ``2^i..2^j`` powers of two.
``repetitions``, ``max_iter``, ``rel_tol``, ``base_seed``, ``output``
    As in :class:`ExperimentSpec`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .nmf import ConfigError, Variant

_KEYS = {
    "dataset", "label_column", "header", "feature_shape", "normalize", "rank",
    "variants", "p", "gamma", "repetitions", "max_iter", "rel_tol", "base_seed", "output",
}

SENSITIVITY_P_GRID = [0.5 * i for i in range(9, 19)]
SENSITIVITY_GAMMA_GRID = [2.0**i for i in range(22, 32)]
TUNING_P_GRID = [0.5 * i for i in range(3, 61)]
TUNING_GAMMA_GRID = [2.0**i for i in range(1, 32)]
CORRUPTION_P_GRID = [4.0, 4.5, 5.0, 5.5, 6.0, 6.5]
CORRUPTION_GAMMA_GRID = [2.0**i for i in range(2, 8)]


@dataclass
class ExperimentSpec:
    dataset: str
    variants: list[Variant]
    p_grid: list[float] = field(default_factory=list)
    gamma_grid: list[float] = field(default_factory=list)
    repetitions: int = 20
    max_iter: int = 300
    rel_tol: float = 0.0
    rank: int | None = None
    base_seed: int = 0
    output: str | None = None
    label_column: int | str | None = -1
    header: bool | None = None
    feature_shape: tuple[int, int] | None = None
    normalize: bool = True

    def __post_init__(self):
        self.variants = [Variant.parse(v) if isinstance(v, str) else v for v in self.variants]
        self.validate()

    def validate(self) -> None:
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if self.max_iter < 1:
            raise ConfigError("max_iter must be >= 1")
        if not self.variants:
            raise ConfigError("at least one variant is required")
        for v in self.variants:
            if v.uses_p and not self.p_grid:
                raise ConfigError(f"{v.value} needs a p grid")
            if v.uses_gamma and not self.gamma_grid:
                raise ConfigError(f"{v.value} needs a gamma grid")
        if any(not p > 1 for p in self.p_grid):
            raise ConfigError("every p must be > 1")
        if any(not g > 0 for g in self.gamma_grid):
            raise ConfigError("every gamma must be > 0")

    def configurations(self) -> list[tuple[Variant, float | None]]:
        """(variant, hyperparameter) pairs in run order."""
        out = []
        for v in self.variants:
            if v.uses_p:
                out.extend((v, p) for p in self.p_grid)
            elif v.uses_gamma:
                out.extend((v, g) for g in self.gamma_grid)
            else:
                out.append((v, None))
        return out


def _number(token: str) -> Fraction:
    return Fraction(token.strip())


def parse_grid(text: str) -> list[float]:
    """Expand a grid expression such as ``"4.5..9:0.5"`` or ``"2^1..2^31"``."""
    values: list[float] = []
    for item in (t.strip() for t in text.split(",")):
        if not item:
            continue
        m = re.fullmatch(r"2\^(-?\d+)\s*\.\.\s*2\^(-?\d+)", item)
        if m:
            lo, hi = int(m.group(1)), int(m.group(2))
            values.extend(2.0**i for i in range(lo, hi + 1))
            continue
        m = re.fullmatch(r"2\^(-?\d+)", item)
        if m:
            values.append(2.0 ** int(m.group(1)))
            continue
        m = re.fullmatch(r"([^.:]+(?:\.\d+)?)\s*\.\.\s*([^:]+?)\s*:\s*(.+)", item)
        if m:
            # exact rational stepping so 4.5..9:0.5 ends exactly on 9
            lo, hi, step = (_number(g) for g in m.groups())
            if step <= 0:
                raise ConfigError(f"grid step must be positive in {item!r}")
            v = lo
            while v <= hi:
                values.append(float(v))
                v += step
            continue
        try:
            values.append(float(item))
        except ValueError:
            raise ConfigError(f"cannot parse grid item {item!r}") from None
    return values


def _bool(text: str) -> bool | None:
    t = text.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    if t in ("auto", ""):
        return None
    raise ConfigError(f"expected a boolean, got {text!r}")


def parse_config_text(text: str, base_dir: Path | None = None) -> ExperimentSpec:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    if "dataset" not in raw or "variants" not in raw:
        raise ConfigError("config needs 'dataset' and 'variants'")

    dataset = raw["dataset"]
    if base_dir is not None and dataset not in ("iris", "synthetic") and not Path(dataset).is_absolute():
        dataset = str(base_dir / dataset)
    output = raw.get("output")
    if output and base_dir is not None and not Path(output).is_absolute():
        output = str(base_dir / output)

    label_column: int | str | None = raw.get("label_column", "-1")
    if label_column.lower() == "none":
        label_column = None
    elif re.fullmatch(r"-?\d+", label_column):
        label_column = int(label_column)

    feature_shape = None
    if raw.get("feature_shape"):
        from .data import parse_shape

        feature_shape = parse_shape(raw["feature_shape"])

    try:
        return ExperimentSpec(
            dataset=dataset,
            variants=[v for v in (t.strip() for t in raw["variants"].split(",")) if v],
            p_grid=parse_grid(raw.get("p", "")),
            gamma_grid=parse_grid(raw.get("gamma", "")),
            repetitions=int(raw.get("repetitions", 20)),
            max_iter=int(raw.get("max_iter", 300)),
            rel_tol=float(raw.get("rel_tol", 0.0)),
            rank=int(raw["rank"]) if raw.get("rank") else None,
            base_seed=int(raw.get("base_seed", 0)),
            output=output,
            label_column=label_column,
            header=_bool(raw.get("header", "auto")),
            feature_shape=feature_shape,
            normalize=bool(_bool(raw.get("normalize", "true"))),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def load_config(path) -> ExperimentSpec:
    path = Path(path)
    return parse_config_text(path.read_text(), base_dir=path.parent)
