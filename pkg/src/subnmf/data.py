"""Datasets: CSV and PGM loading, normalization, synthetic data, corruption."""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

import numpy as np


class DatasetError(ValueError):
    """Base class for dataset ingestion failures."""


class EmptyDatasetError(DatasetError):
    pass


class RaggedRowsError(DatasetError):
    pass


class NonNumericFeatureError(DatasetError):
    pass


class TooFewSamplesError(DatasetError):
    pass


class PGMFormatError(DatasetError):
    pass


@dataclass
class Dataset:
    """``x`` is features x samples; ``labels`` has one entry per column."""

    x: np.ndarray
    labels: np.ndarray
    name: str = "dataset"
    feature_shape: tuple[int, int] | None = None
    class_names: list[str] | None = None

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.x.ndim != 2:
            raise DatasetError(f"x must be 2-D, got shape {self.x.shape}")
        if self.labels.shape != (self.x.shape[1],):
            raise DatasetError(f"{self.labels.size} labels for {self.x.shape[1]} samples")
        if self.feature_shape is not None:
            fh, fw = self.feature_shape
            if fh * fw != self.x.shape[0]:
                raise DatasetError(f"feature_shape {fh}x{fw} does not match {self.x.shape[0]} features")

    @property
    def n_features(self) -> int:
        return self.x.shape[0]

    @property
    def n_samples(self) -> int:
        return self.x.shape[1]

    @property
    def n_classes(self) -> int:
        return int(np.unique(self.labels).size)


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def _encode_labels(raw: list[str]) -> tuple[np.ndarray, list[str]]:
    """Integer labels keep their sorted order; anything else is numbered by first appearance."""
    if all(re.fullmatch(r"[+-]?\d+(\.0*)?", v.strip()) for v in raw):
        values = [int(float(v)) for v in raw]
        uniq = sorted(set(values))
        index = {v: i for i, v in enumerate(uniq)}
        return np.array([index[v] for v in values]), [str(v) for v in uniq]
    index: dict[str, int] = {}
    for v in raw:
        index.setdefault(v.strip(), len(index))
    return np.array([index[v.strip()] for v in raw]), list(index)


def load_csv_dataset(
    path,
    label_column: int | str | None = -1,
    header: bool | None = None,
    feature_shape: tuple[int, int] | None = None,
    name: str | None = None,
) -> Dataset:
    """Read a table with one sample per row into a features x samples dataset.

    ``label_column`` is a column index (negative counts from the end), a
    header name, or ``None`` for unlabeled data. ``header=None`` treats the
    first row as a header when any of its feature cells is non-numeric.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"dataset file not found: {path}")
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise EmptyDatasetError(f"{path} is empty")

    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise RaggedRowsError(f"{path}: row {i + 1} has {len(r)} fields, expected {width}")

    names = None
    if isinstance(label_column, str):
        if header is False:
            raise DatasetError("a named label column needs a header row")
        header = True
    if header is None:
        label_idx = None if label_column is None else int(label_column) % width
        header = any(not _is_number(c) for j, c in enumerate(rows[0]) if j != label_idx)
    if header:
        names, rows = [c.strip() for c in rows[0]], rows[1:]
    if isinstance(label_column, str):
        if label_column not in names:
            raise DatasetError(f"no column named {label_column!r} in {path}")
        label_idx = names.index(label_column)
    elif label_column is None:
        label_idx = None
    else:
        if not -width <= int(label_column) < width:
            raise DatasetError(f"label column {label_column} out of range for {width} columns")
        label_idx = int(label_column) % width

    if len(rows) < 2:
        raise TooFewSamplesError(f"{path}: need at least 2 samples, found {len(rows)}")
    feature_idx = [j for j in range(width) if j != label_idx]
    if not feature_idx:
        raise DatasetError(f"{path} has no feature columns")
    try:
        x = np.array([[float(r[j]) for j in feature_idx] for r in rows], dtype=np.float64)
    except ValueError as exc:
        raise NonNumericFeatureError(f"{path}: {exc}") from None
    if not np.all(np.isfinite(x)):
        raise NonNumericFeatureError(f"{path}: features contain NaN or Inf")

    if label_idx is None:
        labels, class_names = np.zeros(len(rows), dtype=np.int64), None
    else:
        labels, class_names = _encode_labels([r[label_idx] for r in rows])
    return Dataset(
        x=x.T.copy(),
        labels=labels,
        name=name or path.stem,
        feature_shape=feature_shape,
        class_names=class_names,
    )


def load_iris() -> Dataset:
    """The bundled 150-sample UCI Iris table."""
    ref = resources.files("subnmf") / "data" / "iris.csv"
    with resources.as_file(ref) as p:
        return load_csv_dataset(p, label_column="species", name="iris")


def read_matrix_csv(path, header: bool = False) -> np.ndarray:
    """A plain numeric CSV as a 2-D array, rows as written."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"matrix file not found: {path}")
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if header:
        rows = rows[1:]
    if not rows:
        raise EmptyDatasetError(f"{path} is empty")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise RaggedRowsError(f"{path}: rows have differing lengths")
    try:
        return np.array([[float(c) for c in r] for r in rows], dtype=np.float64)
    except ValueError as exc:
        raise NonNumericFeatureError(f"{path}: {exc}") from None


def normalize_samples(x) -> np.ndarray:
    """Min-max scale each column into [0, 1]; constant columns become zeros."""
    x = np.asarray(x, dtype=np.float64)
    lo = x.min(axis=0, keepdims=True)
    span = x.max(axis=0, keepdims=True) - lo
    out = np.zeros_like(x)
    ok = (span > 0).ravel()
    out[:, ok] = (x[:, ok] - lo[:, ok]) / span[:, ok]
    return np.clip(out, 0.0, 1.0)


def normalized(dataset: Dataset) -> Dataset:
    return replace(dataset, x=normalize_samples(dataset.x))


# PGM images


def _pgm_tokens(data: bytes):
    """Yield header tokens and the byte offset just past the last one."""
    pos = 0
    tokens = []
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise PGMFormatError("truncated PGM header")
        tokens.append(data[start:pos].decode("ascii"))
    return tokens, pos + 1


def read_pgm(path) -> np.ndarray:
    """Read a P2 or P5 graymap as a float array scaled to [0, 1]."""
    data = Path(path).read_bytes()
    tokens, offset = _pgm_tokens(data)
    magic, width, height, maxval = tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3])
    if magic == "P5":
        dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
        count = width * height
        pixels = np.frombuffer(data, dtype=dtype, count=count, offset=offset)
    elif magic == "P2":
        pixels = np.array(data[offset:].split()[: width * height], dtype=np.int64)
        if pixels.size != width * height:
            raise PGMFormatError(f"{path}: expected {width * height} pixels, found {pixels.size}")
    else:
        raise PGMFormatError(f"{path}: unsupported magic {magic!r}")
    return pixels.reshape(height, width).astype(np.float64) / maxval


def write_pgm(path, image) -> None:
    """Write an 8-bit binary (P5) graymap, min-max scaling ``image`` to [0, 255].

    A constant image is written as all zeros.
    """
    img = np.asarray(image, dtype=np.float64)
    lo, hi = img.min(), img.max()
    scaled = np.zeros_like(img) if hi <= lo else (img - lo) / (hi - lo) * 255.0
    pixels = np.rint(scaled).astype(np.uint8)
    h, w = pixels.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode("ascii") + pixels.tobytes())


def load_pgm_directory(path, name: str | None = None) -> Dataset:
    """Images under ``path``: one subdirectory per class, or a flat unlabeled folder."""
    root = Path(path)
    if not root.is_dir():
        raise FileNotFoundError(f"image directory not found: {root}")
    subdirs = sorted(d for d in root.iterdir() if d.is_dir())
    groups = [(d.name, sorted(d.glob("*.pgm"))) for d in subdirs] if subdirs else [(root.name, sorted(root.glob("*.pgm")))]
    images, labels, class_names = [], [], []
    for cls, files in groups:
        if not files:
            continue
        class_names.append(cls)
        for f in files:
            images.append(read_pgm(f))
            labels.append(len(class_names) - 1)
    if not images:
        raise EmptyDatasetError(f"no .pgm files under {root}")
    shape = images[0].shape
    if any(im.shape != shape for im in images):
        raise DatasetError(f"images under {root} differ in size")
    if len(images) < 2:
        raise TooFewSamplesError(f"{root}: need at least 2 images")
    x = np.stack([im.ravel() for im in images], axis=1)
    return Dataset(x=x, labels=np.array(labels), name=name or root.name, feature_shape=shape, class_names=class_names)


# synthetic data


def make_low_rank(
    rng: np.random.Generator,
    image_shape: tuple[int, int] = (32, 32),
    n_samples: int = 200,
    rank: int = 5,
    noise: float = 0.0,
) -> Dataset:
    """Exactly low-rank images ``X = S0 @ H0`` with one class per component.

    Each base image is a Gaussian blob on a faint floor; each sample mixes
    all components with most mass on the one given by its label.
    """
    hgt, wid = image_shape
    yy, xx = np.mgrid[0:hgt, 0:wid]
    bases = []
    for _ in range(rank):
        cy, cx = rng.uniform(0, hgt), rng.uniform(0, wid)
        sigma = rng.uniform(0.15, 0.3) * max(hgt, wid)
        blob = np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2 * sigma**2))
        bases.append(0.05 + blob.ravel())
    s0 = np.stack(bases, axis=1)
    labels = np.arange(n_samples) % rank
    h0 = rng.uniform(0.0, 0.3, size=(rank, n_samples))
    h0[labels, np.arange(n_samples)] += 1.0
    x = s0 @ h0
    if noise > 0:
        x = np.maximum(x + noise * rng.standard_normal(x.shape), 0.0)
    return Dataset(x=x, labels=labels, name="synthetic", feature_shape=image_shape)


def block_indices(
    feature_shape: tuple[int, int], block: tuple[int, int], top: int, left: int
) -> np.ndarray:
    hgt, wid = feature_shape
    bh, bw = block
    rows = np.arange(top, top + bh)
    cols = np.arange(left, left + bw)
    return (rows[:, None] * wid + cols[None, :]).ravel()


def corrupt_block(
    dataset: Dataset,
    block_h: int,
    block_w: int,
    position: str = "center",
    rng: np.random.Generator | None = None,
) -> tuple[Dataset, np.ndarray]:
    """Overwrite the same image block in every sample with uniform [0, 1) noise.

    ``position`` is ``"center"`` (block centered, rounding toward the top
    left) or ``"random"`` (top-left corner drawn from ``rng``). Returns the
    corrupted copy and the sorted flat indices of the replaced features.
    """
    if dataset.feature_shape is None:
        raise DatasetError("corruption needs a dataset with an image feature_shape")
    if rng is None:
        raise ValueError("corrupt_block needs an rng")
    hgt, wid = dataset.feature_shape
    if not (1 <= block_h <= hgt and 1 <= block_w <= wid):
        raise DatasetError(f"block {block_h}x{block_w} does not fit in a {hgt}x{wid} image")
    if position == "center":
        top, left = (hgt - block_h) // 2, (wid - block_w) // 2
    elif position == "random":
        top = int(rng.integers(0, hgt - block_h + 1))
        left = int(rng.integers(0, wid - block_w + 1))
    else:
        raise ValueError(f"unknown block position rule {position!r}")
    idx = block_indices(dataset.feature_shape, (block_h, block_w), top, left)
    x = dataset.x.copy()
    x[idx, :] = rng.random((idx.size, dataset.n_samples))
    return replace(dataset, x=x, name=f"{dataset.name}-corrupted"), np.sort(idx)


def parse_shape(text: str) -> tuple[int, int]:
    """``"12x12"`` -> ``(12, 12)``."""
    m = re.fullmatch(r"\s*(\d+)\s*[xX×]\s*(\d+)\s*", text)
    if not m:
        raise ValueError(f"expected HxW, got {text!r}")
    return int(m.group(1)), int(m.group(2))
