"""Dense matrix kernels and seeded random generation.

Matrices are plain 2-D ``float64`` numpy arrays laid out with features as
rows and samples as columns. The kernels here validate shapes and
finiteness so errors surface at the call site instead of deep inside an
update loop.

Random numbers come from numpy's Philox4x64 counter-based generator. Its
output for a given seed is specified bit-for-bit by the algorithm, so a
seed reproduces the same matrices on every platform.
"""

from __future__ import annotations

import numpy as np

EPS = 1e-12


class ShapeError(ValueError):
    """Raised when operand shapes do not conform."""


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a finite 2-D float64 array."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"{name} must have at least one row and column, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


def as_nonnegative(a, name: str = "matrix") -> np.ndarray:
    arr = as_matrix(a, name)
    if np.any(arr < 0):
        raise ValueError(f"{name} has negative entries (min {arr.min():g})")
    return arr


def _same_shape(a: np.ndarray, b: np.ndarray, op: str) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{op}: shape mismatch {a.shape} vs {b.shape}")


def matmul(a, b) -> np.ndarray:
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: cannot multiply {a.shape} by {b.shape}")
    return a @ b


def hadamard(a, b) -> np.ndarray:
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    _same_shape(a, b, "hadamard")
    return a * b


def safe_divide(a, b, eps: float = EPS) -> np.ndarray:
    """Elementwise ``a / max(b, eps)``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    _same_shape(a, b, "safe_divide")
    return a / np.maximum(b, eps)


def transpose(a) -> np.ndarray:
    return np.ascontiguousarray(as_matrix(a).T)


def row_squared_residuals(x, approx) -> np.ndarray:
    """Per-row sum of squared differences, one value per feature."""
    x = as_matrix(x, "x")
    approx = as_matrix(approx, "approx")
    _same_shape(x, approx, "row_squared_residuals")
    diff = x - approx
    return np.einsum("ij,ij->i", diff, diff)


def make_rng(seed: int) -> np.random.Generator:
    """Philox generator keyed by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(int(seed) & 0xFFFFFFFFFFFFFFFF))


def random_uniform_matrix(
    rng: np.random.Generator, rows: int, cols: int, low: float = 0.1, high: float = 1.1
) -> np.ndarray:
    """Entries iid uniform on ``[low, high)``."""
    if not low < high:
        raise ValueError(f"need low < high, got [{low}, {high})")
    if rows < 1 or cols < 1:
        raise ShapeError(f"invalid shape ({rows}, {cols})")
    out = low + (high - low) * rng.random((rows, cols))
    # rounding can land exactly on ``high``
    return np.minimum(out, np.nextafter(high, low))


def split_rng(seed: int, stream: int) -> np.random.Generator:
    """Independent Philox stream ``stream`` for ``seed``.

    Stream 0 is ``make_rng(seed)``; stream ``k`` jumps the counter ahead by
    ``k * 2**128`` draws, so streams never overlap.
    """
    bitgen = np.random.Philox(int(seed) & 0xFFFFFFFFFFFFFFFF)
    if stream:
        bitgen = bitgen.jumped(stream)
    return np.random.Generator(bitgen)
