"""Adaptive feature weights for NMF.

Every weight rule takes the per-feature squared reconstruction error
``E_i = sum_j (X - SH)_ij^2`` and returns a point on the probability
simplex. Three rules are provided:

* hard: all mass on the best-fit feature(s);
* fuzzifier (exponent ``p > 1``): ``W_i`` proportional to ``E_i^(-1/(p-1))``;
* entropy-regularized (strength ``gamma > 0``): ``W_i`` proportional to
  ``exp(-E_i / gamma)``.

Each is the exact minimizer of its objective over the simplex with the
factors held fixed. The H update then solves a row-weighted least-squares
problem; the S update is the unweighted one because a feature weight only
rescales its own row of the error.
"""

from __future__ import annotations

import numpy as np

from .nmf import _check_factors, _update_s
from .numerics import EPS, ShapeError

SIMPLEX_TOL = 1e-9


def _residual_vector(residuals) -> np.ndarray:
    e = np.asarray(residuals, dtype=np.float64)
    if e.ndim != 1:
        raise ShapeError(f"residuals must be a vector, got shape {e.shape}")
    if e.size == 0:
        raise ValueError("residuals must be non-empty")
    if not np.all(np.isfinite(e)):
        raise ValueError("residuals must be finite")
    if np.any(e < 0):
        raise ValueError("residuals must be nonnegative")
    return e


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = np.exp(logits - logits.max())
    return z / z.sum()


def check_weights(w, m: int | None = None) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1 or (m is not None and w.size != m):
        raise ShapeError(f"weights must be a vector of length {m}, got shape {w.shape}")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and nonnegative")
    if abs(w.sum() - 1.0) > SIMPLEX_TOL:
        raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
    return w


def hard_weight_update(residuals) -> np.ndarray:
    """Indicator of the smallest residual; exact ties share the mass."""
    e = _residual_vector(residuals)
    hit = e == e.min()
    return hit / hit.sum()


def fwnmf_weight_update(residuals, p: float) -> np.ndarray:
    """Fuzzifier weights ``E_i^(-1/(p-1)) / sum_l E_l^(-1/(p-1))``.

    Exactly-zero residuals take the limit of the formula: they split all the
    mass evenly and every other feature gets zero. Any positive residual,
    however small, goes through the formula so the result stays the exact
    minimizer.
    """
    if not p > 1:
        raise ValueError(f"p must be > 1, got {p}")
    e = _residual_vector(residuals)
    zero = e == 0.0
    if zero.any():
        return zero / zero.sum()
    # log domain keeps huge exponents (p near 1) finite
    return _softmax(-np.log(e) / (p - 1.0))


def erwnmf_weight_update(residuals, gamma: float) -> np.ndarray:
    """Entropy-regularized weights ``softmax(-E / gamma)``."""
    if not gamma > 0:
        raise ValueError(f"gamma must be > 0, got {gamma}")
    e = _residual_vector(residuals)
    with np.errstate(over="ignore"):
        logits = -(e - e.min()) / gamma
    return _softmax(logits)


def _row_scale(w: np.ndarray, power: float = 1.0) -> np.ndarray:
    """``w**power`` divided by its maximum.

    The weighted updates are invariant to a common rescaling of the row
    weights; normalizing keeps ``w**p`` from sinking under the division
    guard when M is large and p is big.
    """
    top = w.max()
    if top <= 0:
        raise ValueError("weights are all zero")
    with np.errstate(divide="ignore"):
        return np.exp(power * (np.log(w) - np.log(top)))


def _weighted_update_h(x, s, h, d, eps=EPS):
    ds = d[:, None] * s
    return h * (ds.T @ x) / np.maximum((ds.T @ s) @ h, eps)


def weighted_update_s(x, s, h) -> np.ndarray:
    """Base update for the weighted models; identical to the standard rule."""
    x, s, h = _check_factors(x, s, h)
    return _update_s(x, s, h)


def fwnmf_update_h(x, s, h, w, p: float) -> np.ndarray:
    """``H * [(D S)^T X] / [(D S)^T S H]`` with ``D = diag(w**p)``."""
    x, s, h = _check_factors(x, s, h)
    w = check_weights(w, x.shape[0])
    return _weighted_update_h(x, s, h, _row_scale(w, p))


def erwnmf_update_h(x, s, h, w) -> np.ndarray:
    """``H * [(D S)^T X] / [(D S)^T S H]`` with ``D = diag(w)``."""
    x, s, h = _check_factors(x, s, h)
    w = check_weights(w, x.shape[0])
    return _weighted_update_h(x, s, h, _row_scale(w))


def hard_update_h(x, s, h, w) -> np.ndarray:
    return erwnmf_update_h(x, s, h, w)


def entropy(w: np.ndarray) -> float:
    """``sum w ln w`` with ``0 ln 0 = 0``."""
    pos = w[w > 0]
    return float(np.sum(pos * np.log(pos)))


def _fw_value(e, w, p):
    return float(np.sum(w**p * e))


def _erw_value(e, w, gamma):
    return float(np.dot(w, e)) + gamma * entropy(w)


def _residuals(x, s, h):
    r = x - s @ h
    return np.einsum("ij,ij->i", r, r)


def objective_fwnmf(x, s, h, w, p: float) -> float:
    """``sum_i w_i^p E_i``."""
    x, s, h = _check_factors(x, s, h)
    w = check_weights(w, x.shape[0])
    return _fw_value(_residuals(x, s, h), w, p)


def objective_erwnmf(x, s, h, w, gamma: float) -> float:
    """``sum_i w_i E_i + gamma * sum_i w_i ln w_i``; may be negative."""
    x, s, h = _check_factors(x, s, h)
    w = check_weights(w, x.shape[0])
    return _erw_value(_residuals(x, s, h), w, gamma)


def objective_hard(x, s, h, w) -> float:
    x, s, h = _check_factors(x, s, h)
    w = check_weights(w, x.shape[0])
    return float(np.dot(w, _residuals(x, s, h)))
