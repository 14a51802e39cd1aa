"""Feature weighting for ConvexNMF, where the base is ``X @ S``.

Here ``S`` is N x K: each base vector is a nonnegative combination of data
columns. The approximation is ``X S H`` and residuals, weights and
objectives are all measured against it.
"""

from __future__ import annotations

import numpy as np

from .numerics import EPS, ShapeError, as_nonnegative
from .weighted import (
    _erw_value,
    _fw_value,
    _row_scale,
    check_weights,
    erwnmf_weight_update,
    fwnmf_weight_update,
)


def _check_convex(x, s, h):
    x = as_nonnegative(x, "x")
    s = as_nonnegative(s, "s")
    h = as_nonnegative(h, "h")
    m, n = x.shape
    if s.shape[0] != n or h.shape[1] != n or s.shape[1] != h.shape[0]:
        raise ShapeError(
            f"convex factors need s (N x K) and h (K x N) for x {x.shape}, got {s.shape} and {h.shape}"
        )
    return x, s, h


def _convex_residuals(x, s, h):
    r = x - (x @ s) @ h
    return np.einsum("ij,ij->i", r, r)


def convex_residuals(x, s, h) -> np.ndarray:
    """Per-feature squared error of ``X S H``."""
    return _convex_residuals(*_check_convex(x, s, h))


def _update_s(x, s, h, d, eps=EPS):
    dx = d[:, None] * x
    hht = h @ h.T
    num = dx.T @ (x @ h.T)
    den = dx.T @ ((x @ s) @ hht)
    return s * num / np.maximum(den, eps)


def _update_h(x, s, h, d, eps=EPS):
    b = x @ s
    db = d[:, None] * b
    return h * (db.T @ x) / np.maximum((db.T @ b) @ h, eps)


# fuzzifier weighting


def fwconvex_weight_update(x, s, h, p: float) -> np.ndarray:
    return fwnmf_weight_update(convex_residuals(x, s, h), p)


def fwconvex_update_s(x, s, h, w, p: float) -> np.ndarray:
    """``S * [(D X)^T X H^T] / [(D X)^T X S H H^T]``, ``D = diag(w**p)``."""
    x, s, h = _check_convex(x, s, h)
    return _update_s(x, s, h, _row_scale(check_weights(w, x.shape[0]), p))


def fwconvex_update_h(x, s, h, w, p: float) -> np.ndarray:
    """``H * [(D X S)^T X] / [(D X S)^T X S H]``, ``D = diag(w**p)``."""
    x, s, h = _check_convex(x, s, h)
    return _update_h(x, s, h, _row_scale(check_weights(w, x.shape[0]), p))


def objective_fwconvex(x, s, h, w, p: float) -> float:
    x, s, h = _check_convex(x, s, h)
    return _fw_value(_convex_residuals(x, s, h), check_weights(w, x.shape[0]), p)


# entropy-regularized weighting


def erwconvex_weight_update(x, s, h, gamma: float) -> np.ndarray:
    return erwnmf_weight_update(convex_residuals(x, s, h), gamma)


def erwconvex_update_s(x, s, h, w) -> np.ndarray:
    x, s, h = _check_convex(x, s, h)
    return _update_s(x, s, h, _row_scale(check_weights(w, x.shape[0])))


def erwconvex_update_h(x, s, h, w) -> np.ndarray:
    x, s, h = _check_convex(x, s, h)
    return _update_h(x, s, h, _row_scale(check_weights(w, x.shape[0])))


def objective_erwconvex(x, s, h, w, gamma: float) -> float:
    x, s, h = _check_convex(x, s, h)
    return _erw_value(_convex_residuals(x, s, h), check_weights(w, x.shape[0]), gamma)


# unweighted ConvexNMF, written against the Gram matrix as a separate path


def convex_update_s(x, s, h, eps: float = EPS) -> np.ndarray:
    """``S * (X^T X H^T) / (X^T X S H H^T)``."""
    x, s, h = _check_convex(x, s, h)
    gram = x.T @ x
    return s * (gram @ h.T) / np.maximum(gram @ s @ h @ h.T, eps)


def convex_update_h(x, s, h, eps: float = EPS) -> np.ndarray:
    """``H * (S^T X^T X) / (S^T X^T X S H)``."""
    x, s, h = _check_convex(x, s, h)
    gram = x.T @ x
    sg = s.T @ gram
    return h * sg / np.maximum(sg @ s @ h, eps)


def objective_convex(x, s, h) -> float:
    x, s, h = _check_convex(x, s, h)
    return float(np.sum(_convex_residuals(x, s, h)))
