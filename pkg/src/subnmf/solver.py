"""Run loop shared by every variant.

Each iteration updates W (from the current residuals), then S, then H, and
records the variant's objective once the sweep is complete.
"""

from __future__ import annotations

import numpy as np

from . import convex as cx
from . import nmf as base
from . import weighted as wt
from .nmf import AlgorithmConfig, FactorizationState, Variant
from .numerics import as_nonnegative, make_rng, random_uniform_matrix


def initialize(x: np.ndarray, config: AlgorithmConfig) -> tuple[np.ndarray, np.ndarray]:
    """Draw S then H uniformly on ``[init_low, init_high)`` from the run seed."""
    m, n = x.shape
    rng = make_rng(config.seed)
    s_rows = n if config.variant.is_convex else m
    s = random_uniform_matrix(rng, s_rows, config.rank, config.init_low, config.init_high)
    h = random_uniform_matrix(rng, config.rank, n, config.init_low, config.init_high)
    return s, h


def _residuals(x, s, h, convex):
    approx = (x @ s) @ h if convex else s @ h
    r = x - approx
    return np.einsum("ij,ij->i", r, r)


def _sweep(variant: Variant, config: AlgorithmConfig, x, s, h, e):
    """One (W, S, H) sweep given the residuals ``e`` of the incoming factors.

    Returns the new factors, the weights used, and a callable turning
    fresh residuals into the objective for those weights.
    """
    m = x.shape[0]
    if variant is Variant.NMF:
        w = np.full(m, 1.0 / m)
        s = base._update_s(x, s, h)
        h = base._update_h(x, s, h)
        return s, h, w, lambda r: float(r.sum())
    if variant is Variant.CONVEX_NMF:
        w = np.full(m, 1.0 / m)
        ones = np.ones(m)
        s = cx._update_s(x, s, h, ones)
        h = cx._update_h(x, s, h, ones)
        return s, h, w, lambda r: float(r.sum())

    if variant is Variant.HARD_WNMF:
        w = wt.hard_weight_update(e)
        d = wt._row_scale(w)
        objective = lambda r: float(np.dot(w, r))  # noqa: E731
    elif variant in (Variant.FWNMF, Variant.FW_CONVEX_NMF):
        w = wt.fwnmf_weight_update(e, config.p)
        d = wt._row_scale(w, config.p)
        objective = lambda r: wt._fw_value(r, w, config.p)  # noqa: E731
    else:
        w = wt.erwnmf_weight_update(e, config.gamma)
        d = wt._row_scale(w)
        objective = lambda r: wt._erw_value(r, w, config.gamma)  # noqa: E731

    if variant.is_convex:
        s = cx._update_s(x, s, h, d)
        h = cx._update_h(x, s, h, d)
    else:
        s = base._update_s(x, s, h)
        h = wt._weighted_update_h(x, s, h, d)
    return s, h, w, objective


def run(x, config: AlgorithmConfig, init: tuple[np.ndarray, np.ndarray] | None = None) -> FactorizationState:
    """Factorize ``x`` (features x samples) with the configured variant.

    ``init`` overrides the seeded initialization with explicit (S, H).
    """
    x = as_nonnegative(x, "x")
    config.validate(x.shape)
    variant = config.variant
    convex = variant.is_convex
    s, h = initialize(x, config) if init is None else (as_nonnegative(init[0], "s"), as_nonnegative(init[1], "h"))

    state = FactorizationState(s=s, h=h, w=np.full(x.shape[0], 1.0 / x.shape[0]), convex=convex)
    e = _residuals(x, s, h, convex)
    previous = None
    for it in range(config.max_iter):
        s, h, w, objective = _sweep(variant, config, x, s, h, e)
        if previous is None:
            # objective of the incoming factors under the first weights
            previous = objective(e)
        e = _residuals(x, s, h, convex)
        value = objective(e)
        state.objective_history.append(value)
        state.reconstruction_history.append(float(e.sum()))
        state.iterations_run = it + 1
        if config.rel_tol > 0 and abs(previous - value) < config.rel_tol * abs(previous):
            break
        previous = value

    state.s, state.h, state.w = s, h, w
    return state
