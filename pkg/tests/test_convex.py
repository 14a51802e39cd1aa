import numpy as np
import pytest

from subnmf.convex import (
    convex_residuals,
    convex_update_h,
    convex_update_s,
    erwconvex_update_h,
    erwconvex_update_s,
    erwconvex_weight_update,
    fwconvex_update_h,
    fwconvex_update_s,
    fwconvex_weight_update,
    objective_convex,
    objective_erwconvex,
    objective_fwconvex,
)
from subnmf.nmf import AlgorithmConfig
from subnmf.numerics import ShapeError
from subnmf.solver import run
from subnmf.weighted import erwnmf_weight_update, fwnmf_weight_update


def _instance(seed, m=8, n=10, k=3):
    r = np.random.default_rng(seed)
    return r.random((m, n)), r.uniform(0.1, 1.1, (n, k)), r.uniform(0.1, 1.1, (k, n))


def _loop_residuals(x, s, h):
    b = x @ s
    m, n = x.shape
    out = np.zeros(m)
    for i in range(m):
        for j in range(n):
            out[i] += (x[i, j] - sum(b[i, l] * h[l, j] for l in range(h.shape[0]))) ** 2
    return out


def test_residuals_against_loop():
    x, s, h = _instance(0)
    np.testing.assert_allclose(convex_residuals(x, s, h), _loop_residuals(x, s, h), rtol=1e-12)


def test_shape_contract():
    x = np.ones((8, 10))
    with pytest.raises(ShapeError):
        convex_residuals(x, np.ones((8, 3)), np.ones((3, 10)))


def test_weight_rules_compose_with_plain_rules():
    for seed in range(20):
        x, s, h = _instance(seed)
        e = convex_residuals(x, s, h)
        np.testing.assert_array_equal(fwconvex_weight_update(x, s, h, 2.5), fwnmf_weight_update(e, 2.5))
        np.testing.assert_array_equal(erwconvex_weight_update(x, s, h, 3.0), erwnmf_weight_update(e, 3.0))


def test_identical_rows_give_uniform_weights():
    row = np.random.default_rng(1).random(10)
    x = np.tile(row, (6, 1))
    _, s, h = _instance(2, m=6)
    np.testing.assert_allclose(fwconvex_weight_update(x, s, h, 3.0), np.full(6, 1 / 6), rtol=1e-12)
    np.testing.assert_allclose(erwconvex_weight_update(x, s, h, 3.0), np.full(6, 1 / 6), rtol=1e-12)


def test_exact_fit_hits_zero_residual_rule():
    # S = I_N with H = I_N reproduces X; K = N is fine for the update functions
    x = np.random.default_rng(3).random((5, 4))
    eye = np.eye(4)
    w = fwconvex_weight_update(x, eye, eye, 2.0)
    np.testing.assert_allclose(w, np.full(5, 0.2))


def test_large_gamma_gives_uniform_weights():
    x, s, h = _instance(4)
    w = erwconvex_weight_update(x, s, h, 1e9)
    assert np.abs(w - 1 / 8).max() <= 1e-6


def test_uniform_weights_match_gram_path():
    for seed in range(20):
        x, s, h = _instance(seed, m=12, n=9, k=3)
        u = np.full(x.shape[0], 1 / x.shape[0])
        ref_s = convex_update_s(x, s, h)
        for got in (fwconvex_update_s(x, s, h, u, 3.0), erwconvex_update_s(x, s, h, u)):
            assert np.abs(got - ref_s).max() <= 1e-10
        ref_h = convex_update_h(x, ref_s, h)
        for got in (fwconvex_update_h(x, ref_s, h, u, 3.0), erwconvex_update_h(x, ref_s, h, u)):
            assert np.abs(got - ref_h).max() <= 1e-10


def test_uniform_trajectories_agree():
    x, s, h = _instance(7, m=12, n=9, k=3)
    u = np.full(12, 1 / 12)
    fs, fh, es, eh = s, h, s, h
    for _ in range(50):
        fs = fwconvex_update_s(x, fs, fh, u, 5.0)
        fh = fwconvex_update_h(x, fs, fh, u, 5.0)
        es = erwconvex_update_s(x, es, eh, u)
        eh = erwconvex_update_h(x, es, eh, u)
        s = convex_update_s(x, s, h)
        h = convex_update_h(x, s, h)
    for a, b in ((fs, s), (fh, h), (es, s), (eh, h)):
        assert np.abs(a - b).max() <= 1e-10


def test_fixed_point_at_exact_fit():
    r = np.random.default_rng(5)
    x = r.random((6, 4))
    s = np.eye(4) + 0.0
    h = np.eye(4) + 0.0
    # S = H = I is an exact fit; multiplicative updates keep zero entries at zero
    w = np.full(6, 1 / 6)
    np.testing.assert_allclose(fwconvex_update_s(x, s, h, w, 2.0), s, atol=1e-12)
    np.testing.assert_allclose(erwconvex_update_h(x, s, h, w), h, atol=1e-12)


def test_nonnegativity_preserved():
    x, s, h = _instance(9)
    w = fwconvex_weight_update(x, s, h, 2.0)
    for _ in range(20):
        s = fwconvex_update_s(x, s, h, w, 2.0)
        h = fwconvex_update_h(x, s, h, w, 2.0)
        assert s.min() >= 0 and h.min() >= 0


def _sweeps(x, s, h, rule, upd_s, upd_h, obj, param, n_sweeps):
    values = []
    for _ in range(n_sweeps):
        w = rule(x, s, h, param)
        values.append(obj(x, s, h, w, param))
        s = upd_s(x, s, h, w)
        h = upd_h(x, s, h, w)
        values.append(obj(x, s, h, w, param))
    return values


@pytest.mark.parametrize("shape", [(8, 10), (20, 15)])
@pytest.mark.parametrize("k", [2, 3, 5])
def test_fw_convex_monotone(shape, k):
    p = 3.0
    for seed in range(100):
        x, s, h = _instance(seed, *shape, k)
        vals = _sweeps(
            x, s, h,
            fwconvex_weight_update,
            lambda *a: fwconvex_update_s(*a, p),
            lambda *a: fwconvex_update_h(*a, p),
            objective_fwconvex, p, 5,
        )
        assert all(b <= a * (1 + 1e-9) for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("shape", [(8, 10), (20, 15)])
@pytest.mark.parametrize("k", [2, 3, 5])
def test_erw_convex_monotone(shape, k):
    g = 2.0
    for seed in range(100):
        x, s, h = _instance(seed, *shape, k)
        vals = _sweeps(
            x, s, h,
            erwconvex_weight_update, erwconvex_update_s, erwconvex_update_h,
            objective_erwconvex, g, 5,
        )
        assert all(b <= a + 1e-9 * abs(a) for a, b in zip(vals, vals[1:]))


def test_gram_path_objective_monotone():
    for seed in range(50):
        x, s, h = _instance(seed)
        before = objective_convex(x, s, h)
        s = convex_update_s(x, s, h)
        h = convex_update_h(x, s, h)
        assert objective_convex(x, s, h) <= before * (1 + 1e-9)


@pytest.mark.parametrize("variant,kw", [("fwconvexnmf", {"p": 4.0}), ("erwconvexnmf", {"gamma": 2.0})])
def test_convex_runs_are_deterministic(variant, kw):
    x = np.random.default_rng(0).random((12, 10))
    cfg = AlgorithmConfig(variant=variant, rank=3, max_iter=30, seed=9, **kw)
    a, b = run(x, cfg), run(x, cfg)
    np.testing.assert_array_equal(a.s, b.s)
    np.testing.assert_array_equal(a.h, b.h)
    assert a.objective_history == b.objective_history
    assert a.s.shape == (10, 3) and a.approximation(x).shape == x.shape
