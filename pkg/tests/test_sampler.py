"""Exact samplers: determinism, moments, and distributional law checks."""

import math

import numpy as np
import pytest
from scipy import stats

from l2mech.capgeom import radial_cdf
from l2mech.sampler import (
    ParallelTrace,
    RngState,
    SampleBatch,
    draw_batch,
    sample_gamma,
    sample_gaussian,
    sample_l2,
    sample_l2_parallel,
    sample_laplace,
    sample_unit_ball,
)

KS_LEVEL = 0.01


def test_rng_state_validation_and_replay():
    with pytest.raises(ValueError):
        RngState(-1)
    with pytest.raises(ValueError):
        RngState(2**64)
    with pytest.raises(ValueError):
        RngState(3, -2)
    a = RngState(9, 1).generator.random(5)
    b = RngState(9, 1).generator.random(5)
    c = RngState(9, 2).generator.random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_rng_state_advances_with_use():
    rng = RngState(4)
    first = rng.generator.random(3)
    second = rng.generator.random(3)
    assert not np.array_equal(first, second)


def test_sample_gamma_exponential_mean():
    vals = sample_gamma(1, 1.0, RngState(31), size=1000000)
    assert np.all(np.isfinite(vals)) and np.all(vals > 0.0)
    assert abs(float(np.mean(vals)) - 1.0) < 0.004


def test_sample_gamma_shape_scale_moments():
    d, sigma, n = 6, 0.5, 1000000
    vals = sample_gamma(d + 1, sigma, RngState(32), size=n)
    mean = float(np.mean(vals))
    assert abs(mean - (d + 1) * sigma) < 4.0 * sigma * math.sqrt(d + 1) / 1000.0
    var = float(np.var(vals))
    want_var = (d + 1) * sigma * sigma
    assert abs(var - want_var) < 0.05 * want_var


def test_sample_gamma_determinism_and_validation():
    assert sample_gamma(3, 1.0, RngState(5)) == sample_gamma(3, 1.0, RngState(5))
    a = sample_gamma(2, 0.7, RngState(6), size=10)
    b = sample_gamma(2, 0.7, RngState(6), size=10)
    assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        sample_gamma(0, 1.0, RngState(1))
    with pytest.raises(ValueError):
        sample_gamma(2.5, 1.0, RngState(1))
    with pytest.raises(ValueError):
        sample_gamma(2, -1.0, RngState(1))


def test_sample_gamma_law():
    vals = sample_gamma(4, 2.0, RngState(33), size=100000)
    res = stats.kstest(vals, stats.gamma(a=4, scale=2.0).cdf)
    assert res.pvalue > KS_LEVEL


def test_unit_ball_norm_moments():
    z = sample_unit_ball(3, RngState(41), size=1000000)
    sq = np.einsum("ij,ij->i", z, z)
    assert np.all(sq <= 1.0 + 1e-12)
    assert abs(float(np.mean(sq)) - 3.0 / 5.0) < 0.003
    assert np.max(np.abs(np.mean(z, axis=0))) < 0.004


def test_unit_ball_norm_law():
    for d in [2, 6]:
        z = sample_unit_ball(d, RngState(42 + d), size=100000)
        norms = np.linalg.norm(z, axis=1)
        res = stats.kstest(norms, lambda r, d=d: np.asarray(r) ** d)
        assert res.pvalue > KS_LEVEL, d


def test_unit_ball_determinism():
    a = sample_unit_ball(4, RngState(7), size=8)
    b = sample_unit_ball(4, RngState(7), size=8)
    assert np.array_equal(a, b)


def test_sample_l2_radial_law():
    for d in [2, 5]:
        y = sample_l2(np.zeros(d), 0.8, RngState(50 + d), size=50000)
        norms = np.linalg.norm(y, axis=1)
        res = stats.kstest(norms, lambda r, d=d: radial_cdf(d, 0.8, r))
        assert res.pvalue > KS_LEVEL, d


def test_sample_l2_center_and_shape():
    center = np.array([5.0, -3.0, 0.5])
    y = sample_l2(center, 0.2, RngState(51), size=40000)
    assert y.shape == (40000, 3)
    assert np.max(np.abs(np.mean(y, axis=0) - center)) < 0.02
    one = sample_l2(center, 0.2, RngState(52))
    assert one.shape == (3,)


def test_sample_l2_determinism_and_validation():
    a = sample_l2(np.zeros(2), 1.0, RngState(8), size=5)
    b = sample_l2(np.zeros(2), 1.0, RngState(8), size=5)
    assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        sample_l2(np.zeros((2, 2)), 1.0, RngState(1))
    with pytest.raises(ValueError):
        sample_l2(np.zeros(2), 0.0, RngState(1))
    with pytest.raises(ValueError):
        sample_l2(np.array([np.inf, 0.0]), 1.0, RngState(1))


def test_parallel_trace_identities():
    workers = [RngState(99, i) for i in range(4)]
    manager = RngState(99, 4)
    out, tr = sample_l2_parallel(np.zeros(4), 0.5, workers, manager)
    assert isinstance(tr, ParallelTrace)
    want_radius = 0.5 * (float(tr.worker_log_uniforms.sum()) + tr.manager_log_uniform)
    assert abs(tr.radius - want_radius) < 1e-12
    recon = (
        tr.radius
        * tr.manager_uniform_y ** (1.0 / 4.0)
        * tr.worker_gauss
        / math.sqrt(tr.sum_squares)
    )
    assert np.allclose(out, recon, rtol=0.0, atol=1e-15)
    assert abs(tr.sum_squares - float(np.dot(tr.worker_gauss, tr.worker_gauss))) < 1e-12


def test_parallel_worker_count_enforced():
    with pytest.raises(ValueError):
        sample_l2_parallel(np.zeros(3), 1.0, [RngState(1, 0)], RngState(1, 9))


def test_parallel_matches_serial_law():
    d, sigma, n = 3, 0.7, 20000
    workers = [RngState(77, i) for i in range(d)]
    manager = RngState(77, d)
    par = np.array(
        [sample_l2_parallel(np.zeros(d), sigma, workers, manager)[0] for _ in range(n)]
    )
    ser = sample_l2(np.zeros(d), sigma, RngState(78), size=n)
    res = stats.ks_2samp(np.linalg.norm(par, axis=1), np.linalg.norm(ser, axis=1))
    assert res.pvalue > KS_LEVEL


def test_parallel_d1_is_laplace():
    # one worker, so the output is radius times a random sign
    n = 20000
    worker = [RngState(88, 0)]
    manager = RngState(88, 1)
    vals = np.array(
        [sample_l2_parallel(np.zeros(1), 0.6, worker, manager)[0][0] for _ in range(n)]
    )
    res = stats.kstest(vals, stats.laplace(scale=0.6).cdf)
    assert res.pvalue > KS_LEVEL


def test_laplace_mse_and_law():
    y = sample_laplace(np.zeros(2), 1.0, RngState(60), size=1000000)
    mse = float(np.mean(np.einsum("ij,ij->i", y, y)))
    assert abs(mse - 4.0) < 0.04
    a = sample_laplace(np.zeros(2), 1.0, RngState(61), size=4)
    b = sample_laplace(np.zeros(2), 1.0, RngState(61), size=4)
    assert np.array_equal(a, b)


def test_d1_l2_matches_laplace_law():
    l2 = sample_l2(np.zeros(1), 0.9, RngState(62), size=50000)[:, 0]
    lap = sample_laplace(np.zeros(1), 0.9, RngState(63), size=50000)[:, 0]
    res = stats.ks_2samp(l2, lap)
    assert res.pvalue > KS_LEVEL


def test_gaussian_moments_and_determinism():
    y = sample_gaussian(np.zeros(2), 1.5, RngState(64), size=1000000)
    var = np.var(y, axis=0)
    assert np.max(np.abs(var - 2.25)) < 0.01 * 2.25
    a = sample_gaussian(np.zeros(3), 1.0, RngState(65), size=4)
    b = sample_gaussian(np.zeros(3), 1.0, RngState(65), size=4)
    assert np.array_equal(a, b)


def test_sample_batch_csv_round_trip():
    batch = draw_batch("l2", 3, 1.0, 5, seed=7)
    text = batch.to_csv()
    lines = text.split("\r\n")
    assert lines[0] == "x0,x1,x2"
    assert len(lines) == 7 and lines[-1] == ""  # header + 5 rows + final CRLF
    parsed = np.array([[float(v) for v in row.split(",")] for row in lines[1:6]])
    assert np.array_equal(parsed, batch.values)  # repr round-trips exactly


def test_sample_batch_json_schema():
    import json

    batch = draw_batch("gaussian", 2, 0.5, 3, seed=11)
    payload = json.loads(batch.to_json())
    assert payload["mechanism"] == "gaussian"
    assert payload["dim"] == 2 and payload["count"] == 3
    assert payload["sigma"] == 0.5 and payload["seed"] == 11
    vals = np.array(payload["values"])
    assert vals.shape == (3, 2)
    assert np.array_equal(vals, batch.values)


def test_draw_batch_dispatch_and_determinism():
    for mech in ["l2", "laplace", "gaussian"]:
        a = draw_batch(mech, 2, 1.0, 4, seed=3)
        b = draw_batch(mech, 2, 1.0, 4, seed=3)
        assert a.to_csv() == b.to_csv(), mech
        assert isinstance(a, SampleBatch)
    lap = draw_batch("laplace", 2, 1.0, 4, seed=3)
    gau = draw_batch("gaussian", 2, 1.0, 4, seed=3)
    assert not np.array_equal(lap.values, gau.values)
    with pytest.raises(ValueError):
        draw_batch("cauchy", 2, 1.0, 4, seed=3)
