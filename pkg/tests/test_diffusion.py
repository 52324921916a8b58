"""Monte Carlo radial diffusion: determinism, classification, overflow flag."""

import math
import os

import numpy as np
import pytest

from mpak import ModelManifold, manifold_from_string, simulate_radial_diffusion
from mpak.mc import _clopper_pearson


def test_same_seed_same_result():
    m = manifold_from_string("custom:m=2,g=exp(r^3)")
    a = simulate_radial_diffusion(m, T=1.0, n_paths=300, dt=1e-3, seed=11)
    b = simulate_radial_diffusion(m, T=1.0, n_paths=300, dt=1e-3, seed=11)
    assert a.to_dict() == b.to_dict()


def test_different_seed_moves_the_estimate():
    # explosion fraction is a noisy statistic, so two seeds should not
    # produce the identical exploded count on a borderline horizon
    m = manifold_from_string("custom:m=2,g=exp(r^3)")
    counts = {simulate_radial_diffusion(m, T=0.3, n_paths=300, dt=1e-3,
                                        seed=s).n_exploded
              for s in (1, 2, 3)}
    assert len(counts) > 1


def test_chunking_and_threads_do_not_change_results(monkeypatch):
    # streams are keyed per path, so a threaded run over several chunks
    # must agree with the serial one bit for bit
    m = manifold_from_string("custom:m=2,g=exp(r^3)")
    monkeypatch.delenv("MPAK_THREADS", raising=False)
    serial = simulate_radial_diffusion(m, T=0.5, n_paths=700, dt=1e-3, seed=7)
    monkeypatch.setenv("MPAK_THREADS", "4")
    threaded = simulate_radial_diffusion(m, T=0.5, n_paths=700, dt=1e-3,
                                         seed=7)
    assert serial.to_dict() == threaded.to_dict()


def test_euclidean_does_not_explode():
    for mdim in (2, 3):
        res = simulate_radial_diffusion(ModelManifold.euclidean(mdim),
                                        T=2.0, n_paths=500, dt=1e-3, seed=0)
        assert res.n_exploded == 0
        assert res.classification == "NonExplosive"
        assert res.ci_low == 0.0
        assert res.ci_high < 0.01
        assert math.isnan(res.mean_exit_time)


def test_superexponential_warp_explodes():
    m = manifold_from_string("custom:m=2,g=exp(r^3)")
    res = simulate_radial_diffusion(m, T=2.0, n_paths=500, dt=1e-3, seed=1)
    assert res.classification == "Explosive"
    assert res.ci_low > 0.9
    assert res.n_exploded > 450
    assert 0.0 < res.mean_exit_time < 2.0
    # drift 3r^2 stays finite all the way to the escape radius
    assert res.drift_overflows == 0


def test_overflowing_drift_is_flagged_and_counted_as_explosion():
    m = manifold_from_string("custom:m=2,g=exp(exp(r))")
    res = simulate_radial_diffusion(m, T=0.5, n_paths=100, dt=1e-3, seed=3)
    assert res.classification == "Explosive"
    assert res.drift_overflows > 0
    assert res.drift_overflows <= res.n_exploded


def test_zero_horizon_runs_no_steps():
    res = simulate_radial_diffusion(ModelManifold.euclidean(3), T=0.0,
                                    n_paths=50, dt=1e-3, seed=3)
    assert res.n_exploded == 0
    assert res.fraction == 0.0


def test_result_dict_carries_parameters():
    m = ModelManifold.hyperbolic(3)
    res = simulate_radial_diffusion(m, r_start=2.0, T=0.1, n_paths=64,
                                    dt=1e-3, seed=9, r_explode=50.0)
    d = res.to_dict()
    assert d["r_start"] == 2.0
    assert d["T"] == 0.1
    assert d["seed"] == 9
    assert d["r_explode"] == 50.0
    assert d["manifold"] == m.label
    assert d["ci95"] == [res.ci_low, res.ci_high]
    assert d["fraction"] == res.n_exploded / res.n_paths


def test_invalid_parameters_raise():
    m = ModelManifold.euclidean(2)
    with pytest.raises(ValueError):
        simulate_radial_diffusion(m, n_paths=0)
    with pytest.raises(ValueError):
        simulate_radial_diffusion(m, dt=0.0)


def test_clopper_pearson_endpoints():
    lo, hi = _clopper_pearson(0, 100)
    assert lo == 0.0
    assert np.isclose(hi, 1.0 - 0.025 ** (1.0 / 100))
    lo, hi = _clopper_pearson(100, 100)
    assert hi == 1.0
    assert np.isclose(lo, 0.025 ** (1.0 / 100))
    lo, hi = _clopper_pearson(50, 100)
    assert lo < 0.5 < hi
