"""Warped-product geometry: warps, curvature, volumes, parsing."""

import math

import numpy as np
import pytest

from mpak.manifold import ModelManifold, manifold_from_string, \
    sphere_area_constant

from oracles import sphere_area as sphere_area_oracle


def test_sphere_area_constant_matches_gamma_formula():
    for m in (2, 3, 4, 7):
        assert sphere_area_constant(m) == \
            pytest.approx(sphere_area_oracle(m), rel=1e-13)


def test_euclidean_model():
    E = ModelManifold.euclidean(3)
    assert E.g(2.0) == 2.0
    assert E.gp(2.0) == 1.0
    assert E.curvature(1.3) == pytest.approx(0.0, abs=1e-12)
    assert E.smooth_pole
    assert math.isinf(E.rmax)
    assert E.volume_ball(2.0) == pytest.approx(4.0 / 3.0 * math.pi * 8.0,
                                               rel=1e-8)
    assert E.sphere_area(2.0) == pytest.approx(16.0 * math.pi, rel=1e-12)
    # laplacian of u with u'=1, u''=0 at r=1 is (m-1)/r
    assert E.laplacian_radial(1.0, 1.0, 0.0) == pytest.approx(2.0)


def test_hyperbolic_model_curvature_parameter():
    for c in (1.0, 2.0):
        H = ModelManifold.hyperbolic(2, c)
        s = math.sqrt(c)
        assert H.g(1.0) == pytest.approx(math.sinh(s) / s, rel=1e-12)
        assert H.curvature(0.7) == pytest.approx(-c, rel=1e-9)
        assert H.gg_ratio(1.0) == pytest.approx(s / math.tanh(s), rel=1e-12)


def test_radial_hessian_eigs():
    E = ModelManifold.euclidean(3)
    hr, ht = E.radial_hessian_eigs(2.0, 3.0, -1.0)
    assert hr == -1.0
    assert ht == pytest.approx(3.0 / 2.0)


def test_custom_warp_and_pole_flag():
    M = manifold_from_string("custom:m=2,g=exp(r^3)")
    assert M.m == 2
    assert not M.smooth_pole   # g(0) = 1, not a smooth pole
    assert M.g(1.0) == pytest.approx(math.e)
    R = manifold_from_string("custom:m=2,g=r,rmax=5")
    assert R.rmax == 5.0
    assert R.smooth_pole


def test_manifold_from_string_errors():
    with pytest.raises(ValueError):
        manifold_from_string("flatland:m=2")
    with pytest.raises(ValueError):
        manifold_from_string("euclidean")
    with pytest.raises(ValueError):
        manifold_from_string("custom:m=2")


def test_log_volume_matches_linear_volume_at_moderate_radius():
    H = ModelManifold.hyperbolic(3)
    want = math.log(H.volume_ball(3.0) / sphere_area_constant(3))
    assert H.log_volume_ball(3.0) == pytest.approx(want, abs=1e-3)


def test_log_volume_survives_huge_radius():
    M = manifold_from_string("custom:m=2,g=exp(r^3)")
    lv = M.log_volume_ball(100.0)
    # integral of exp(r^3) ~ exp(1e6)/(3e4); check the exponent scale
    assert lv == pytest.approx(1e6 - math.log(3e4), rel=1e-4)
    assert math.isfinite(lv)


def test_volume_monotone_in_radius():
    H = ModelManifold.hyperbolic(2)
    vols = [H.volume_ball(r) for r in (0.5, 1.0, 2.0, 4.0)]
    assert all(a < b for a, b in zip(vols, vols[1:]))


def test_warp_comparison_euclidean_vs_hyperbolic():
    # sinh r >= r pushes every geometric quantity up
    E, H = ModelManifold.euclidean(2), ModelManifold.hyperbolic(2)
    for r in (0.5, 1.0, 3.0):
        assert H.g(r) >= E.g(r)
        assert H.sphere_area(r) >= E.sphere_area(r)
        assert H.gg_ratio(r) >= E.gg_ratio(r)
