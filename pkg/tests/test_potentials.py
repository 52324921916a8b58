"""Capacities, exhaustion potentials, and the classifier battery."""

import math

import numpy as np
import pytest

from mpak.expr import parse_expr
from mpak.grid import Grid
from mpak.manifold import ModelManifold, manifold_from_string
from mpak.potential import (capacitor_profile, eikonal_parabolicity,
                            evans_potential, geodesic_completeness,
                            infinity_capacitor_profile, infinity_capacity,
                            infinity_parabolicity,
                            negative_exhaustion_hessian_check,
                            omori_yau_radial_check, parabolicity,
                            polar_potential, q_capacity,
                            stochastic_completeness)

from oracles import capacity_energy_oracle

E2 = ModelManifold.euclidean(2)
E3 = ModelManifold.euclidean(3)
H3 = ModelManifold.hyperbolic(3)


def test_shell_capacity_closed_forms():
    assert q_capacity(E3, 1.0, 2.0, 2.0) == pytest.approx(8.0 * math.pi,
                                                          rel=1e-9)
    assert q_capacity(E2, 1.0, 2.0, 2.0) == \
        pytest.approx(2.0 * math.pi / math.log(2.0), rel=1e-9)
    # q = 3 on R^3: minimizer has u' = 1/(r log 2), energy (log 2)^-2
    want = 4.0 * math.pi / math.log(2.0) ** 2
    assert q_capacity(E3, 1.0, 2.0, 3.0) == pytest.approx(want, rel=1e-6)


def test_shell_capacity_agrees_with_energy_minimization():
    for man in (E2, E3):
        lib = q_capacity(man, 1.0, 2.0, 2.0)
        orc = capacity_energy_oracle(man, 1.0, 2.0, 2.0, n=200)
        assert abs(lib - orc) / lib < 0.01


def test_capacity_decreases_as_outer_radius_grows():
    caps = [q_capacity(E3, 1.0, r1, 2.0) for r1 in (2.0, 4.0, 8.0)]
    assert caps[0] > caps[1] > caps[2] > 4.0 * math.pi
    # and tends to the full-space capacity 4 pi
    assert q_capacity(E3, 1.0, 1e6, 2.0) == pytest.approx(4.0 * math.pi,
                                                          rel=1e-5)


def test_capacitor_profile_solves_the_dirichlet_problem():
    gf, info = capacitor_profile(E3, 1.0, 2.0, 2.0, n=200)
    r = gf.grid.nodes
    exact = 2.0 / r - 1.0
    assert np.max(np.abs(gf.values - exact)) < 1e-3
    # the discrete flux carries the O(h^2) truncation of the profile
    assert info["capacity"] == pytest.approx(8.0 * math.pi, rel=1e-4)


def test_evans_potential_is_a_normalized_harmonic_exhaustion():
    gf, info = evans_potential(E2, 1.0, 64.0, n=400)
    r = gf.grid.nodes
    assert gf.values[0] == pytest.approx(0.0, abs=1e-12)
    assert np.all(np.diff(gf.values) > 0)
    # harmonic on R^2 means log r growth with unit flux normalization
    assert gf.values[-1] == pytest.approx(math.log(64.0), rel=1e-3)
    assert np.allclose(info["flux"], 1.0, atol=1e-8)


def test_infinity_capacitor_profile_is_the_distance_ramp():
    gf, info = infinity_capacitor_profile(1.0, 2.0, n=200)
    exact = 2.0 - gf.grid.nodes
    assert np.max(np.abs(gf.values - exact)) < 1e-10
    assert info["capacity"] == pytest.approx(1.0)


def test_infinity_capacity_of_truncated_model():
    M = manifold_from_string("custom:m=2,g=r,rmax=5")
    assert infinity_capacity(M, 1.0) == pytest.approx(0.25)
    # to infinity on a complete model the capacity vanishes
    assert infinity_capacity(E2, 1.0) == pytest.approx(0.0, abs=1e-12)


def test_parabolicity_battery():
    assert parabolicity(E2).status == "Holds"
    assert parabolicity(E3).status == "Fails"
    assert parabolicity(E3, q=3.0).status == "Holds"
    assert parabolicity(H3).status == "Fails"


def test_infinity_and_eikonal_parabolicity():
    assert infinity_parabolicity(E2).status == "Holds"
    M = manifold_from_string("custom:m=2,g=r,rmax=5")
    assert infinity_parabolicity(M).status == "Fails"
    assert eikonal_parabolicity(E2).status == "Holds"
    assert eikonal_parabolicity(M).status == "Fails"


def test_stochastic_completeness_battery():
    assert stochastic_completeness(E2).status == "Holds"
    assert stochastic_completeness(E3).status == "Holds"
    assert stochastic_completeness(H3).status == "Holds"
    blow = manifold_from_string("custom:m=2,g=exp(r^3)")
    v = stochastic_completeness(blow)
    assert v.status == "Fails"
    assert "witness" in v.reason


def test_geodesic_completeness():
    assert geodesic_completeness(E3).status == "Holds"
    M = manifold_from_string("custom:m=2,g=r,rmax=5")
    assert geodesic_completeness(M).status == "Fails"


def test_polar_potential_is_the_log_pole():
    grid = Grid(0.001, 1.0, 400)
    gf = polar_potential(E2, 2.0, grid)
    r = gf.grid.nodes
    want = np.log(r)
    assert np.max(np.abs(gf.values - want)) < 1e-9
    assert gf.values[0] < -6.0     # heads to -inf with the pole
    with pytest.raises(ValueError):
        polar_potential(H3, 2.0, grid)    # needs the flat model


def test_negative_exhaustion_hessian_check_battery():
    ok = negative_exhaustion_hessian_check(E3, parse_expr("-cosh(r)"))
    assert ok.status == "Holds"
    assert ok.evidence["radial_margin"] <= 1e-12
    bad = negative_exhaustion_hessian_check(E3, parse_expr("-exp(r)"),
                                            window=(0.01, 40.0))
    assert bad.status == "Fails"
    const = negative_exhaustion_hessian_check(E3, parse_expr("0*r - 1"))
    assert const.status == "Fails"


def test_negative_exhaustion_overflowing_window_is_inconclusive():
    v = negative_exhaustion_hessian_check(E3, parse_expr("-exp(r)"),
                                          window=(1.0, 1000.0))
    assert v.status == "Inconclusive"


def test_omori_yau_radial_check_variants():
    w = parse_expr("log(1+r)")
    G = parse_expr("1+t", var="t")
    assert omori_yau_radial_check(H3, w, G).status == "Holds"
    assert omori_yau_radial_check(H3, w, G,
                                  variant="hessian_max").status == "Holds"
    # a too-small control function fails the drift bound
    tight = parse_expr("0*t + 0.001", var="t")
    assert omori_yau_radial_check(H3, w, tight).status == "Fails"
