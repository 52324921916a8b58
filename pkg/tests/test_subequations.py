"""Constraint-set algebra: duality, membership, batch evaluation, Riesz."""

import numpy as np
import pytest

from mpak.jets import Jet
from mpak.subeq import (BOUNDARY_EPS, Intersection, RieszDependenceError,
                        Subequation, Union, default_catalog, defining_batch,
                        duality_suite, riesz_characteristic, subeq_from_string)


def sample_jets(m, n, seed, zero_grad=False):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        A = rng.standard_normal((m, m))
        A = (A + A.T) / 2.0
        g = np.zeros(m) if zero_grad else rng.standard_normal(m)
        out.append((Jet(float(rng.standard_normal()), g, A),
                    float(rng.uniform(0.5, 3.0))))
    return out


def test_dual_resolutions_are_the_listed_pairs():
    m = 5
    assert Subequation.eikonal(m).dual().kind == "eikonal_dual"
    assert Subequation.eikonal(m, dual=True).dual().kind == "eikonal"
    d = Subequation.eigenvalue_floor(m, 2).dual()
    assert (d.kind, d.params["k"]) == ("eigenvalue_floor", 4)
    d = Subequation.garding(m, 3, j=1).dual()
    assert (d.params["k"], d.params["j"]) == (3, 3)
    d = Subequation.pucci(m, 0.5, 2.0, "plus").dual()
    assert (d.kind, d.params["which"]) == ("pucci", "minus")
    d = Subequation.laplace(m).dual()
    assert (d.kind, d.params["k"]) == ("sum_smallest", m)
    d = Subequation.sum_smallest(m, 2).dual()
    assert (d.kind, d.params["k"]) == ("sum_largest", 2)


def test_dual_is_an_involution_structurally():
    for entry in default_catalog(4):
        dd = entry.dual().dual()
        assert dd.kind == entry.kind
        assert repr(dd) == repr(entry)


def test_pointwise_negation_identity_on_generic_jets():
    # dual_defining(J) = -defining(-J) away from the gradient seam
    for entry in default_catalog(3):
        dual = entry.dual()
        for jet, x in sample_jets(3, 25, seed=hash(entry.kind) % 1000):
            lhs = dual.defining(jet, x)
            rhs = -entry.defining(jet.negated(), x)
            scale = max(1.0, abs(lhs), abs(rhs))
            assert abs(lhs - rhs) / scale < 1e-11, entry.kind


def test_de_morgan_for_intersections_and_unions():
    m = 3
    F = Subequation.laplace(m)
    G = Subequation.eigenvalue_floor(m, 1)
    inter = Intersection([F, G])
    dual = inter.dual()
    assert isinstance(dual, Union)
    for jet, x in sample_jets(m, 30, seed=2):
        got = inter.defining(jet, x)
        want = min(F.defining(jet, x), G.defining(jet, x))
        assert got == pytest.approx(want, rel=1e-12, abs=1e-12)
        gotu = dual.defining(jet, x)
        wantu = max(F.dual().defining(jet, x), G.dual().defining(jet, x))
        assert gotu == pytest.approx(wantu, rel=1e-12, abs=1e-12)


def test_duality_suite_reports_clean():
    rep = duality_suite(3, n_samples=300, seed=4)
    assert rep["ok"]
    assert rep["max_negation_residual"] < 1e-9
    assert rep["de_morgan_structural"]
    assert rep["de_morgan_residual"] < 1e-9
    assert all(e["involution"] for e in rep["entries"])


def test_batch_defining_matches_scalar_everywhere():
    # includes exact-zero gradients: the closure rows the residual suite
    # leaves to this test
    m = 3
    for entry in default_catalog(m):
        for zero_grad in (False, True):
            jets = sample_jets(m, 20, seed=9, zero_grad=zero_grad)
            values = np.array([j.value for j, _ in jets])
            grads = np.stack([j.grad for j, _ in jets])
            hesses = np.stack([j.hess for j, _ in jets])
            xs = np.array([x for _, x in jets])
            eigs = np.linalg.eigvalsh(hesses)
            batch = defining_batch(entry, values, grads, hesses, eigs, xs)
            scalar = np.array([entry.defining(j, x) for j, x in jets])
            assert np.allclose(batch, scalar, rtol=1e-10, atol=1e-10), \
                (entry.kind, zero_grad)


def test_membership_uses_boundary_band():
    m = 2
    F = Subequation.laplace(m)
    A = np.eye(m)
    inside = Jet(0.0, np.ones(m), A)
    assert F.contains(inside)
    grazing = Jet(0.0, np.ones(m), -0.5 * BOUNDARY_EPS / m * A)
    assert F.contains(grazing)
    outside = Jet(0.0, np.ones(m), -np.eye(m))
    assert not F.contains(outside)


def test_positivity_adding_psd_never_decreases_defining():
    rng = np.random.default_rng(21)
    for entry in default_catalog(3):
        for jet, x in sample_jets(3, 10, seed=33):
            B = rng.standard_normal((3, 3))
            P = B @ B.T
            bumped = Jet(jet.value, jet.grad, jet.hess + P)
            assert entry.defining(bumped, x) >= entry.defining(jet, x) - 1e-10


def test_properness_increasing_value_never_increases_defining():
    for entry in default_catalog(3):
        for jet, x in sample_jets(3, 10, seed=41):
            raised = Jet(jet.value + 0.9, jet.grad, jet.hess)
            assert entry.defining(raised, x) <= entry.defining(jet, x) + 1e-10


def test_subeq_from_string_round_trips():
    m = 4
    s = subeq_from_string("laplace", m)
    assert (s.kind, s.params["k"]) == ("sum_smallest", m)
    s = subeq_from_string("sum_smallest_k:k=2", m)
    assert s.params["k"] == 2
    s = subeq_from_string("pucci:lam=0.5,Lam=2,which=minus", m)
    assert s.params["which"] == "minus"
    s = subeq_from_string("garding:k=3,j=2", m)
    assert (s.params["k"], s.params["j"]) == (3, 2)
    s = subeq_from_string("laplace:f=t", m)
    assert str(s.params["f"]) == "t"
    s = subeq_from_string("p_laplace:q=3", m)
    assert s.kind == "quasilinear"
    assert abs(s.params["a"].evaluate(2.0) - 2.0) < 1e-12    # t^(q-2)
    with pytest.raises(ValueError):
        subeq_from_string("warp_drive", m)
    with pytest.raises(ValueError):
        subeq_from_string("garding:k=9", m)
    with pytest.raises(ValueError, match="unknown parameter"):
        subeq_from_string("p_laplace:p=3", m)
    with pytest.raises(ValueError, match="unknown parameter"):
        subeq_from_string("laplace:k=2", m)


def test_riesz_characteristic_counts_eigenvalues():
    for m in (2, 3, 4):
        for k in range(1, m + 1):
            p = riesz_characteristic(Subequation.sum_smallest(m, k))
            assert abs(p - k) < 1e-6
    p = riesz_characteristic(Subequation.eigenvalue_floor(3, 1))
    assert abs(p - 1.0) < 1e-6


def test_riesz_rejects_gradient_dependent_sets():
    with pytest.raises(RieszDependenceError):
        riesz_characteristic(Subequation.infinity_laplacian(3))
    with pytest.raises(RieszDependenceError):
        riesz_characteristic(Subequation.eikonal(3))


def test_garding_first_branch_is_the_sigma_cone():
    # membership in branch 1 is equivalent to all leading symmetric
    # functions being nonnegative
    from oracles import sigma_k
    rng = np.random.default_rng(55)
    m, k = 5, 3
    F = Subequation.garding(m, k, j=1)
    hits = 0
    for _ in range(400):
        A = rng.standard_normal((m, m))
        A = (A + A.T) / 2.0
        jet = Jet(0.0, rng.standard_normal(m), A)
        d = F.defining(jet)
        if abs(d) <= 1e-9:
            continue
        eigs = np.linalg.eigvalsh(A)
        cone = all(sigma_k(eigs, i) >= 0.0 for i in range(1, k + 1))
        assert (d > 0) == cone
        hits += 1
    assert hits > 300


def test_value_slot_profile_moves_the_threshold():
    m = 2
    plain = Subequation.laplace(m)
    shifted = Subequation.laplace(m, f="t")
    jet = Jet(0.4, np.ones(m), 0.3 * np.eye(m))
    # trace 0.6 vs value 0.4: inside only after subtracting the profile
    assert plain.defining(jet) == pytest.approx(0.6)
    assert shifted.defining(jet) == pytest.approx(0.6 - 0.4)
    assert shifted.depends_on_value
    assert not plain.depends_on_value
