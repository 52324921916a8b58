"""Pointwise jet algebra against independent eigenvalue oracles."""

import numpy as np
import pytest

from mpak.jets import (Jet, elementary_symmetric, garding_branch_radial,
                       garding_branches, garding_root_coeffs, pucci_extremal,
                       pucci_radial, radial_jet, sum_largest_eigs,
                       sum_smallest_eigs, sym_eigvals)

from oracles import (eig_oracle, garding_branch_oracle, pucci_oracle, sigma_k)


def random_sym(rng, n, scale=1.0):
    A = rng.standard_normal((n, n)) * scale
    return (A + A.T) / 2.0


def test_sym_eigvals_match_charpoly_roots():
    rng = np.random.default_rng(7)
    for n in (2, 3, 5):
        for _ in range(40):
            A = random_sym(rng, n)
            assert np.max(np.abs(sym_eigvals(A) - eig_oracle(A))) < 1e-10


def test_elementary_symmetric_matches_enumeration():
    rng = np.random.default_rng(11)
    for n in (1, 3, 6):
        vals = rng.standard_normal(n)
        for k in range(n + 1):
            assert elementary_symmetric(vals, k) == \
                pytest.approx(sigma_k(vals, k), rel=1e-12, abs=1e-12)


def test_sum_smallest_and_largest():
    rng = np.random.default_rng(3)
    A = random_sym(rng, 4)
    eigs = eig_oracle(A)
    for k in (1, 2, 4):
        assert sum_smallest_eigs(A, k) == pytest.approx(np.sum(eigs[:k]))
        assert sum_largest_eigs(A, k) == pytest.approx(np.sum(eigs[-k:]))


def test_garding_branches_match_interpolation_oracle():
    rng = np.random.default_rng(5)
    for _ in range(60):
        A = random_sym(rng, 5)
        for k in (1, 2, 3, 5):
            got = garding_branches(A, k)
            want = garding_branch_oracle(eig_oracle(A), k)
            assert np.max(np.abs(got - want)) < 1e-8


def test_garding_translation_shifts_every_branch():
    # mu_j(A + sI) = mu_j(A) + s, the normalization that fixes the k=1 scale
    rng = np.random.default_rng(13)
    A = random_sym(rng, 4)
    for k in (1, 2, 4):
        base = garding_branches(A, k)
        for s in (-0.7, 1.3):
            shifted = garding_branches(A + s * np.eye(4), k)
            assert np.allclose(shifted, base + s, atol=1e-9)


def test_garding_k1_is_mean_trace():
    rng = np.random.default_rng(17)
    A = random_sym(rng, 5)
    assert garding_branches(A, 1)[0] == pytest.approx(np.trace(A) / 5.0)


def test_garding_root_coeffs_reproduce_shifted_polynomial():
    rng = np.random.default_rng(19)
    eigs = rng.standard_normal(5)
    for k in (2, 3, 4):
        coeffs = garding_root_coeffs(eigs, k)
        for t in (-1.3, 0.0, 0.8):
            want = sigma_k(eigs + t, k)
            got = sum(c * t ** j for j, c in enumerate(coeffs))
            assert got == pytest.approx(want, rel=1e-10, abs=1e-10)


def test_diagonal_matrices_have_known_branches():
    A = np.diag([1.0, 2.0, 3.0])
    # sigma_2(lam + t) roots for lam = (1,2,3): t = -(2 +- 1/sqrt(3))
    want = np.sort([2.0 - 1.0 / np.sqrt(3.0), 2.0 + 1.0 / np.sqrt(3.0)])
    assert np.allclose(garding_branches(A, 2), want, atol=1e-12)


def test_pucci_matches_eigenvalue_definition():
    rng = np.random.default_rng(23)
    for _ in range(30):
        A = random_sym(rng, 3)
        for which in ("plus", "minus"):
            assert pucci_extremal(A, 0.5, 2.0, which) == \
                pytest.approx(pucci_oracle(A, 0.5, 2.0, which), abs=1e-10)
    with pytest.raises(ValueError):
        pucci_extremal(A, -1.0, 2.0, "plus")
    with pytest.raises(ValueError):
        pucci_extremal(A, 0.5, 2.0, "sideways")


def test_pucci_ordering_and_linearity_bounds():
    rng = np.random.default_rng(29)
    A = random_sym(rng, 4)
    lo = pucci_extremal(A, 0.5, 2.0, "minus")
    hi = pucci_extremal(A, 0.5, 2.0, "plus")
    assert lo <= np.trace(A) * 2.0 + 1e-12
    assert lo <= hi
    # both collapse to lam * trace at lam == Lam
    assert pucci_extremal(A, 0.7, 0.7, "plus") == \
        pytest.approx(0.7 * np.trace(A))


def test_radial_jet_spectrum():
    # radial profile u(r): hessian eigenvalues are u'' once and
    # u' g'/g with multiplicity m-1
    m, du, d2u, ratio = 4, 0.8, -1.1, 2.3
    jet = radial_jet(m, 0.5, du, d2u, ratio)
    eigs = np.sort(sym_eigvals(jet.hess))
    want = np.sort([d2u] + [du * ratio] * (m - 1))
    assert np.allclose(eigs, want, atol=1e-12)
    assert jet.value == 0.5
    assert jet.grad[0] == pytest.approx(du)
    assert jet.dim == m


def test_radial_helpers_agree_with_dense_forms():
    # the dense path loses eps^(1/multiplicity) on the repeated tangential
    # eigenvalue, so the comparison tolerance widens with k
    m, a, b, ratio = 5, -0.4, 0.9, 1.7
    jet = radial_jet(m, 0.0, b, a, ratio)
    ht = b * ratio
    for (k, j), tol in [((1, 1), 1e-10), ((2, 1), 1e-7), ((2, 2), 1e-7),
                        ((4, 3), 1e-4)]:
        assert garding_branch_radial(a, ht, m, k, j) == \
            pytest.approx(garding_branches(jet.hess, k)[j - 1], abs=tol)
    for which in ("plus", "minus"):
        assert pucci_radial(a, ht, m, 0.5, 2.0, which) == \
            pytest.approx(pucci_extremal(jet.hess, 0.5, 2.0, which), abs=1e-9)


def test_jet_negation_is_pointwise():
    rng = np.random.default_rng(31)
    A = random_sym(rng, 3)
    jet = Jet(0.7, rng.standard_normal(3), A)
    neg = jet.negated()
    assert neg.value == -jet.value
    assert np.allclose(neg.grad, -jet.grad)
    assert np.allclose(neg.hess, -A)
    assert np.allclose(neg.negated().hess, jet.hess)
