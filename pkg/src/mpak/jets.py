"""Reduced 2-jets and the symmetric-matrix algebra the subequation catalog needs.

A reduced jet is (value, gradient, hessian).  Most operators here only see the
hessian through its eigenvalues; radial jets on a model manifold have hessian
eigenvalues (a, b, b, ..., b) with a the radial second derivative and b the
tangential one, and every catalog operator gets a vectorized closed form on
that two-eigenvalue family.
"""

import math

import numpy as np

__all__ = [
    "Jet", "radial_jet", "sym_eigvals", "sum_smallest_eigs", "sum_largest_eigs",
    "elementary_symmetric", "garding_root_coeffs", "garding_branches",
    "garding_branch_radial", "pucci_extremal", "pucci_radial",
]

SYMMETRY_TOL = 1e-12
GARDING_IMAG_TOL = 1e-8


class Jet:
    """Reduced 2-jet: scalar value, gradient vector, symmetric hessian."""

    __slots__ = ("value", "grad", "hess")

    def __init__(self, value, grad, hess):
        grad = np.asarray(grad, dtype=float)
        hess = np.asarray(hess, dtype=float)
        if grad.ndim != 1:
            raise ValueError("gradient must be a vector")
        if hess.shape != (grad.size, grad.size):
            raise ValueError("hessian shape %s does not match gradient size %d"
                             % (hess.shape, grad.size))
        skew = np.max(np.abs(hess - hess.T)) if hess.size else 0.0
        scale = max(1.0, float(np.max(np.abs(hess))) if hess.size else 0.0)
        if skew > SYMMETRY_TOL * scale:
            raise ValueError("hessian is not symmetric (asymmetry %.3g)" % skew)
        self.value = float(value)
        self.grad = grad
        self.hess = 0.5 * (hess + hess.T)

    @property
    def dim(self):
        return self.grad.size

    def negated(self):
        return Jet(-self.value, -self.grad, -self.hess)

    def __repr__(self):
        return "Jet(value=%g, |grad|=%g, dim=%d)" % (
            self.value, float(np.linalg.norm(self.grad)), self.dim)


def radial_jet(m, value, du, d2u, gg_ratio):
    """Jet of a radial function: grad along e_1, hessian diag(d2u, b, ..., b)
    with b = (g'/g) du."""
    grad = np.zeros(m)
    grad[0] = du
    b = gg_ratio * du
    hess = np.diag([d2u] + [b] * (m - 1))
    return Jet(value, grad, hess)


def sym_eigvals(A):
    A = np.asarray(A, dtype=float)
    return np.linalg.eigvalsh(0.5 * (A + A.T))


def sum_smallest_eigs(A, k):
    lam = sym_eigvals(A)
    return float(np.sum(lam[:k]))


def sum_largest_eigs(A, k):
    lam = sym_eigvals(A)
    return float(np.sum(lam[lam.size - k:]))


def elementary_symmetric(values, k):
    """e_k of the entries of ``values`` by the Newton-free direct recurrence."""
    values = np.asarray(values, dtype=float)
    if k < 0 or k > values.size:
        return 0.0
    e = np.zeros(k + 1)
    e[0] = 1.0
    for v in values:
        for j in range(k, 0, -1):
            e[j] += v * e[j - 1]
    return float(e[k])


def garding_root_coeffs(eigs, k):
    """Coefficients (ascending in t) of t -> e_k(eigs + t), a degree-k polynomial.

    Coefficient of t^j is C(m-k+j, j) e_{k-j}(eigs).
    """
    eigs = np.asarray(eigs, dtype=float)
    m = eigs.size
    coeffs = np.empty(k + 1)
    for j in range(k + 1):
        coeffs[j] = math.comb(m - k + j, j) * elementary_symmetric(eigs, k - j)
    return coeffs


def garding_branches(A, k):
    """The k branch values of the degree-k eigenvalue polynomial at A, ascending.

    Branch j is minus the j-th largest root of t -> e_k(lambda(A) + t).  For
    k = 1 this is tr(A)/m; for k = m the ordinary eigenvalues.  Roots of a
    hyperbolic polynomial are real; an imaginary residue above tolerance is a
    numerical failure and raises.
    """
    if k < 1:
        raise ValueError("degree k must be >= 1")
    eigs = sym_eigvals(A)
    m = eigs.size
    if k > m:
        raise ValueError("degree k=%d exceeds dimension m=%d" % (k, m))
    coeffs = garding_root_coeffs(eigs, k)
    roots = np.roots(coeffs[::-1])
    scale = max(1.0, float(np.max(np.abs(eigs))))
    imag = float(np.max(np.abs(roots.imag))) if roots.size else 0.0
    # repeated roots (radial spectra, multiples of the identity) split into
    # conjugate pairs by eps^(1/multiplicity), which is no failure
    tol = max(GARDING_IMAG_TOL, 100.0 * float(np.finfo(float).eps) ** (1.0 / k))
    if imag > tol * scale:
        raise ArithmeticError("branch roots not real (imag residue %.3g)" % imag)
    return np.sort(-roots.real)


def garding_branch_radial(a, b, m, k, j):
    """Branch j of the degree-k polynomial on hessian eigenvalues (a, b x (m-1)).

    Vectorized over arrays a, b.  The root polynomial factors as
    (b+t)^(k-1) [C(m-1,k-1)(a+t) + C(m-1,k)(b+t)], so the branch values are
    b with multiplicity k-1 together with the weighted mean
    (C(m-1,k-1) a + C(m-1,k) b) / (C(m-1,k-1) + C(m-1,k)).
    """
    if not 1 <= j <= k:
        raise ValueError("branch index j must be in 1..k")
    if k > m:
        raise ValueError("degree k=%d exceeds dimension m=%d" % (k, m))
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ck1 = math.comb(m - 1, k - 1)
    ck = math.comb(m - 1, k)
    w = (ck1 * a + ck * b) / (ck1 + ck)
    if k == 1:
        return w + 0.0 * b
    # branch values: {b (k-1 times), w}; ascending order selects by rank
    lo = np.minimum(b, w)
    hi = np.maximum(b, w)
    if j == 1:
        return lo
    if j == k:
        return hi
    return np.broadcast_to(b, np.broadcast(a, b).shape).copy()


def pucci_extremal(A, lam, Lam, which):
    """Extremal uniformly elliptic operator with ellipticity bounds [lam, Lam].

    which = "plus": Lam * (positive part of spectrum) + lam * (negative part);
    which = "minus": the infimum counterpart.
    """
    if not (0 < lam <= Lam):
        raise ValueError("need 0 < lam <= Lam")
    eigs = sym_eigvals(A)
    pos = float(np.sum(eigs[eigs > 0]))
    neg = float(np.sum(eigs[eigs < 0]))
    if which == "plus":
        return Lam * pos + lam * neg
    if which == "minus":
        return lam * pos + Lam * neg
    raise ValueError("which must be 'plus' or 'minus'")


def pucci_radial(a, b, m, lam, Lam, which):
    """Vectorized extremal operator on the radial eigenvalue family (a, b x (m-1))."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    pos = np.maximum(a, 0.0) + (m - 1) * np.maximum(b, 0.0)
    neg = np.minimum(a, 0.0) + (m - 1) * np.minimum(b, 0.0)
    if which == "plus":
        return Lam * pos + lam * neg
    if which == "minus":
        return lam * pos + Lam * neg
    raise ValueError("which must be 'plus' or 'minus'")
