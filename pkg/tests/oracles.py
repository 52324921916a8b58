"""Independent reference computations for the test suite.

Everything here is deliberately built from different primitives than the
package uses: characteristic polynomials instead of symmetric eigensolvers,
brute enumeration instead of recurrences, energy minimization instead of the
flux closed form, scratch-assembled relaxation instead of the production
obstacle engine.  Slow is fine; these only have to be right.
"""

import itertools
import math

import numpy as np
from scipy.optimize import minimize


def charpoly_coeffs(A):
    """Coefficients of det(tI - A) by the Faddeev-LeVerrier recursion.

    Returns c with det(tI - A) = t^n + c[0] t^(n-1) + ... + c[n-1].
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    M = np.zeros_like(A)
    coef = 1.0
    out = []
    for k in range(1, n + 1):
        M = A @ M + coef * np.eye(n)
        coef = -np.trace(A @ M) / k
        out.append(coef)
    return np.asarray(out)


def eig_oracle(A):
    """Eigenvalues of a symmetric matrix as companion-matrix roots of its
    characteristic polynomial, ascending.  No symmetric eigensolver."""
    c = charpoly_coeffs(A)
    roots = np.roots(np.concatenate([[1.0], c]))
    return np.sort(roots.real)


def sigma_k(vals, k):
    """Elementary symmetric polynomial by brute enumeration."""
    if k == 0:
        return 1.0
    return float(sum(np.prod(c) for c in itertools.combinations(vals, int(k))))


def garding_branch_oracle(eigs, k):
    """Ordered branch values of the degree-k shifted polynomial.

    Interpolates t -> sigma_k(eigs + t) at k+1 nodes, takes polynomial
    roots, negates and sorts.  Independent of the binomial coefficient
    identity the library expands.
    """
    eigs = np.asarray(eigs, dtype=float)
    k = int(k)
    scale = 1.0 + float(np.max(np.abs(eigs)))
    nodes = np.linspace(-2.0 * scale, 2.0 * scale, k + 1)
    vals = [sigma_k(eigs + t, k) for t in nodes]
    poly = np.polyfit(nodes, vals, k)
    return np.sort(-np.roots(poly).real)


def pucci_oracle(A, lam, Lam, which):
    """Extremal operator straight from the eigenvalue definition."""
    eigs = eig_oracle(A)
    pos = float(np.sum(eigs[eigs > 0]))
    neg = float(np.sum(eigs[eigs < 0]))
    if which == "plus":
        return Lam * pos + lam * neg
    return lam * pos + Lam * neg


def fd_derivative(f, x, h=None):
    """Fourth-order central difference."""
    if h is None:
        h = 1e-3 * max(1.0, abs(x))
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) \
        / (12.0 * h)


def sphere_area(m):
    # surface measure of the unit (m-1)-sphere
    return 2.0 * math.pi ** (m / 2.0) / math.gamma(m / 2.0)


def capacity_energy_oracle(manifold, r0, r1, q, n=400):
    """q-capacity of the (r0, r1) shell by direct minimization of the
    discrete Dirichlet energy over profiles with u(r0)=1, u(r1)=0.

    Midpoint weights, L-BFGS over the interior values.  Agrees with the
    continuum capacity to O(h^2); the tests compare at 1%.
    """
    r = np.linspace(r0, r1, n + 1)
    h = (r1 - r0) / n
    mid = 0.5 * (r[1:] + r[:-1])
    w = np.asarray([float(manifold.g(x)) ** (manifold.m - 1) for x in mid])

    def energy(interior):
        u = np.concatenate([[1.0], interior, [0.0]])
        d = np.diff(u)
        val = h ** (1.0 - q) * float(np.sum(np.abs(d) ** q * w))
        flux = q * h ** (1.0 - q) * np.abs(d) ** (q - 1.0) * np.sign(d) * w
        return val, flux[:-1] - flux[1:]

    x0 = np.linspace(1.0, 0.0, n + 1)[1:-1]
    res = minimize(energy, x0, jac=True, method="L-BFGS-B",
                   options={"maxiter": 20000, "maxfun": 200000,
                            "ftol": 1e-15, "gtol": 1e-12})
    return sphere_area(manifold.m) * float(res.fun)


def obstacle_reference(manifold, r0, r1, n, b0, b1, obstacle=None,
                       max_sweeps=400000, tol=1e-11):
    """Projected Gauss-Seidel for the radial Laplace obstacle problem,
    assembled here from scratch.  Returns (radii, values)."""
    r = np.linspace(r0, r1, n + 1)
    h = (r1 - r0) / n
    u = np.linspace(b0, b1, n + 1)
    if obstacle is None:
        obs = np.full(n + 1, np.inf)
    else:
        obs = np.asarray([obstacle(x) for x in r], dtype=float)
        u = np.minimum(u, obs)
        u[0], u[-1] = b0, b1
    drift = np.asarray([(manifold.m - 1) * float(manifold.gg_ratio(x))
                        for x in r])
    c = drift * h / 2.0
    for _ in range(max_sweeps):
        delta = 0.0
        for i in range(1, n):
            new = 0.5 * ((1.0 - c[i]) * u[i - 1] + (1.0 + c[i]) * u[i + 1])
            if new > obs[i]:
                new = obs[i]
            d = abs(new - u[i])
            if d > delta:
                delta = d
            u[i] = new
        if delta < tol:
            break
    return r, u
