"""Discrete Perron-style solver for radial obstacle problems.

The unknown is a grid function with fixed boundary values, constrained to
stay at or below an obstacle, and required to satisfy the constraint set
discretely at interior nodes.  Node jets use central differences; concave
kinks (second difference below -threshold/h) admit no test function from
above, so membership checks skip them.

The node relation: freezing the neighbors, the second difference is affine
and decreasing in the node value, and properness makes the whole defining
value nonincreasing in it, so each node has a largest admissible value
found by bisection, and the solution is the projection of that root onto
the obstacle.  The scalar sweep is the reference engine; the production
engine applies the same update to all nodes of one parity at once with
projected overrelaxation.  Value-affine trace-family operators skip the
iteration entirely: a banded direct solve plus active-set rounds gives the
same fixed point to machine precision.
"""

import math

import numpy as np
from scipy.linalg import solve_banded

from .expr import Bin, Num, Var
from .grid import GridFunction

__all__ = [
    "SolverError", "node_solve", "sweep_scalar", "solve_obstacle",
    "solve_dirichlet", "membership_margin", "perron_report", "ahlfors_check",
]

KINK_THRESHOLD = 1.0
ROOT_TOL = 1e-12
SWEEP_TOL = 1e-11
MAX_SWEEPS = 200000
_EPS = float(np.finfo(float).eps)


class SolverError(RuntimeError):
    pass


def _radial_parts(subeq, manifold, x, u, du, d2u):
    ht = manifold.gg_ratio(x) * du
    return subeq.defining_radial(x, u, du, d2u, ht)


def node_defining(subeq, manifold, x, v, left, right, h):
    """Defining value at one node as a function of the node value v."""
    du = (right - left) / (2.0 * h)
    d2u = (left - 2.0 * v + right) / (h * h)
    return float(_radial_parts(subeq, manifold, x, v, du, d2u))


def node_solve(subeq, manifold, x, left, right, h, obstacle=math.inf,
               tol=ROOT_TOL):
    """Largest admissible node value given frozen neighbors, capped by the
    obstacle.

    Bisection on the monotone defining value; the bracket starts around the
    neighbor values and expands geometrically.  A value-independent defining
    (degenerate constraint) returns the obstacle when admissible and raises
    otherwise.
    """
    f = lambda v: node_defining(subeq, manifold, x, v, left, right, h)
    lo = min(left, right) - 1.0
    hi = max(left, right) + 1.0
    flo, fhi = f(lo), f(hi)
    span = hi - lo
    for _ in range(80):
        if flo >= 0.0 and fhi < 0.0:
            break
        if flo == fhi:
            # no dependence on the node value at this stencil
            if flo >= 0.0:
                if math.isinf(obstacle):
                    raise SolverError(
                        "value-independent constraint admits every node "
                        "value and there is no obstacle to select one")
                return obstacle
            raise SolverError("value-independent constraint rejects every "
                              "node value at x=%g" % x)
        if flo < 0.0:
            lo -= span
            flo = f(lo)
        if fhi >= 0.0:
            hi += span
            fhi = f(hi)
        span *= 2.0
    else:
        raise SolverError("bracket expansion failed at x=%g" % x)
    while hi - lo > tol * max(1.0, abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        if f(mid) >= 0.0:
            lo = mid
        else:
            hi = mid
    return min(obstacle, lo)


def sweep_scalar(subeq, manifold, grid, values, obstacle, order="forward"):
    """One Gauss-Seidel pass of node_solve over the interior, in place."""
    idx = range(1, grid.n - 1)
    if order == "backward":
        idx = reversed(idx)
    elif order != "forward":
        raise ValueError("order must be 'forward' or 'backward'")
    delta = 0.0
    for i in idx:
        new = node_solve(subeq, manifold, grid.nodes[i], values[i - 1],
                         values[i + 1], grid.h, obstacle[i])
        delta = max(delta, abs(new - values[i]))
        values[i] = new
    return delta


# ---------------------------------------------------------------------------
# Vectorized engine

def _is_affine_trace(subeq):
    """Trace-family operators whose defining value is affine in the node
    value: full-trace sums with no profile or an affine odd profile."""
    if subeq.kind not in ("sum_smallest", "sum_largest"):
        return False
    if subeq.params["k"] != subeq.m:
        return False
    f = subeq.params.get("f")
    if f is None or isinstance(f, Num):
        return True
    if f == Var("t"):
        return True
    return (isinstance(f, Bin) and f.op == "*"
            and isinstance(f.left, Num) and f.right == Var("t"))


def _affine_coeffs(subeq):
    """(alpha, beta) with defining = trace - (alpha*u + beta)."""
    f = subeq.params.get("f")
    if f is None:
        return 0.0, 0.0
    if isinstance(f, Num):
        return 0.0, f.value
    if f == Var("t"):
        return 1.0, 0.0
    if (isinstance(f, Bin) and f.op == "*"
            and isinstance(f.left, Num) and f.right == Var("t")):
        return f.left.value, 0.0
    raise SolverError("profile is not affine")


def _solve_affine_active_set(subeq, manifold, grid, b0, b1, obs, init,
                             max_iter=None):
    """Direct complementarity solve for the affine trace family.

    Free nodes satisfy the linear equation exactly (banded solve); contact
    nodes sit on the obstacle.  One combined primal-dual score updates the
    active set each round.  Termination is finite for this stencil, though
    a cold start can creep one node per round, hence the budget of order n.
    """
    alpha, beta = _affine_coeffs(subeq)
    if alpha < 0.0:
        raise SolverError("profile slope is negative; operator not proper")
    n = grid.n
    if max_iter is None:
        max_iter = n + 10
    h = grid.h
    x = grid.nodes
    drift = (subeq.m - 1) * manifold.gg_ratio(x)
    lo_c = 1.0 / h ** 2 - drift / (2.0 * h)
    up_c = 1.0 / h ** 2 + drift / (2.0 * h)
    dg_c = -2.0 / h ** 2 - alpha
    bounded = np.isfinite(obs)
    if init is not None:
        vals = init.values if isinstance(init, GridFunction) else init
        active = bounded & (np.asarray(vals, dtype=float)
                            >= obs - 1e-12 * np.maximum(1.0, np.abs(obs)))
    else:
        active = np.zeros(n, dtype=bool)
    active[0] = active[-1] = False
    score_scale = 2.0 / h ** 2 + alpha
    obs_scale = max(1.0, abs(b0), abs(b1),
                    float(np.max(np.abs(obs[bounded]))) if np.any(bounded)
                    else 1.0)
    score_eps = 1e-12 * score_scale * obs_scale
    ab = np.zeros((3, n))
    rhs = np.empty(n)
    for it in range(1, max_iter + 1):
        ab[0, 1:] = up_c[:-1]
        ab[1, :] = dg_c
        ab[2, :-1] = lo_c[1:]
        rhs[:] = beta
        # boundary rows and contact rows pin the value directly
        pin = active.copy()
        pin[0] = pin[-1] = True
        ab[0, 1:][pin[:-1]] = 0.0
        ab[2, :-1][pin[1:]] = 0.0
        ab[1, pin] = 1.0
        rhs[pin] = np.where(active, obs, 0.0)[pin]
        rhs[0] = b0
        rhs[-1] = b1
        u = solve_banded((1, 1), ab, rhs)
        u[0] = b0
        u[-1] = b1
        u[active] = obs[active]
        defin = np.empty(n)
        defin[1:-1] = (lo_c[1:-1] * u[:-2] + dg_c * u[1:-1]
                       + up_c[1:-1] * u[2:] - beta)
        defin[0] = defin[-1] = 0.0
        # one combined primal-dual test: positive score means contact.
        # Contact nodes that are still admissible keep their label; without
        # that, stretches where the obstacle itself satisfies the equation
        # (zero multiplier) flap in and out of the set forever.
        dual_eps = 100.0 * _EPS * score_scale * obs_scale
        score = defin + np.where(bounded, score_scale * (u - obs), -np.inf)
        new_active = (score > score_eps) | (active & (defin >= -dual_eps))
        new_active[0] = new_active[-1] = False
        if np.array_equal(new_active, active):
            free = ~active
            free[0] = free[-1] = False
            resid = float(np.max(np.abs(defin[free]))) \
                if np.any(free) else 0.0
            # the obstacle binds interior nodes only; boundary rows keep
            # their Dirichlet data even when it sits above the obstacle
            u[1:-1] = np.minimum(u[1:-1], obs[1:-1])
            return GridFunction(grid, u), {
                "sweeps": it, "residual": resid, "omega": None,
                "affine_path": True, "method": "active_set"}
        active = new_active
    raise SolverError("active set did not settle in %d rounds" % max_iter)


def _vector_defining(subeq, manifold, x, v, left, right, h, gg):
    du = (right - left) / (2.0 * h)
    d2u = (left - 2.0 * v + right) / (h * h)
    return subeq.defining_radial(x, v, du, d2u, gg * du)


def _vector_roots(subeq, manifold, x, left, right, h, gg, affine, v_hint):
    """Largest admissible value at each stencil, vectorized.

    affine: two evaluations determine the exact root.  Otherwise bisection
    with a vector bracket; value-independent nodes come back +inf when
    admissible and raise when not.
    """
    if affine:
        f0 = _vector_defining(subeq, manifold, x, v_hint, left, right, h, gg)
        f1 = _vector_defining(subeq, manifold, x, v_hint + 1.0, left, right,
                              h, gg)
        slope = f1 - f0
        with np.errstate(all="ignore"):
            root = v_hint - f0 / slope
        if np.any(slope >= 0):
            raise SolverError("defining value fails to decrease in the node "
                              "value; operator is not proper here")
        return root
    lo = np.minimum(left, right) - 1.0
    hi = np.maximum(left, right) + 1.0
    flo = _vector_defining(subeq, manifold, x, lo, left, right, h, gg)
    fhi = _vector_defining(subeq, manifold, x, hi, left, right, h, gg)
    span = hi - lo
    flat = np.zeros(lo.shape, dtype=bool)
    for _ in range(80):
        flat = flat | ((flo == fhi) & (np.abs(fhi) >= 0.0))
        need_lo = (flo < 0.0) & ~flat
        need_hi = (fhi >= 0.0) & ~flat
        if not (np.any(need_lo) or np.any(need_hi)):
            break
        lo = np.where(need_lo, lo - span, lo)
        hi = np.where(need_hi, hi + span, hi)
        span = span * 2.0
        flo = np.where(need_lo, _vector_defining(subeq, manifold, x, lo, left,
                                                 right, h, gg), flo)
        fhi = np.where(need_hi, _vector_defining(subeq, manifold, x, hi, left,
                                                 right, h, gg), fhi)
    else:
        raise SolverError("vector bracket expansion failed")
    if np.any(flat & (flo < 0.0)):
        raise SolverError("value-independent constraint rejects every node "
                          "value on part of the grid")
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        fm = _vector_defining(subeq, manifold, x, mid, left, right, h, gg)
        take = fm >= 0.0
        lo = np.where(take, mid, lo)
        hi = np.where(take, hi, mid)
        if float(np.max(hi - lo)) <= ROOT_TOL * max(
                1.0, float(np.max(np.abs(lo)))):
            break
    return np.where(flat, math.inf, lo)


def solve_obstacle(subeq, manifold, grid, boundary, obstacle=None,
                   tol=SWEEP_TOL, max_sweeps=MAX_SWEEPS, omega=None,
                   init=None):
    """Largest grid function below the obstacle, matching the boundary
    values, satisfying the constraint discretely at interior nodes.

    Red-black projected overrelaxation from the constant lower barrier.
    Returns (GridFunction, info dict with sweeps and final residual).
    """
    b0, b1 = float(boundary[0]), float(boundary[1])
    if obstacle is None:
        obs = np.full(grid.n, math.inf)
    elif isinstance(obstacle, GridFunction):
        obs = obstacle.values.copy()
    else:
        obs = np.asarray(obstacle, dtype=float).copy()
        if obs.shape != (grid.n,):
            raise ValueError("obstacle shape mismatch")
    u = np.empty(grid.n)
    if init is not None:
        u[:] = np.minimum(init.values if isinstance(init, GridFunction)
                          else np.asarray(init, dtype=float), obs)
    else:
        u[:] = np.minimum(min(b0, b1), obs)
    u[0] = b0
    u[-1] = b1
    interior = np.arange(1, grid.n - 1)
    reds = interior[::2]
    blacks = interior[1::2]
    x_all = grid.nodes
    gg_all = manifold.gg_ratio(x_all)
    affine = _is_affine_trace(subeq)
    if affine:
        try:
            return _solve_affine_active_set(subeq, manifold, grid, b0, b1,
                                            obs, init)
        except SolverError:
            pass    # fall back to projected relaxation
    if omega is None:
        L = grid.r1 - grid.r0
        omega = 2.0 / (1.0 + math.sin(math.pi * grid.h / L))
        omega = min(omega, 1.995)
    h = grid.h
    prev_res = math.inf
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        res = 0.0
        for group in (reds, blacks):
            left = u[group - 1]
            right = u[group + 1]
            roots = _vector_roots(subeq, manifold, x_all[group], left, right,
                                  h, gg_all[group], affine, u[group])
            cand = u[group] + omega * (roots - u[group])
            cand = np.where(np.isfinite(roots), cand, roots)
            new = np.minimum(obs[group], cand)
            res = max(res, float(np.max(np.abs(new - u[group]))))
            u[group] = new
        if not math.isfinite(res):
            raise SolverError("sweep diverged")
        if res <= tol * max(1.0, float(np.max(np.abs(u)))):
            break
        if res > prev_res * 1.5 and omega > 1.0:
            # relaxation overshoot; retreat toward plain Gauss-Seidel
            omega = 1.0 + 0.5 * (omega - 1.0)
        prev_res = res
    else:
        raise SolverError("no convergence in %d sweeps (residual %.3g)"
                          % (max_sweeps, res))
    return GridFunction(grid, u), {"sweeps": sweeps, "residual": res,
                                   "omega": omega, "affine_path": affine}


def solve_dirichlet(subeq, manifold, grid, boundary, **kw):
    """Unconstrained version: obstacle absent."""
    return solve_obstacle(subeq, manifold, grid, boundary, obstacle=None, **kw)


# ---------------------------------------------------------------------------
# Discrete membership and verification

def membership_margin(subeq, manifold, gf, skip_kinks=True,
                      kink_threshold=KINK_THRESHOLD):
    """Minimum interior defining value (negative = violation).  Concave
    kinks are skipped by default: no test function touches from above."""
    du, d2u = gf.central_derivatives()
    x = gf.grid.nodes[1:-1]
    u = gf.values[1:-1]
    vals = _radial_parts(subeq, manifold, x, u, du, d2u)
    keep = np.isfinite(vals)
    if skip_kinks:
        keep &= ~gf.concave_kinks(kink_threshold)
    if not np.any(keep):
        return math.inf, 0
    return float(np.min(vals[keep])), int(np.count_nonzero(~keep))


def perron_report(subeq, manifold, gf, obstacle, boundary, tol=1e-7):
    """Post-solve verification: below the obstacle, admissible, root-exact
    off the contact set, and above sampled competitors."""
    u = gf.values
    obs = (obstacle.values if isinstance(obstacle, GridFunction)
           else np.asarray(obstacle, dtype=float)) if obstacle is not None \
        else np.full(gf.grid.n, math.inf)
    scale = max(1.0, float(np.max(np.abs(u[np.isfinite(u)]))))
    below = float(np.max((u - obs)[1:-1]))    # obstacle binds interior only
    margin, skipped = membership_margin(subeq, manifold, gf)
    du, d2u = gf.central_derivatives()
    x = gf.grid.nodes[1:-1]
    vals = _radial_parts(subeq, manifold, x, u[1:-1], du, d2u)
    inactive = (obs[1:-1] - u[1:-1]) > tol * scale
    keep = inactive & ~gf.concave_kinks()
    off_contact = float(np.max(np.abs(vals[keep]))) if np.any(keep) else 0.0
    competitor = np.minimum(min(boundary), obs)
    competitor_ok = bool(np.all(competitor <= u + tol * scale))
    return {
        "obstacle_excess": below,
        "membership_margin": margin,
        "kinks_skipped": skipped,
        "harmonic_residual_off_contact": off_contact,
        "constant_competitor_below": competitor_ok,
        "scale": scale,
    }


def ahlfors_check(subeq, manifold, gf, tol=1e-10):
    """Boundary-maximum check for the positive part.

    Precondition: gf satisfies the constraint discretely where it is
    positive (kinks skipped).  Holds when the positive part attains its
    maximum on the boundary nodes; Inconclusive when the function is
    nowhere positive.
    """
    from .verdicts import Verdict
    u = gf.values
    finite = np.isfinite(u)
    if not np.any(u[finite] > 0):
        return Verdict.inconclusive("function has no positive part")
    scale = max(1.0, float(np.max(np.abs(u[finite]))))
    du, d2u = gf.central_derivatives()
    x = gf.grid.nodes[1:-1]
    vals = _radial_parts(subeq, manifold, x, u[1:-1], du, d2u)
    pos = u[1:-1] > 0
    keep = pos & np.isfinite(vals) & ~gf.concave_kinks()
    if np.any(keep) and float(np.min(vals[keep])) < -tol * scale:
        return Verdict.inconclusive(
            "precondition failed: not admissible where positive "
            "(margin %.3g)" % float(np.min(vals[keep])))
    interior_max = float(np.max(u[finite]))
    boundary_max = max(u[0], u[-1], 0.0)
    if boundary_max >= interior_max - tol * scale:
        return Verdict.holds("positive part peaks on the boundary",
                             boundary_max=boundary_max, max=interior_max)
    return Verdict.fails(
        "interior maximum %.6g exceeds boundary maximum %.6g"
        % (interior_max, boundary_max),
        max=interior_max, boundary_max=boundary_max,
        argmax_radius=gf.argmax_radius())
