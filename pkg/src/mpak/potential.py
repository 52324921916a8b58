"""Capacities, radial potentials, and the classifier battery.

Everything here reduces to one-dimensional calculus with the warp g:
the q-capacity of the shell (B_r0, B_r1) is
omega * (integral of g^(-(m-1)/(q-1)))^(1-q), the capacitor potential is the
normalized tail integral of the same density, and the limit-capacity
classifiers come down to certifying divergence or convergence of improper
integrals at geometric horizons.  Classifiers return three-valued verdicts
with evidence, never bare booleans.
"""

import math
import warnings

import numpy as np
from scipy.integrate import cumulative_trapezoid, quad, solve_ivp

from .expr import parse_expr
from .grid import Grid, GridFunction
from .manifold import sphere_area_constant
from .verdicts import FAILS, HOLDS, INCONCLUSIVE, Verdict, certify_divergence

__all__ = [
    "q_capacity", "infinity_capacity", "capacitor_profile",
    "infinity_capacitor_profile", "evans_potential", "polar_potential",
    "parabolicity", "infinity_parabolicity", "eikonal_parabolicity",
    "stochastic_completeness", "diffusion_witness", "geodesic_completeness",
    "omori_yau_radial_check", "negative_exhaustion_hessian_check",
]

_HORIZONS = (1e2, 1e3, 1e4, 1e5, 1e6)


def _capacity_exponent(m, q):
    if not q > 1:
        raise ValueError("need q > 1")
    return (m - 1) / (q - 1)


def _density(manifold, a):
    """phi(s) = g(s)^(-a) evaluated through log space (no overflow)."""
    def phi(s):
        L = -a * manifold.log_g(float(s))
        if L < -745.0:
            return 0.0
        if L > 709.0:
            return math.inf
        return math.exp(L)
    return phi


def q_capacity(manifold, r0, r1, q, with_constant=True):
    """Capacity of the shell (ball r0, ball r1) for exponent q > 1."""
    if not 0 < r0 < r1 <= manifold.rmax:
        raise ValueError("need 0 < r0 < r1 <= rmax")
    a = _capacity_exponent(manifold.m, q)
    phi = _density(manifold, a)
    integral, _ = quad(phi, r0, r1, limit=200)
    if integral <= 0:
        raise ArithmeticError("capacity integral vanished")
    cap = integral ** (1.0 - q)
    return sphere_area_constant(manifold.m) * cap if with_constant else cap


def infinity_capacity(manifold, r0, r1=None):
    """Limit exponent: 1/(r1 - r0); with r1 omitted, the capacity of the
    complement of the ball, 0 exactly when rmax is infinite."""
    if r1 is None:
        r1 = manifold.rmax
    if math.isinf(r1):
        return 0.0
    if not r1 > r0 > 0:
        raise ValueError("need 0 < r0 < r1")
    return 1.0 / (r1 - r0)


def capacitor_profile(manifold, r0, r1, q, n=400):
    """Equilibrium potential of the shell: u(r0) = 1, u(r1) = 0.

    Returns (GridFunction u, info).  info carries the analytic derivative,
    the exactly constant flux (-u')^(q-1) g^(m-1), and the capacity.
    """
    grid = Grid(r0, r1, n)
    a = _capacity_exponent(manifold.m, q)
    phi_fn = _density(manifold, a)
    phi = np.asarray([phi_fn(s) for s in grid.nodes])
    cum = cumulative_trapezoid(phi, grid.nodes, initial=0.0)
    total = float(cum[-1])
    if total <= 0:
        raise ArithmeticError("degenerate capacitor (zero density mass)")
    u = GridFunction(grid, 1.0 - cum / total)
    du = -phi / total
    gm1 = np.exp((manifold.m - 1) * np.asarray(
        [manifold.log_g(s) for s in grid.nodes]))
    flux = (-du) ** (q - 1.0) * gm1
    cap_nc = total ** (1.0 - q)
    info = {
        "du": du,
        "flux": flux,
        "capacity": sphere_area_constant(manifold.m) * cap_nc,
        "capacity_no_constant": cap_nc,
        "q": float(q),
    }
    return u, info


def infinity_capacitor_profile(r0, r1, n=400):
    """Limit-exponent capacitor: the linear profile (r1 - r)/(r1 - r0)."""
    grid = Grid(r0, r1, n)
    u = GridFunction(grid, (r1 - grid.nodes) / (r1 - r0))
    return u, {"capacity": 1.0 / (r1 - r0), "slope": -1.0 / (r1 - r0)}


def evans_potential(manifold, r0, r1, n=400):
    """w(r) = integral from r0 to r of g^(1-m): zero on the inner sphere,
    exactly harmonic, with unit flux w' g^(m-1) = 1."""
    grid = Grid(r0, r1, n)
    phi_fn = _density(manifold, manifold.m - 1)
    phi = np.asarray([phi_fn(s) for s in grid.nodes])
    w = GridFunction(grid, cumulative_trapezoid(phi, grid.nodes, initial=0.0))
    return w, {"dw": phi, "flux": phi * np.exp(
        (manifold.m - 1) * np.asarray([manifold.log_g(s) for s in grid.nodes]))}


def polar_potential(manifold, p, grid):
    """Flat-space pole potential: log r for p = 2, -r^(2-p) for p > 2.

    Its hessian eigenvalues are (p-2)(1-p) r^-p once and (p-2) r^-p with
    multiplicity m-1, so the sum of the p smallest vanishes identically;
    the potential tends to -inf at the pole.  Requires the flat model.
    """
    if abs(manifold.curvature(1.0)) > 1e-12 or abs(manifold.g(1.0) - 1.0) > 1e-12:
        raise ValueError("pole potentials in this form need the flat model")
    if p == 2:
        vals = np.log(grid.nodes)
    elif p > 2:
        vals = -grid.nodes ** (2.0 - p)
    else:
        raise ValueError("need p >= 2")
    return GridFunction(grid, vals)


# ---------------------------------------------------------------------------
# Classifiers

def _ladder(fn, horizons=_HORIZONS):
    return [fn(h) for h in horizons]


def parabolicity(manifold, q=2.0):
    """Holds iff the shell capacities to infinity vanish, i.e. the density
    g^(-(m-1)/(q-1)) has divergent integral at large radius."""
    a = _capacity_exponent(manifold.m, q)
    if math.isfinite(manifold.rmax):
        phi = _density(manifold, a)
        r0 = manifold.rmax / 2.0
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            try:
                integral, err = quad(phi, r0, manifold.rmax, limit=400)
            except Warning:
                return Verdict.inconclusive(
                    "capacity integral near the finite boundary did not "
                    "converge numerically", rmax=manifold.rmax)
        if math.isfinite(integral) and err < 1e-6 * max(1.0, integral):
            return Verdict.fails(
                "finite boundary at rmax=%g keeps the capacity positive"
                % manifold.rmax, integral=integral)
        return Verdict.inconclusive("integration near the finite boundary "
                                    "was unstable", integral=integral)
    horizons = _HORIZONS
    logs = _ladder(lambda h: -a * manifold.log_g(h))
    cert = certify_divergence(logs, horizons)
    if cert.status == HOLDS:
        return Verdict.holds("capacity density integral diverges", **cert.evidence)
    if cert.status == FAILS:
        return Verdict.fails("capacity density integral converges",
                             **cert.evidence)
    return Verdict.inconclusive(cert.reason, **cert.evidence)


def infinity_parabolicity(manifold, r0=1.0):
    """Limit-exponent parabolicity: the complement capacity 1/(rmax - r0)
    vanishes iff the radius range is infinite."""
    cap = infinity_capacity(manifold, r0)
    if cap == 0.0:
        return Verdict.holds("limit capacity of the ball complement is zero",
                             capacity=0.0)
    return Verdict.fails("limit capacity 1/(rmax - r0) = %g is positive" % cap,
                         capacity=cap, rmax=manifold.rmax)


def eikonal_parabolicity(manifold, r0=1.0):
    """The gradient-bound constraint admits a bounded exhaustion-type
    potential iff the distance to the boundary is infinite; with finite
    rmax the distance function r - r0 is bounded and the property fails."""
    if math.isinf(manifold.rmax):
        return Verdict.holds("unbounded radius range; distance potential "
                             "is unbounded", rmax=math.inf)
    return Verdict.fails("distance to the boundary is bounded by %g"
                         % (manifold.rmax - r0), rmax=manifold.rmax)


def geodesic_completeness(manifold):
    if math.isinf(manifold.rmax):
        return Verdict.holds("radial geodesics are defined for all time")
    return Verdict.fails("radial geodesic leaves the manifold at rmax=%g"
                         % manifold.rmax, rmax=manifold.rmax)


def _log_slope(manifold, r):
    """d/dr log g, usable at radii where log g swamps double precision.

    The expression path forms log g' - log g, which is pure rounding noise
    once |log g| ulp exceeds the difference; past 1e12 switch to wide
    centered differences on log g (truncation O((r/100)^2 (log g)'''),
    roundoff ulp/(r/50), both far below the certificate tolerances).
    """
    if abs(manifold.log_g(r)) < 1e12:
        return manifold.gg_ratio(r)
    dr = 0.01 * r
    return (manifold.log_g(r + dr) - manifold.log_g(r - dr)) / (2.0 * dr)


def _tail_flux_ratio(manifold, r_start, horizons):
    """(integral of g^(m-1) from r_start to r) / g^(m-1)(r) at each horizon.

    The ratio R solves R' = 1 - (m-1)(g'/g) R.  Forming it as a quotient
    of quadratures fails under fast growth (the mass is a boundary layer
    narrower than one ulp of the horizon), and integrating the ODE fails
    too: at kappa ~ 1e12 the 1 - kappa R cancellation leaves more roundoff
    per step than any tolerance admits.  So each horizon deep in the stiff
    regime (kappa h > 1e3) is evaluated on the attracting slow manifold
    R = 1/kappa + kappa'/kappa^3 + O(1/(kappa h)^2 scale), and the rest by
    LSODA from r_start.  Returns None when neither route certifies.
    """
    def kappa(r):
        return (manifold.m - 1) * _log_slope(manifold, r)

    def rhs(r, y):
        return [1.0 - kappa(r) * y[0]]
    out = []
    for h in horizons:
        kh = kappa(h)
        if kh * h > 1e3:
            dr = 1e-3 * h
            kp = (kappa(h + dr) - kappa(h - dr)) / (2.0 * dr)
            out.append(1.0 / kh + kp / kh ** 3)
            continue
        with np.errstate(all="ignore"):
            sol = solve_ivp(rhs, (r_start, h), [0.0], method="LSODA",
                            rtol=1e-8, atol=1e-12)
        if not sol.success:
            return None
        out.append(float(sol.y[0, -1]))
    out = np.asarray(out)
    if not np.all(np.isfinite(out)) or np.any(out <= 0):
        return None
    return out


def diffusion_witness(manifold, r_start=1.0, r_cap=80.0, delta=1e-3,
                      blowup=1e8):
    """Witness criterion for probability conservation, as a verdict.

    Integrates the increasing solution of u'' + (m-1)(g'/g) u' = u with
    u(r_start) = 0, u'(r_start) = delta.  A bounded such solution certifies
    that the diffusion loses mass (Fails); the bound beyond the window is
    certified by convergence of the tail flux ratio (mass below r)/g^(m-1)
    and of g^(1-m).  Blowup past the threshold certifies there is no bounded
    witness (Holds).  Solver failure or an uncertified tail is Inconclusive.
    """
    def rhs(r, y):
        u, v = y
        return [v, u - (manifold.m - 1) * manifold.gg_ratio(r) * v]

    def blew_up(r, y):
        return abs(y[0]) - blowup
    blew_up.terminal = True
    blew_up.direction = 1.0
    with np.errstate(all="ignore"):
        sol = solve_ivp(rhs, (r_start, r_cap), [0.0, delta], method="LSODA",
                        events=blew_up, rtol=1e-8, atol=1e-12, max_step=1.0)
    if not sol.success and sol.status != 1:
        return Verdict.inconclusive("witness integration failed: %s"
                                    % sol.message)
    if sol.status == 1 or (sol.y.size and abs(sol.y[0, -1]) >= blowup):
        r_exit = float(sol.t[-1])
        return Verdict.holds("witness solution exceeds %g by r=%g, no "
                             "bounded witness" % (blowup, r_exit),
                             witness_max=float(np.max(np.abs(sol.y[0]))),
                             r_exit=r_exit)
    u_end = float(sol.y[0, -1])
    bound = float(np.max(np.abs(sol.y[0])))
    # tail certificates: both integrands must be certified convergent
    tail_h = [r_cap * f for f in (1.0, 10.0, 100.0, 1e3, 1e4)]
    ratios = _tail_flux_ratio(manifold, r_start, tail_h)
    if ratios is None:
        return Verdict.inconclusive(
            "witness stayed bounded on the window but the tail flux ratio "
            "could not be integrated", witness_max=bound)
    log_ratio = [math.log(v) for v in ratios]
    log_gm1 = [-(manifold.m - 1) * manifold.log_g(h) for h in tail_h]
    cert_ratio = certify_divergence(log_ratio, tail_h)
    cert_gm1 = certify_divergence(log_gm1, tail_h)
    if cert_ratio.status == FAILS and cert_gm1.status == FAILS:
        return Verdict.fails(
            "bounded witness solution (max %.3g) with certified convergent "
            "tail flux" % bound, witness_max=bound, witness_end=u_end,
            tail_ratio_slopes=cert_ratio.evidence.get("slopes"))
    return Verdict.inconclusive(
        "witness stayed bounded on the window but the tail flux did not "
        "certify", witness_max=bound,
        ratio_status=cert_ratio.status, gm1_status=cert_gm1.status)


def stochastic_completeness(manifold, r_start=1.0, r_cap=80.0, delta=1e-3,
                            blowup=1e8):
    """Holds: the diffusion conserves probability.  Two-stage certificate:
    the volume test (divergence of r / log vol(B_r), sufficient) first, the
    witness solution criterion second."""
    if math.isfinite(manifold.rmax):
        return Verdict.inconclusive(
            "finite radius range; the conservation question concerns "
            "complete models", rmax=manifold.rmax)
    logc = math.log(sphere_area_constant(manifold.m))
    logs = []
    usable = True
    for h in _HORIZONS:
        lv = manifold.log_volume_ball(h) + logc
        if lv <= 0:
            usable = False
            break
        logs.append(math.log(h) - math.log(lv))
    if usable:
        cert = certify_divergence(logs, _HORIZONS)
        if cert.status == HOLDS:
            return Verdict.holds("volume test: integral of r/log vol(B_r) "
                                 "diverges", **cert.evidence)
    return diffusion_witness(manifold, r_start=r_start, r_cap=r_cap,
                             delta=delta, blowup=blowup)


# ---------------------------------------------------------------------------
# Curvature-free test-function checks

def _loggrid(window, n):
    a, b = window
    return np.geomspace(a, b, n)


def omori_yau_radial_check(manifold, w, G, variant="laplacian",
                           window=(1.0, 1e3), n=400, tol=1e-9):
    """Test-function certificate for the maximum-principle properties.

    w (expression in r) must be an increasing exhaustion; G (expression in t)
    a positive nondecreasing control with divergent integral of 1/G.  The
    laplacian variant checks laplacian(w) <= G(w) and |w'| <= G(w); the
    hessian_max variant bounds the largest hessian eigenvalue instead.
    """
    if variant not in ("laplacian", "hessian_max"):
        raise ValueError("variant must be 'laplacian' or 'hessian_max'")
    w = parse_expr(w, var="r") if isinstance(w, str) else w
    G = parse_expr(G, var="t") if isinstance(G, str) else G
    rs = _loggrid(window, n)
    wv = w.evaluate(rs)
    dw = w.diff("r").evaluate(rs)
    d2w = w.diff("r").diff("r").evaluate(rs)
    Gw = G.evaluate(wv)
    scale = np.maximum(1.0, np.abs(Gw))
    if np.any(dw < -tol * scale):
        return Verdict.fails("candidate is not nondecreasing",
                             min_slope=float(np.min(dw)))
    if wv[-1] - wv[0] < 1.0:
        return Verdict.fails("candidate does not exhaust: growth %.3g over "
                             "the window" % float(wv[-1] - wv[0]))
    if np.any(Gw <= 0):
        return Verdict.fails("control function is not positive on the "
                             "range of w", min_G=float(np.min(Gw)))
    dG = G.diff("t").evaluate(wv)
    if np.any(dG < -tol * scale):
        return Verdict.fails("control function is not nondecreasing",
                             min_dG=float(np.min(dG)))
    grad_margin = float(np.max(np.abs(dw) - Gw))
    if grad_margin > tol * float(np.max(scale)):
        return Verdict.fails("gradient bound |w'| <= G(w) violated by %.3g"
                             % grad_margin, margin=grad_margin)
    ht = manifold.gg_ratio(rs) * dw
    if variant == "laplacian":
        second = d2w + (manifold.m - 1) * ht
        label = "laplacian"
    else:
        second = np.maximum(d2w, ht)
        label = "largest hessian eigenvalue"
    margin = float(np.max(second - Gw))
    if margin > tol * float(np.max(scale)):
        return Verdict.fails("%s bound violated by %.3g" % (label, margin),
                             margin=margin)
    # divergence of the control integral, in the exhaustion parameter
    logs = [-math.log(float(G.evaluate(float(s)))) for s in _HORIZONS]
    cert = certify_divergence(logs, _HORIZONS)
    if cert.status != HOLDS:
        return Verdict(INCONCLUSIVE if cert.status == INCONCLUSIVE else FAILS,
                       "control integral of 1/G did not certify divergent",
                       **cert.evidence)
    return Verdict.holds("test function certified on [%g, %g]" % window,
                         gradient_margin=grad_margin, second_margin=margin)


def negative_exhaustion_hessian_check(manifold, w, window=(1e-2, 40.0),
                                      n=400, tol=1e-9):
    """Negative exhaustion with hessian eigenvalues bounded below by the
    value itself: w < 0 decreasing to -inf, both hessian eigenvalues >= w,
    and |w'| <= -w.  Certifies the hessian-type maximum principle property
    through the stacked construction hypotheses.
    """
    w = parse_expr(w, var="r") if isinstance(w, str) else w
    rs = _loggrid(window, n)
    wv = w.evaluate(rs)
    dw = w.diff("r").evaluate(rs)
    d2w = w.diff("r").diff("r").evaluate(rs)
    if not (np.all(np.isfinite(wv)) and np.all(np.isfinite(dw))
            and np.all(np.isfinite(d2w))):
        return Verdict.inconclusive(
            "candidate or its derivatives overflow on the window",
            window=list(window))
    scale = np.maximum(1.0, np.abs(wv))
    if np.any(wv >= 0):
        return Verdict.fails("candidate is not negative on the window",
                             max_value=float(np.max(wv)))
    if np.any(dw > tol * scale):
        return Verdict.fails("candidate is not nonincreasing",
                             max_slope=float(np.max(dw)))
    if not wv[-1] <= 2.0 * wv[0] - 1.0:
        return Verdict.fails(
            "candidate does not exhaust downward (w(%g)=%.3g, w(%g)=%.3g)"
            % (window[0], wv[0], window[1], wv[-1]))
    ht = manifold.gg_ratio(rs) * dw
    rad = float(np.max((wv - d2w) / scale))
    tan = float(np.max((wv - ht) / scale))
    if rad > tol:
        return Verdict.fails("radial hessian eigenvalue drops below the "
                             "value (margin %.3g)" % rad, margin=rad)
    if tan > tol:
        return Verdict.fails("tangential hessian eigenvalue drops below the "
                             "value (margin %.3g)" % tan, margin=tan)
    grad = float(np.max((np.abs(dw) + wv) / scale))
    if grad > tol:
        return Verdict.fails("|w'| exceeds -w (margin %.3g)" % grad,
                             margin=grad)
    return Verdict.holds("negative exhaustion certified on [%g, %g]" % window,
                         radial_margin=rad, tangential_margin=tan,
                         gradient_margin=grad)
