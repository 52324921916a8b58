"""Rotationally symmetric model manifolds dr^2 + g(r)^2 dtheta^2.

The warp g is an expression in r.  Radial functions have hessian eigenvalues
(u'' once, (g'/g) u' with multiplicity m-1) and laplacian
u'' + (m-1)(g'/g) u'.  Warps like exp(r^3) or sinh(r) overflow floats well
inside the radii the classifiers probe, so the ratio g'/g and log g have
log-space fallbacks that stay finite there.
"""

import math

import numpy as np

from .expr import Bin, Call, Num, Var, parse_expr, split_top_level

__all__ = ["ModelManifold", "sphere_area_constant", "manifold_from_string"]


def sphere_area_constant(m):
    """Surface measure of the unit (m-1)-sphere: 2 pi^(m/2) / Gamma(m/2)."""
    return 2.0 * math.pi ** (m / 2.0) / math.gamma(m / 2.0)


class ModelManifold:
    """Dimension m, warp expression g(r), radius range (0, rmax)."""

    def __init__(self, m, warp, rmax=math.inf, label=None):
        if m < 2:
            raise ValueError("model manifolds need dimension m >= 2")
        self.m = int(m)
        self.warp = parse_expr(warp, var="r") if isinstance(warp, str) else warp
        self.rmax = float(rmax)
        if not self.rmax > 0:
            raise ValueError("rmax must be positive")
        self.label = label or ("custom:m=%d,g=%s" % (self.m, self.warp))
        self._dwarp = self.warp.diff("r")
        self._ddwarp = self._dwarp.diff("r")
        self._check_positive()
        self.smooth_pole = self._detect_smooth_pole()

    def _check_positive(self):
        hi = self.rmax if math.isfinite(self.rmax) else 50.0
        rs = np.geomspace(1e-6, hi * (1 - 1e-9), 64)
        vals = self.warp.evaluate(rs)
        good = np.isfinite(vals)
        if not np.all(vals[good] > 0):
            bad = rs[good][vals[good] <= 0][0]
            raise ValueError("warp must be positive on (0, rmax); "
                             "g(%g) <= 0" % bad)

    def _detect_smooth_pole(self):
        # g(0+) = 0 with g'(0) = 1 makes the metric close smoothly at r = 0
        h = 1e-6
        try:
            v = float(self.warp.evaluate(h))
        except (ArithmeticError, ValueError):
            return False
        return abs(v / h - 1.0) < 1e-3

    def __repr__(self):
        return "ModelManifold(%s)" % self.label

    # -- presets ------------------------------------------------------------

    @classmethod
    def euclidean(cls, m):
        return cls(m, Var("r"), label="euclidean:m=%d" % m)

    @classmethod
    def hyperbolic(cls, m, c=1.0):
        c = float(c)
        if c <= 0:
            raise ValueError("curvature scale c must be positive")
        s = math.sqrt(c)
        if s == 1.0:
            warp = Call("sinh", [Var("r")])
        else:
            warp = Bin("/", Call("sinh", [Bin("*", Num(s), Var("r"))]), Num(s))
        return cls(m, warp, label="hyperbolic:m=%d,c=%g" % (m, c))

    # -- warp and derived quantities ----------------------------------------

    def g(self, r):
        return self.warp.evaluate(r)

    def gp(self, r):
        return self._dwarp.evaluate(r)

    def log_g(self, r):
        """log g(r) for scalar r, finite even where g overflows."""
        s, L = self.warp.log_eval(float(r))
        if s <= 0:
            raise ArithmeticError("warp nonpositive at r=%g" % r)
        return L

    def gg_ratio(self, r):
        """g'(r)/g(r), vectorized, with a log-space repair where the plain
        quotient overflows to inf/inf."""
        scalar = np.ndim(r) == 0
        r = np.atleast_1d(np.asarray(r, dtype=float))
        with np.errstate(all="ignore"):
            num = self._dwarp.evaluate(r)
            den = self.warp.evaluate(r)
            out = num / den
        bad = ~np.isfinite(out)
        if np.any(bad):
            for i in np.nonzero(bad)[0]:
                sn, Ln = self._dwarp.log_eval(float(r[i]))
                sd, Ld = self.warp.log_eval(float(r[i]))
                if sd == 0.0:
                    raise ArithmeticError("warp vanishes at r=%g" % r[i])
                out[i] = sn * sd * math.exp(min(Ln - Ld, 700.0))
        return float(out[0]) if scalar else out

    def curvature(self, r):
        """Radial sectional curvature -g''/g."""
        scalar = np.ndim(r) == 0
        r = np.atleast_1d(np.asarray(r, dtype=float))
        with np.errstate(all="ignore"):
            out = -self._ddwarp.evaluate(r) / self.warp.evaluate(r)
        bad = ~np.isfinite(out)
        if np.any(bad):
            for i in np.nonzero(bad)[0]:
                sn, Ln = self._ddwarp.log_eval(float(r[i]))
                sd, Ld = self.warp.log_eval(float(r[i]))
                out[i] = -sn * sd * math.exp(min(Ln - Ld, 700.0))
        return float(out[0]) if scalar else out

    # -- radial calculus ----------------------------------------------------

    def radial_hessian_eigs(self, r, du, d2u):
        """(radial, tangential) hessian eigenvalues of a radial function."""
        return d2u, self.gg_ratio(r) * du

    def laplacian_radial(self, r, du, d2u):
        return d2u + (self.m - 1) * self.gg_ratio(r) * du

    # -- measure ------------------------------------------------------------

    def sphere_area(self, r, with_constant=True):
        area = self.g(r) ** (self.m - 1)
        return sphere_area_constant(self.m) * area if with_constant else area

    def volume_ball(self, r, with_constant=True):
        """Volume of the metric ball of radius r about the pole."""
        if not self.smooth_pole:
            raise ValueError("volume from the pole needs a smooth pole "
                             "(g(0)=0, g'(0)=1); this warp has %s" % self.label)
        from scipy.integrate import quad
        val, _ = quad(lambda s: float(self.warp.evaluate(s)) ** (self.m - 1),
                      0.0, float(r), limit=200)
        return sphere_area_constant(self.m) * val if with_constant else val

    def log_volume_ball(self, r, nodes=2048):
        """log of the ball volume (no sphere constant), safe at huge radii.

        Trapezoid sum of g^(m-1) on a geometric grid, assembled in log space.
        """
        r = float(r)
        lo = min(1e-6, r * 1e-9)
        s = np.geomspace(lo, r, nodes)
        logphi = np.empty(nodes)
        for i, si in enumerate(s):
            logphi[i] = (self.m - 1) * self.log_g(si)
        ds = np.diff(s)
        # log of sum of 0.5 (phi_i + phi_{i+1}) ds_i
        pair = np.logaddexp(logphi[:-1], logphi[1:]) + np.log(0.5 * ds)
        peak = float(np.max(pair))
        if peak == -math.inf:
            return -math.inf
        return peak + math.log(float(np.sum(np.exp(pair - peak))))


def manifold_from_string(text):
    """Parse 'euclidean:m=2', 'hyperbolic:m=3,c=1',
    'custom:m=2,g=exp(r^3),rmax=10'."""
    text = text.strip()
    name, _, paramtext = text.partition(":")
    name = name.strip().lower()
    kv = {}
    if paramtext:
        for part in split_top_level(paramtext):
            key, eq, val = part.partition("=")
            if not eq:
                raise ValueError("malformed manifold parameter %r" % part)
            kv[key.strip()] = val.strip()
    if "m" not in kv:
        raise ValueError("manifold needs m=<dimension>")
    m = int(kv["m"])
    if name == "euclidean":
        return ModelManifold.euclidean(m)
    if name == "hyperbolic":
        return ModelManifold.hyperbolic(m, float(kv.get("c", 1.0)))
    if name == "custom":
        if "g" not in kv:
            raise ValueError("custom manifold needs g=<expr in r>")
        rmax = float(kv["rmax"]) if "rmax" in kv else math.inf
        return ModelManifold(m, kv["g"], rmax=rmax)
    raise ValueError("unknown manifold family %r" % name)
