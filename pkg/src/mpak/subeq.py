"""Catalog of constraint sets on reduced 2-jets, closed under duality.

Each entry is the closed set {defining >= 0} of jets (value u, gradient p,
hessian A), possibly depending on the base radius x.  The dual of a set F is
the complement-reflect operation: a jet J lies in the dual iff -J lies
outside the interior of F, so on defining functions dual_defining(J) =
-defining(-J).  Every catalog entry resolves its dual to another catalog
entry; `duality_suite` verifies the resolution against the pointwise
negation identity on sampled jets, the involution, and the min/max
(De Morgan) laws for intersections and unions.

Profile functions: f (value slot) must be odd and nondecreasing with
f(0) = 0 for the duality resolution to be exact; xi (gradient profile) odd;
both are expressions in the variable t.  The base-point profile g is an
expression in r.
"""

import math

import numpy as np

from .expr import Expr, Num, Neg, parse_expr, split_top_level
from .jets import (
    GARDING_IMAG_TOL, Jet, garding_branch_radial, garding_branches,
    pucci_extremal, pucci_radial, sym_eigvals,
)

__all__ = [
    "Subequation", "Intersection", "Union", "subeq_from_string",
    "default_catalog", "duality_suite", "riesz_characteristic",
    "RieszDependenceError", "BOUNDARY_EPS",
]

BOUNDARY_EPS = 1e-9
_CLOSURE_T = 1e-8

_KINDS = {
    "eikonal", "eikonal_dual", "gradient_profile", "sum_smallest",
    "sum_largest", "eigenvalue_floor", "garding", "pucci", "quasilinear",
    "infinity_laplacian", "value_below",
}


class RieszDependenceError(TypeError):
    """The constraint set depends on value or gradient, so the hessian-ray
    characteristic is not defined for it."""


def _expr_or_none(e):
    if e is None:
        return None
    if isinstance(e, str):
        return parse_expr(e, var="t")
    if isinstance(e, Expr):
        return e
    raise TypeError("expected expression or None, got %r" % (e,))


def _f_eval(f, u):
    if f is None:
        return np.zeros_like(np.asarray(u, dtype=float)) if np.ndim(u) else 0.0
    return f.evaluate(u if np.ndim(u) else float(u))


class Subequation:
    """One catalog entry. Construct via the named classmethods."""

    def __init__(self, kind, m, **params):
        if kind not in _KINDS:
            raise ValueError("unknown constraint kind %r" % kind)
        if m < 1:
            raise ValueError("dimension must be positive")
        self.kind = kind
        self.m = int(m)
        self.params = params
        self._validate()

    # -- constructors -------------------------------------------------------

    @classmethod
    def eikonal(cls, m, dual=False):
        return cls("eikonal_dual" if dual else "eikonal", m)

    @classmethod
    def gradient_profile(cls, m, xi, side="below"):
        return cls("gradient_profile", m, xi=_expr_or_none(xi), side=side)

    @classmethod
    def sum_smallest(cls, m, k, f=None):
        return cls("sum_smallest", m, k=int(k), f=_expr_or_none(f))

    @classmethod
    def sum_largest(cls, m, k, f=None):
        return cls("sum_largest", m, k=int(k), f=_expr_or_none(f))

    @classmethod
    def laplace(cls, m, f=None):
        return cls.sum_smallest(m, m, f)

    @classmethod
    def eigenvalue_floor(cls, m, k, f=None):
        return cls("eigenvalue_floor", m, k=int(k), f=_expr_or_none(f))

    @classmethod
    def garding(cls, m, k, j=1, f=None):
        return cls("garding", m, k=int(k), j=int(j), f=_expr_or_none(f))

    @classmethod
    def pucci(cls, m, lam, Lam, which="plus", f=None):
        return cls("pucci", m, lam=float(lam), Lam=float(Lam), which=which,
                   f=_expr_or_none(f))

    @classmethod
    def quasilinear(cls, m, a, f=None, normalized=True):
        a = parse_expr(a, var="t") if isinstance(a, str) else a
        return cls("quasilinear", m, a=a, f=_expr_or_none(f),
                   normalized=bool(normalized))

    @classmethod
    def infinity_laplacian(cls, m, f=None):
        return cls("infinity_laplacian", m, f=_expr_or_none(f))

    @classmethod
    def value_below(cls, m, g):
        g = parse_expr(g, var="r") if isinstance(g, str) else g
        return cls("value_below", m, g=g)

    def _validate(self):
        p = self.params
        if self.kind in ("sum_smallest", "sum_largest", "eigenvalue_floor"):
            if not 1 <= p["k"] <= self.m:
                raise ValueError("k must be in 1..m")
        if self.kind == "garding":
            if not 1 <= p["k"] <= self.m:
                raise ValueError("degree k must be in 1..m")
            if not 1 <= p["j"] <= p["k"]:
                raise ValueError("branch j must be in 1..k")
        if self.kind == "pucci":
            if not (0 < p["lam"] <= p["Lam"]):
                raise ValueError("need 0 < lam <= Lam")
            if p["which"] not in ("plus", "minus"):
                raise ValueError("which must be 'plus' or 'minus'")
        if self.kind == "gradient_profile":
            # properness needs xi nondecreasing, duality resolution needs
            # it odd; probe rather than prove
            xi = p["xi"]
            probes = [0.25, 1.0, 4.0]
            vals = [float(xi.evaluate(t)) for t in probes]
            if vals[0] > vals[1] + 1e-12 or vals[1] > vals[2] + 1e-12:
                raise ValueError("gradient profile xi must be nondecreasing")
            for t, v in zip(probes, vals):
                if abs(float(xi.evaluate(-t)) + v) > 1e-6 * (1.0 + abs(v)):
                    raise ValueError("gradient profile xi must be odd")
        if self.kind == "gradient_profile" and p["side"] not in ("below", "above"):
            raise ValueError("side must be 'below' or 'above'")

    # -- structure ----------------------------------------------------------

    def __eq__(self, other):
        return (isinstance(other, Subequation) and self.kind == other.kind
                and self.m == other.m and self.params == other.params)

    def __hash__(self):
        return hash((self.kind, self.m, tuple(sorted(
            (k, str(v)) for k, v in self.params.items()))))

    def __repr__(self):
        ps = ", ".join("%s=%s" % (k, v) for k, v in sorted(self.params.items()))
        return "Subequation(%s, m=%d%s)" % (self.kind, self.m,
                                            ", " + ps if ps else "")

    @property
    def depends_on_value(self):
        if self.kind == "gradient_profile" or self.kind == "value_below":
            return True
        f = self.params.get("f")
        return f is not None and f != Num(0.0)

    @property
    def depends_on_gradient(self):
        return self.kind in ("eikonal", "eikonal_dual", "gradient_profile",
                             "quasilinear", "infinity_laplacian")

    @property
    def depends_on_point(self):
        return self.kind == "value_below"

    # -- duality ------------------------------------------------------------

    def dual(self):
        k = self.kind
        p = self.params
        if k == "eikonal":
            return Subequation("eikonal_dual", self.m)
        if k == "eikonal_dual":
            return Subequation("eikonal", self.m)
        if k == "gradient_profile":
            side = "above" if p["side"] == "below" else "below"
            return Subequation("gradient_profile", self.m, xi=p["xi"], side=side)
        if k == "sum_smallest":
            if p["k"] == self.m:
                return Subequation("sum_smallest", self.m, k=self.m, f=p["f"])
            return Subequation("sum_largest", self.m, k=p["k"], f=p["f"])
        if k == "sum_largest":
            if p["k"] == self.m:
                return Subequation("sum_smallest", self.m, k=self.m, f=p["f"])
            return Subequation("sum_smallest", self.m, k=p["k"], f=p["f"])
        if k == "eigenvalue_floor":
            return Subequation("eigenvalue_floor", self.m,
                               k=self.m - p["k"] + 1, f=p["f"])
        if k == "garding":
            return Subequation("garding", self.m, k=p["k"],
                               j=p["k"] - p["j"] + 1, f=p["f"])
        if k == "pucci":
            which = "minus" if p["which"] == "plus" else "plus"
            return Subequation("pucci", self.m, lam=p["lam"], Lam=p["Lam"],
                               which=which, f=p["f"])
        if k == "quasilinear" or k == "infinity_laplacian":
            return Subequation(k, self.m, **p)
        if k == "value_below":
            return Subequation("value_below", self.m, g=Neg(p["g"]).simplified())
        raise AssertionError(k)

    # -- defining function, general jets ------------------------------------

    def defining(self, jet, x=None):
        if jet.dim != self.m:
            raise ValueError("jet dimension %d, constraint dimension %d"
                             % (jet.dim, self.m))
        k = self.kind
        p = self.params
        u, grad, A = jet.value, jet.grad, jet.hess
        pn = float(np.linalg.norm(grad))
        if k == "eikonal":
            return 1.0 - pn
        if k == "eikonal_dual":
            return pn - 1.0
        if k == "gradient_profile":
            xi = p["xi"]
            if p["side"] == "below":
                return float(xi.evaluate(-u)) - pn
            return pn - float(xi.evaluate(u))
        if k == "sum_smallest":
            lam = sym_eigvals(A)
            return float(np.sum(lam[:p["k"]])) - _f_eval(p["f"], u)
        if k == "sum_largest":
            lam = sym_eigvals(A)
            return float(np.sum(lam[self.m - p["k"]:])) - _f_eval(p["f"], u)
        if k == "eigenvalue_floor":
            lam = sym_eigvals(A)
            return float(lam[p["k"] - 1]) - _f_eval(p["f"], u)
        if k == "garding":
            mu = garding_branches(A, p["k"])
            return float(mu[p["j"] - 1]) - _f_eval(p["f"], u)
        if k == "pucci":
            return (pucci_extremal(A, p["lam"], p["Lam"], p["which"])
                    - _f_eval(p["f"], u))
        if k == "quasilinear":
            return self._quasilinear_full(u, grad, A, pn)
        if k == "infinity_laplacian":
            if pn > 0.0:
                ph = grad / pn
                val = float(ph @ A @ ph)
            else:
                val = float(sym_eigvals(A)[-1])
            return val - _f_eval(p["f"], u)
        if k == "value_below":
            if x is None:
                raise ValueError("value_below needs the base radius x")
            return float(p["g"].evaluate(float(x))) - u
        raise AssertionError(k)

    def _theta(self, t):
        a_expr = self.params["a"]
        da = a_expr.diff("t")
        t = np.asarray(t, dtype=float)
        a = a_expr.evaluate(t) if t.ndim else float(a_expr.evaluate(float(t)))
        ap = da.evaluate(t) if t.ndim else float(da.evaluate(float(t)))
        th1 = a + t * ap
        th2 = a
        if self.params["normalized"]:
            den = np.maximum(th1, th2)
            return th1 / den, th2 / den
        return th1, th2

    def _quasilinear_full(self, u, grad, A, pn):
        f = _f_eval(self.params["f"], u)
        if pn > 0.0:
            th1, th2 = self._theta(pn)
            ph = grad / pn
            app = float(ph @ A @ ph)
            return th1 * app + th2 * (float(np.trace(A)) - app) - f
        th1, th2 = self._theta(_CLOSURE_T)
        lam = sym_eigvals(A)
        tr = float(np.sum(lam))
        ext = float(lam[-1]) if th1 >= th2 else float(lam[0])
        return th2 * tr + (th1 - th2) * ext - f

    # -- defining function, radial jets (vectorized) -------------------------

    def defining_radial(self, x, u, du, hr, ht):
        """Defining value at radial jets with hessian eigenvalues
        (hr once, ht with multiplicity m-1), vectorized over arrays."""
        m = self.m
        k = self.kind
        p = self.params
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        du = np.asarray(du, dtype=float)
        hr = np.asarray(hr, dtype=float)
        ht = np.asarray(ht, dtype=float)
        pn = np.abs(du)
        if k == "eikonal":
            return 1.0 - pn
        if k == "eikonal_dual":
            return pn - 1.0
        if k == "gradient_profile":
            xi = p["xi"]
            if p["side"] == "below":
                return xi.evaluate(-u) - pn
            return pn - xi.evaluate(u)
        f = _f_eval(p.get("f"), u) if k != "value_below" else None
        if k == "sum_smallest":
            kk = p["k"]
            small = np.where(hr <= ht,
                             hr + (kk - 1) * ht,
                             np.where(kk <= m - 1, kk * ht,
                                      (m - 1) * ht + hr))
            return small - f
        if k == "sum_largest":
            kk = p["k"]
            large = np.where(hr >= ht,
                             hr + (kk - 1) * ht,
                             np.where(kk <= m - 1, kk * ht,
                                      (m - 1) * ht + hr))
            return large - f
        if k == "eigenvalue_floor":
            kk = p["k"]
            if kk == 1:
                lam_k = np.minimum(hr, ht) if m > 1 else hr
            elif kk == m:
                lam_k = np.maximum(hr, ht) if m > 1 else hr
            else:
                lam_k = np.where(hr <= ht, ht + 0.0 * hr,
                                 np.where(kk <= m - 1, ht + 0.0 * hr, hr))
            return lam_k - f
        if k == "garding":
            return garding_branch_radial(hr, ht, m, p["k"], p["j"]) - f
        if k == "pucci":
            return pucci_radial(hr, ht, m, p["lam"], p["Lam"], p["which"]) - f
        if k == "quasilinear":
            tr = hr + (m - 1) * ht
            th1, th2 = self._theta(np.maximum(pn, _CLOSURE_T))
            direct = th1 * hr + th2 * (m - 1) * ht
            lam_max = np.maximum(hr, ht)
            lam_min = np.minimum(hr, ht)
            ext = np.where(th1 >= th2, lam_max, lam_min)
            closure = th2 * tr + (th1 - th2) * ext
            return np.where(pn > 0.0, direct, closure) - f
        if k == "infinity_laplacian":
            return np.where(pn > 0.0, hr, np.maximum(hr, ht)) - f
        if k == "value_below":
            return p["g"].evaluate(x) - u
        raise AssertionError(k)

    # -- membership ----------------------------------------------------------

    def contains(self, jet, x=None, tol=BOUNDARY_EPS):
        return self.defining(jet, x=x) >= -tol


class Intersection:
    """Finite intersection; defining = min of members."""

    def __init__(self, members):
        members = tuple(members)
        if not members:
            raise ValueError("empty intersection")
        dims = {s.m for s in members}
        if len(dims) != 1:
            raise ValueError("mixed dimensions")
        self.members = members
        self.m = members[0].m

    def defining(self, jet, x=None):
        return min(s.defining(jet, x=x) for s in self.members)

    def defining_radial(self, x, u, du, hr, ht):
        vals = [s.defining_radial(x, u, du, hr, ht) for s in self.members]
        return np.minimum.reduce(vals)

    def contains(self, jet, x=None, tol=BOUNDARY_EPS):
        return self.defining(jet, x=x) >= -tol

    def dual(self):
        return Union([s.dual() for s in self.members])

    def __eq__(self, other):
        return isinstance(other, Intersection) and self.members == other.members

    def __repr__(self):
        return "Intersection(%r)" % (list(self.members),)


class Union:
    """Finite union; defining = max of members."""

    def __init__(self, members):
        members = tuple(members)
        if not members:
            raise ValueError("empty union")
        dims = {s.m for s in members}
        if len(dims) != 1:
            raise ValueError("mixed dimensions")
        self.members = members
        self.m = members[0].m

    def defining(self, jet, x=None):
        return max(s.defining(jet, x=x) for s in self.members)

    def defining_radial(self, x, u, du, hr, ht):
        vals = [s.defining_radial(x, u, du, hr, ht) for s in self.members]
        return np.maximum.reduce(vals)

    def contains(self, jet, x=None, tol=BOUNDARY_EPS):
        return self.defining(jet, x=x) >= -tol

    def dual(self):
        return Intersection([s.dual() for s in self.members])

    def __eq__(self, other):
        return isinstance(other, Union) and self.members == other.members

    def __repr__(self):
        return "Union(%r)" % (list(self.members),)


# ---------------------------------------------------------------------------
# Parsing "name:k=3,f=sinh(t)" strings (CLI and config files)

_ALIASES = {
    "laplace": ("sum_smallest", {}),
    "eikonal": ("eikonal", {}),
    "eikonal_dual": ("eikonal_dual", {}),
    "sum_smallest_k": ("sum_smallest", {}),
    "sum_smallest": ("sum_smallest", {}),
    "sum_largest_k": ("sum_largest", {}),
    "sum_largest": ("sum_largest", {}),
    "eigenvalue_k": ("eigenvalue_floor", {}),
    "eigenvalue_floor": ("eigenvalue_floor", {}),
    "garding": ("garding", {}),
    "pucci": ("pucci", {}),
    "quasilinear": ("quasilinear", {}),
    "p_laplace": ("quasilinear", {}),
    "infinity_laplacian": ("infinity_laplacian", {}),
    "value_below": ("value_below", {}),
    "gradient_profile": ("gradient_profile", {}),
}

_ALLOWED_KEYS = {
    "laplace": {"f"},
    "eikonal": set(),
    "eikonal_dual": set(),
    "sum_smallest_k": {"k", "f"},
    "sum_smallest": {"k", "f"},
    "sum_largest_k": {"k", "f"},
    "sum_largest": {"k", "f"},
    "eigenvalue_k": {"k", "f"},
    "eigenvalue_floor": {"k", "f"},
    "garding": {"k", "j", "f"},
    "pucci": {"lam", "Lam", "which", "f"},
    "quasilinear": {"a", "f", "normalized"},
    "p_laplace": {"q", "f", "normalized"},
    "infinity_laplacian": {"f"},
    "value_below": {"g"},
    "gradient_profile": {"xi", "side"},
}


def subeq_from_string(text, m):
    """Build a catalog entry from a compact string like
    'laplace', 'sum_smallest_k:k=3', 'pucci:lam=0.5,Lam=2,which=plus',
    'quasilinear:a=pow(t,1),f=sinh(t)'."""
    text = text.strip()
    name, _, paramtext = text.partition(":")
    name = name.strip().lower()
    if name not in _ALIASES:
        raise ValueError("unknown constraint name %r (known: %s)"
                         % (name, ", ".join(sorted(_ALIASES))))
    kind, defaults = _ALIASES[name]
    kv = dict(defaults)
    if paramtext:
        for part in split_top_level(paramtext):
            key, eq, val = part.partition("=")
            if not eq:
                raise ValueError("malformed parameter %r" % part)
            kv[key.strip()] = val.strip()
    allowed = _ALLOWED_KEYS[name]
    stray = sorted(set(kv) - allowed)
    if stray:
        raise ValueError("unknown parameter%s %s for %r (accepted: %s)"
                         % ("s" if len(stray) > 1 else "",
                            ", ".join(stray), name,
                            ", ".join(sorted(allowed)) or "none"))
    ints = {k: int(v) for k, v in kv.items() if k in ("k", "j")}
    floats = {k: float(v) for k, v in kv.items() if k in ("lam", "Lam")}
    exprs = {}
    for key in ("f", "xi", "a"):
        if key in kv:
            exprs[key] = parse_expr(kv[key], var="t")
    if "g" in kv:
        exprs["g"] = parse_expr(kv["g"], var="r")
    if kind == "sum_smallest":
        return Subequation.sum_smallest(m, ints.get("k", m), exprs.get("f"))
    if kind == "sum_largest":
        return Subequation.sum_largest(m, ints.get("k", m), exprs.get("f"))
    if kind == "eigenvalue_floor":
        return Subequation.eigenvalue_floor(m, ints.get("k", 1), exprs.get("f"))
    if kind == "garding":
        return Subequation.garding(m, ints.get("k", 2), ints.get("j", 1),
                                   exprs.get("f"))
    if kind == "pucci":
        return Subequation.pucci(m, floats.get("lam", 1.0),
                                 floats.get("Lam", 1.0),
                                 kv.get("which", "plus"), exprs.get("f"))
    if kind == "quasilinear":
        if name == "p_laplace":
            q = float(kv.get("q", 2.0))
            a = parse_expr("pow(t, %r)" % (q - 2.0), var="t")
        else:
            a = exprs.get("a", Num(1.0))
        return Subequation.quasilinear(m, a, exprs.get("f"),
                                       kv.get("normalized", "true").lower()
                                       in ("true", "1", "yes"))
    if kind == "infinity_laplacian":
        return Subequation.infinity_laplacian(m, exprs.get("f"))
    if kind == "eikonal":
        return Subequation.eikonal(m)
    if kind == "eikonal_dual":
        return Subequation.eikonal(m, dual=True)
    if kind == "value_below":
        if "g" not in exprs:
            raise ValueError("value_below needs g=<expr in r>")
        return Subequation.value_below(m, exprs["g"])
    if kind == "gradient_profile":
        if "xi" not in exprs:
            raise ValueError("gradient_profile needs xi=<expr in t>")
        return Subequation.gradient_profile(m, exprs["xi"],
                                            kv.get("side", "below"))
    raise AssertionError(kind)


# ---------------------------------------------------------------------------
# Duality verification

def default_catalog(m):
    """A representative slate covering every kind."""
    odd_f = parse_expr("sinh(t)", var="t")
    xi = parse_expr("t", var="t")
    entries = [
        Subequation.eikonal(m),
        Subequation.eikonal(m, dual=True),
        Subequation.gradient_profile(m, xi, side="below"),
        Subequation.laplace(m),
        Subequation.sum_smallest(m, max(1, m - 1), odd_f),
        Subequation.sum_largest(m, max(1, m - 1), odd_f),
        Subequation.eigenvalue_floor(m, 1),
        Subequation.eigenvalue_floor(m, m, odd_f),
        Subequation.pucci(m, 0.5, 2.0, "plus"),
        Subequation.pucci(m, 0.5, 2.0, "minus", odd_f),
        Subequation.quasilinear(m, parse_expr("1 + t^2", var="t"), odd_f),
        Subequation.infinity_laplacian(m, odd_f),
        Subequation.value_below(m, parse_expr("sinh(r)", var="r")),
    ]
    if m >= 2:
        entries.append(Subequation.garding(m, 2, 1))
        entries.append(Subequation.garding(m, 2, 2, odd_f))
    if m >= 3:
        entries.append(Subequation.garding(m, 3, 2))
    return entries


def _sample_jets(m, n, seed):
    rng = np.random.default_rng(seed)
    jets = []
    for _ in range(n):
        u = float(rng.normal())
        grad = rng.normal(size=m)
        B = rng.normal(size=(m, m))
        A = 0.5 * (B + B.T)
        jets.append(Jet(u, grad, A))
    return jets


def _sample_jet_arrays(m, n, seed):
    """Stacked generic jet sample: values (n,), grads (n,m), hesses (n,m,m).

    Gradients stay away from zero almost surely; the negation identity for
    the defining formula is a seam identity there (the sets still dualize,
    the formulas jump), so the closure branches are pinned by the scalar
    agreement test rather than sampled here."""
    rng = np.random.default_rng(seed)
    values = rng.normal(size=n)
    grads = rng.normal(size=(n, m))
    B = rng.normal(size=(n, m, m))
    hesses = 0.5 * (B + np.swapaxes(B, 1, 2))
    return values, grads, hesses


def _elementary_all(eigs):
    """E[:, j] = e_j(row) for j = 0..m, by the one-root-at-a-time recurrence."""
    n, m = eigs.shape
    E = np.zeros((n, m + 1))
    E[:, 0] = 1.0
    for i in range(m):
        E[:, 1:i + 2] += eigs[:, i:i + 1] * E[:, 0:i + 1]
    return E


def _garding_mu_batch(eigs, k):
    """Ascending branch values for every row of eigenvalues, batched."""
    n, m = eigs.shape
    E = _elementary_all(eigs)
    coeffs = np.empty((n, k + 1))         # ascending powers of t
    for j in range(k + 1):
        coeffs[:, j] = math.comb(m - k + j, j) * E[:, k - j]
    if k == 1:
        return -(coeffs[:, 0] / coeffs[:, 1])[:, None]
    lead = coeffs[:, k]
    comp = np.zeros((n, k, k))
    comp[:, np.arange(1, k), np.arange(k - 1)] = 1.0
    comp[:, 0, :] = -coeffs[:, k - 1::-1] / lead[:, None]
    roots = np.linalg.eigvals(comp)
    scale = np.maximum(1.0, np.max(np.abs(eigs), axis=1))
    imag = np.max(np.abs(roots.imag), axis=1)
    # repeated roots split into conjugate pairs by eps^(1/multiplicity)
    tol = max(GARDING_IMAG_TOL,
              100.0 * float(np.finfo(float).eps) ** (1.0 / k))
    if np.any(imag > tol * scale):
        raise ArithmeticError("branch roots not real in batch (residue %.3g)"
                              % float(np.max(imag / scale)))
    return np.sort(-roots.real, axis=1)


def defining_batch(entry, values, grads, hesses, eigs, xs):
    """Vectorized defining values over a stacked jet sample.

    eigs are the ascending hessian eigenvalues of every row; xs the base
    radii for point-dependent entries.  Mirrors `defining` formula for
    formula; the agreement test pins the two paths together.
    """
    if isinstance(entry, Intersection):
        vals = [defining_batch(s, values, grads, hesses, eigs, xs)
                for s in entry.members]
        return np.min(vals, axis=0)
    if isinstance(entry, Union):
        vals = [defining_batch(s, values, grads, hesses, eigs, xs)
                for s in entry.members]
        return np.max(vals, axis=0)
    k = entry.kind
    p = entry.params
    m = entry.m
    pn = np.linalg.norm(grads, axis=1)
    fv = _f_eval(p.get("f"), values) if "f" in p else 0.0
    if k == "eikonal":
        return 1.0 - pn
    if k == "eikonal_dual":
        return pn - 1.0
    if k == "gradient_profile":
        xi = p["xi"]
        if p["side"] == "below":
            return xi.evaluate(-values) - pn
        return pn - xi.evaluate(values)
    if k == "sum_smallest":
        return np.sum(eigs[:, :p["k"]], axis=1) - fv
    if k == "sum_largest":
        return np.sum(eigs[:, m - p["k"]:], axis=1) - fv
    if k == "eigenvalue_floor":
        return eigs[:, p["k"] - 1] - fv
    if k == "garding":
        mu = _garding_mu_batch(eigs, p["k"])
        return mu[:, p["j"] - 1] - fv
    if k == "pucci":
        pos = np.sum(np.maximum(eigs, 0.0), axis=1)
        neg = np.sum(np.minimum(eigs, 0.0), axis=1)
        if p["which"] == "plus":
            return p["Lam"] * pos + p["lam"] * neg - fv
        return p["lam"] * pos + p["Lam"] * neg - fv
    if k == "quasilinear":
        out = np.empty(values.shape)
        fva = np.broadcast_to(np.asarray(fv, dtype=float), values.shape)
        free = pn > 0.0
        th1c, th2c = entry._theta(_CLOSURE_T)
        ext = eigs[:, -1] if th1c >= th2c else eigs[:, 0]
        closure = th2c * np.sum(eigs, axis=1) + (th1c - th2c) * ext - fva
        out[~free] = closure[~free]
        if np.any(free):
            ph = grads[free] / pn[free][:, None]
            app = np.einsum("ni,nij,nj->n", ph, hesses[free], ph)
            tr = np.einsum("nii->n", hesses[free])
            th1, th2 = entry._theta(pn[free])
            out[free] = th1 * app + th2 * (tr - app) - fva[free]
        return out
    if k == "infinity_laplacian":
        out = np.empty(values.shape)
        fva = np.broadcast_to(np.asarray(fv, dtype=float), values.shape)
        free = pn > 0.0
        out[~free] = eigs[~free, -1] - fva[~free]
        if np.any(free):
            ph = grads[free] / pn[free][:, None]
            app = np.einsum("ni,nij,nj->n", ph, hesses[free], ph)
            out[free] = app - fva[free]
        return out
    if k == "value_below":
        return p["g"].evaluate(np.asarray(xs, dtype=float)) - values
    raise AssertionError(k)


def duality_suite(m, n_samples=200, seed=0, tol=1e-10):
    """Check the dual resolution of the whole catalog.

    For each entry F with resolved dual D the pointwise identity
    D.defining(J) = -F.defining(-J) is sampled on random jets (and random
    base radii for point-dependent entries); dual(dual(F)) must equal F
    structurally; intersections and unions must dualize by the min/max swap.
    Returns a report dict; report["ok"] is the overall verdict.
    """
    entries = default_catalog(m)
    values, grads, hesses = _sample_jet_arrays(m, n_samples, seed)
    rng = np.random.default_rng(seed + 1)
    xs = rng.uniform(0.2, 3.0, size=n_samples)
    eigs = np.linalg.eigvalsh(hesses)
    neigs = -eigs[:, ::-1]

    def residual(D, F):
        lhs = defining_batch(D, values, grads, hesses, eigs, xs)
        rhs = -defining_batch(F, -values, -grads, -hesses, neigs, xs)
        scale = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
        return float(np.max(np.abs(lhs - rhs) / scale))

    rows = []
    ok = True
    for F in entries:
        D = F.dual()
        resid = residual(D, F)
        involution = (D.dual() == F)
        row_ok = involution and resid <= tol
        ok = ok and row_ok
        rows.append({
            "entry": repr(F), "dual": repr(D),
            "negation_residual": resid, "involution": involution,
            "ok": row_ok,
        })
    # De Morgan on a pair of matrix-type entries
    F, G = Subequation.laplace(m), Subequation.eigenvalue_floor(m, 1)
    inter = Intersection([F, G])
    dm_struct = (inter.dual() == Union([F.dual(), G.dual()])
                 and Union([F, G]).dual() == Intersection([F.dual(), G.dual()]))
    dm_resid = residual(inter.dual(), inter)
    ok = ok and dm_struct and dm_resid <= tol
    return {
        "m": m, "samples": n_samples, "tol": tol, "entries": rows,
        "de_morgan_structural": dm_struct, "de_morgan_residual": dm_resid,
        "max_negation_residual": max(r["negation_residual"] for r in rows),
        "ok": ok,
    }


# ---------------------------------------------------------------------------
# Hessian-ray characteristic

def riesz_characteristic(subeq, tol=1e-6, cap=1e6):
    """sup{t > 0 : I - t * (projection on e_1) satisfies the constraint}.

    Only defined for constraints that see jets through the hessian alone;
    value or gradient dependence raises RieszDependenceError.  Monotone by
    positivity, so bisection is exact.  Returns inf when the whole ray to
    ``cap`` is admissible.
    """
    m = subeq.m
    ray = _ray_jet(m, 0.5)
    probes = [
        (0.0, np.zeros(m)),
        (-1.3, np.zeros(m)),
        (0.7, 0.4 * np.ones(m) / math.sqrt(m)),
        (0.0, -0.9 * np.eye(m)[0]),
    ]
    base = None
    for u, g in probes:
        val = subeq.defining(Jet(u, g, ray.hess), x=1.0)
        if base is None:
            base = val
        elif abs(val - base) > 1e-10 * max(1.0, abs(base)):
            raise RieszDependenceError(
                "constraint depends on value or gradient; "
                "hessian-ray characteristic undefined")
    def member(t):
        return subeq.contains(_ray_jet(m, t), x=1.0)
    if not member(0.0):
        return 0.0
    if member(cap):
        return math.inf
    lo, hi = 0.0, cap
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if member(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _ray_jet(m, t):
    A = np.eye(m)
    A[0, 0] = 1.0 - t
    return Jet(0.0, np.zeros(m), A)
