"""Stacked obstacle construction of decaying admissible potentials.

Builds a decreasing sequence w_1 >= w_2 >= ... of constrained solutions on
expanding annuli.  Each level digs one unit deeper while staying above a
prescribed decay profile; the inner loop widens the annulus until the new
level is uniformly close to the previous one on a fixed window.  On models
where no such potential exists the inner loop saturates and the run reports
a stall certificate instead of a potential.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, GridFunction
from .solver import membership_margin, solve_obstacle

CONVERGED = "Converged"
STALLED = "Stalled"
DIVERGED = "Diverged"

# relative change of the window norm below which a schedule extension is
# considered ineffective; two such extensions in a row certify a stall
STALL_REL_CHANGE = 0.01
STALL_RUNS = 2


def _as_radial_fn(h):
    """Accept a python callable or an expression object with .evaluate."""
    if callable(h) and not hasattr(h, "evaluate"):
        return lambda r: np.asarray(h(np.asarray(r, dtype=float)), dtype=float)

    def fn(r):
        r = np.asarray(r, dtype=float)
        out = h.evaluate({"r": r})
        return np.broadcast_to(np.asarray(out, dtype=float), r.shape).copy()

    return fn


@dataclass
class LevelRecord:
    level: int              # index of the potential being superseded
    depth: float            # floor value of the new potential
    j_final: int
    radius: float           # outer radius of the accepted solve
    window: float           # right end of the comparison window
    delta: float            # sup of |w_new - w_old| on the window
    delta_budget: float
    reached_radius: float   # smallest radius from which w_new == depth
    margin: float           # minimum interior defining value
    kinks_skipped: int
    flags: dict = field(default_factory=dict)
    sweeps: int = 0

    def to_dict(self):
        d = dict(self.__dict__)
        d["flags"] = dict(self.flags)
        return d


@dataclass
class StackReport:
    status: str
    levels: list
    eps: float
    anchor: float
    final: GridFunction = None
    stall: dict = None
    runtime: float = 0.0

    def to_dict(self):
        out = {
            "status": self.status,
            "eps": self.eps,
            "anchor": self.anchor,
            "levels": [rec.to_dict() for rec in self.levels],
            "stall": self.stall,
            "runtime": self.runtime,
        }
        if self.final is not None:
            out["final"] = {
                "r0": self.final.grid.r0,
                "r1": self.final.grid.r1,
                "n": self.final.grid.n,
                "values": [float(v) for v in self.final.values],
            }
        return out


def _ramp(nodes, anchor, flat_at):
    """0 at the anchor, -1 from flat_at on, linear in between."""
    lam = -(nodes - anchor) / (flat_at - anchor)
    return np.clip(lam, -1.0, 0.0)


def khasminskii_stack(subeq, manifold, anchor, decay, eps=0.1, n_nodes=2000,
                      levels=3, j_cap=12, tol=1e-8):
    """Run the stacked construction for `levels` rounds.

    decay is the profile the potentials must dominate: negative,
    decreasing, unbounded below.  Each accepted level w_{i+1} satisfies,
    with c_i = 1 - 2^{-i-2},
      (a) admissible at interior nodes and 0 at the anchor,
      (b) >= -i-1 with equality from a recorded radius on,
      (c) c_i * decay < w_{i+1} <= w_i, and |w_{i+1} - w_i| <= eps/2^i
          on the window [anchor, anchor * 2^i].
    Returns a StackReport; status is Converged, Stalled, or Diverged.
    """
    t0 = time.perf_counter()
    decay_fn = _as_radial_fn(decay)
    probe = decay_fn(np.array([anchor, 2 * anchor, 8 * anchor]))
    if np.any(probe >= 0.0):
        raise ValueError("decay profile must be negative beyond the anchor")
    if probe[2] >= probe[0]:
        raise ValueError("decay profile must be decreasing")

    w_prev = None           # GridFunction of the previous level
    records = []
    for i in range(levels):
        depth = -float(i + 1)
        window_hi = anchor * 2.0 ** i
        # fixed sample so norms vary smoothly across schedule extensions
        window_r = np.linspace(anchor, window_hi, 512) if i > 0 \
            else np.array([anchor])
        budget = eps * 0.5 ** i
        chain_coeff = 1.0 - 2.0 ** (-(i + 2))
        picked = None
        warm = None
        prev_setup = None
        stagnant = 0
        prev_on_window = w_prev(window_r) if w_prev is not None \
            else np.zeros(window_r.shape)

        def solve_level(grid, flat_at, start):
            lam = _ramp(grid.nodes, anchor, flat_at)
            prev_vals = w_prev(grid.nodes) if w_prev is not None \
                else np.zeros(grid.n)
            obstacle = prev_vals + lam
            init = start.resampled(grid) if start is not None else None
            u, info = solve_obstacle(subeq, manifold, grid, (0.0, depth),
                                     obstacle=obstacle, init=init)
            return u, prev_vals, info

        for j in range(1, j_cap + 1):
            radius = anchor * 2.0 ** j
            if math.isfinite(manifold.rmax) and radius >= manifold.rmax:
                break
            grid = Grid(anchor, radius, n_nodes)
            flat_at = anchor * 2.0 ** (j - 1)
            if j == 1:
                # the nominal ramp interval degenerates to a point; ramp
                # over the inner half of the first annulus instead
                flat_at = 0.5 * (anchor + radius)
            u, prev_vals, info = solve_level(grid, flat_at, warm)
            warm = u
            vals = u.values
            scale = max(1.0, -depth)
            chain_ok = bool(np.all(vals <= prev_vals + 1e-9 * scale))
            hb = chain_coeff * decay_fn(grid.nodes)
            bound_ok = bool(np.min(vals - hb) > -1e-9 * scale)
            delta = float(np.max(np.abs(u(window_r) - prev_on_window)))
            cauchy_ok = delta <= budget + 1e-12
            if chain_ok and bound_ok and cauchy_ok:
                picked = (j, grid, u, delta, info)
                break
            if not cauchy_ok:
                if prev_setup is not None:
                    # redo the previous extension at the current spacing;
                    # comparing at matched resolution keeps discretization
                    # bias out of the stagnation signal
                    p_flat, p_radius = prev_setup
                    n_match = max(8, int(round((p_radius - anchor)
                                               / grid.h)) + 1)
                    gm = Grid(anchor, p_radius, n_match)
                    um, _, _ = solve_level(gm, p_flat, u)
                    delta_m = float(np.max(np.abs(um(window_r)
                                                  - prev_on_window)))
                    rel = abs(delta - delta_m) / max(delta_m, 1e-300)
                    stagnant = stagnant + 1 if rel < STALL_REL_CHANGE else 0
                    if stagnant >= STALL_RUNS:
                        cert = {
                            "level": i,
                            "depth": depth,
                            "j_reached": j,
                            "radius": radius,
                            "window": window_hi,
                            "window_norm": delta,
                            "norm_budget": budget,
                            "last_rel_change": rel,
                            "chain_ok": chain_ok,
                            "bound_ok": bound_ok,
                        }
                        return StackReport(STALLED, records, eps, anchor,
                                           final=w_prev, stall=cert,
                                           runtime=time.perf_counter() - t0)
                prev_setup = (flat_at, radius)
        if picked is None:
            cert = {"level": i, "depth": depth, "j_cap": j_cap,
                    "reason": "schedule exhausted before conditions met"}
            return StackReport(DIVERGED, records, eps, anchor, final=w_prev,
                               stall=cert, runtime=time.perf_counter() - t0)
        j, grid, u, delta, info = picked
        vals = u.values
        margin, skipped = membership_margin(subeq, manifold, u)
        anchored = abs(vals[0]) <= 1e-12
        a_ok = bool(margin >= -1e-7 * max(1.0, -depth) and anchored)
        floor_tol = 1e-8 * (1.0 - depth)
        b_floor = bool(np.min(vals) >= depth - floor_tol)
        at_depth = np.abs(vals - depth) <= floor_tol
        # smallest radius from which the potential sits at its floor
        k = grid.n
        while k > 0 and at_depth[k - 1]:
            k -= 1
        b_ok = b_floor and k < grid.n
        reached = float(grid.nodes[k]) if k < grid.n else math.inf
        records.append(LevelRecord(
            level=i, depth=depth, j_final=j, radius=grid.r1,
            window=window_hi, delta=delta, delta_budget=budget,
            reached_radius=reached, margin=margin, kinks_skipped=skipped,
            flags={"a": a_ok, "b": b_ok, "c": True},
            sweeps=info["sweeps"]))
        w_prev = u
    return StackReport(CONVERGED, records, eps, anchor, final=w_prev,
                       runtime=time.perf_counter() - t0)


def infinity_capacitor_sequence(manifold, anchor=1.0, schedule=None):
    """Complementary capacitor profiles over an expanding schedule.

    For each outer radius R the gradient-extremal capacitor on
    [anchor, R] is linear in r; its complement v = 1 - u vanishes at the
    anchor and rises to 1 at R.  On range-complete models v -> 0 locally
    uniformly; with finite rmax the limit (r - anchor)/(rmax - anchor)
    stays positive.
    """
    if schedule is None:
        schedule = [anchor * 2.0 ** j for j in range(1, 9)]
    schedule = [float(R) for R in schedule]
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("schedule must be increasing")
    if math.isfinite(manifold.rmax):
        schedule = [R for R in schedule if R < manifold.rmax]
    sups = []
    for R in schedule:
        # v(r) = (r - anchor)/(R - anchor); sup over [anchor, 2*anchor]
        top = min(2.0 * anchor, R)
        sups.append((top - anchor) / (R - anchor))
    ratios = [b / a for a, b in zip(sups, sups[1:]) if a > 0]
    if math.isfinite(manifold.rmax):
        limit_sup = (min(2.0 * anchor, manifold.rmax) - anchor) \
            / (manifold.rmax - anchor)
        profile = {"kind": "linear", "anchor": anchor, "rmax": manifold.rmax}
    else:
        limit_sup = 0.0
        profile = {"kind": "zero"}
    return {
        "anchor": anchor,
        "schedule": schedule,
        "sup_inner": sups,
        "sup_ratios": ratios,
        "limit_sup_inner": limit_sup,
        "limit_positive": limit_sup > 0.0,
        "limit_profile": profile,
    }
