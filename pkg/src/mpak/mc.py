"""Monte Carlo check of the radial diffusion against the analytic verdicts.

The radial part of Brownian motion on a model manifold solves
dr = (m-1) (g'/g)(r) dt + sqrt(2) dW.  Paths are advanced by Euler-Maruyama
with a reflecting floor near the pole; a path counts as exploded when it
leaves through the escape radius before the time horizon with an outward
drift at exit that dominates the per-step noise scale (or with drift
overflow, which is flagged separately).  Streams are counter-based per path
(Philox keyed by seed, counter carrying the global path index), so results
are independent of chunking and thread scheduling.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.stats import beta

__all__ = ["MCResult", "simulate_radial_diffusion"]

CHUNK = 512

EXPLOSIVE = "Explosive"
NON_EXPLOSIVE = "NonExplosive"
UNCERTAIN = "Uncertain"


class MCResult:
    __slots__ = ("n_paths", "n_exploded", "fraction", "ci_low", "ci_high",
                 "classification", "drift_overflows", "mean_exit_time",
                 "params")

    def __init__(self, n_paths, n_exploded, ci_low, ci_high, classification,
                 drift_overflows, mean_exit_time, params):
        self.n_paths = n_paths
        self.n_exploded = n_exploded
        self.fraction = n_exploded / n_paths if n_paths else 0.0
        self.ci_low = ci_low
        self.ci_high = ci_high
        self.classification = classification
        self.drift_overflows = drift_overflows
        self.mean_exit_time = mean_exit_time
        self.params = params

    def to_dict(self):
        d = {"n_paths": self.n_paths, "n_exploded": self.n_exploded,
             "fraction": self.fraction,
             "ci95": [self.ci_low, self.ci_high],
             "classification": self.classification,
             "drift_overflows": self.drift_overflows,
             "mean_exit_time": self.mean_exit_time}
        d.update(self.params)
        return d

    def __repr__(self):
        return ("MCResult(%s, %d/%d exploded, ci95=[%.4g, %.4g])"
                % (self.classification, self.n_exploded, self.n_paths,
                   self.ci_low, self.ci_high))


def _clopper_pearson(k, n, alpha=0.05):
    lo = 0.0 if k == 0 else float(beta.ppf(alpha / 2.0, k, n - k + 1))
    hi = 1.0 if k == n else float(beta.ppf(1.0 - alpha / 2.0, k + 1, n - k))
    return lo, hi


def _run_chunk(manifold, path_ids, seed, r_start, n_steps, dt, r_floor,
               r_explode):
    """Advance one chunk of paths; returns (exploded count, overflow count,
    sum of exit times over exploded paths)."""
    npaths = path_ids.size
    key = [int(seed) & ((1 << 64) - 1), 0]
    noise = np.empty((npaths, n_steps)) if n_steps else np.empty((npaths, 0))
    for row, p in enumerate(path_ids):
        bg = np.random.Philox(counter=[0, 0, int(p), 0], key=key)
        noise[row] = np.random.Generator(bg).standard_normal(n_steps)
    r = np.full(npaths, float(r_start))
    alive = np.ones(npaths, dtype=bool)
    exploded = np.zeros(npaths, dtype=bool)
    overflow = np.zeros(npaths, dtype=bool)
    exit_time = np.zeros(npaths)
    sq2dt = math.sqrt(2.0 * dt)
    drift_gate = math.sqrt(2.0 / dt)
    mm1 = manifold.m - 1
    for i in range(n_steps):
        if not np.any(alive):
            break
        idx = np.nonzero(alive)[0]
        ra = r[idx]
        with np.errstate(all="ignore"):
            drift = mm1 * manifold.gg_ratio(ra)
        bad = ~np.isfinite(drift)
        if np.any(bad):
            gone = idx[bad]
            exploded[gone] = True
            overflow[gone] = True
            exit_time[gone] = i * dt
            alive[gone] = False
            idx = idx[~bad]
            ra = ra[~bad]
            drift = drift[~bad]
            if idx.size == 0:
                continue
        ra = ra + drift * dt + sq2dt * noise[idx, i]
        ra = r_floor + np.abs(ra - r_floor)
        r[idx] = ra
        out = ~np.isfinite(ra) | (ra >= r_explode)
        if np.any(out):
            gone = idx[out]
            rg = r[gone]
            nonfinite = ~np.isfinite(rg)
            with np.errstate(all="ignore"):
                exit_drift = mm1 * manifold.gg_ratio(
                    np.where(nonfinite, r_explode, rg))
            certified = nonfinite | ~np.isfinite(exit_drift) \
                | (exit_drift >= drift_gate)
            overflow[gone] |= nonfinite | ~np.isfinite(exit_drift)
            exploded[gone] = certified
            exit_time[gone] = (i + 1) * dt
            alive[gone] = False
    k = int(np.count_nonzero(exploded))
    ov = int(np.count_nonzero(overflow))
    tsum = float(np.sum(exit_time[exploded]))
    return k, ov, tsum


def simulate_radial_diffusion(manifold, r_start=1.0, T=5.0, n_paths=1000,
                              dt=1e-3, seed=0, r_floor=1e-4, r_explode=None):
    """Simulate the radial diffusion and classify explosion.

    Classification: Explosive when the 95 percent Clopper-Pearson lower
    bound on the explosion probability is positive, NonExplosive when the
    upper bound is below 1 percent, Uncertain otherwise.  T = 0 runs no
    steps and reports an exact zero fraction.
    """
    if n_paths < 1:
        raise ValueError("need at least one path")
    if dt <= 0:
        raise ValueError("dt must be positive")
    if r_explode is None:
        r_explode = max(1e3, 10.0 * r_start)
    n_steps = int(round(T / dt))
    ids = np.arange(n_paths)
    chunks = [ids[i:i + CHUNK] for i in range(0, n_paths, CHUNK)]
    workers = int(os.environ.get("MPAK_THREADS", "1"))

    def work(chunk_ids):
        return _run_chunk(manifold, chunk_ids, seed, r_start, n_steps, dt,
                          r_floor, r_explode)

    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, chunks))
    else:
        results = [work(c) for c in chunks]
    k = sum(r[0] for r in results)
    ov = sum(r[1] for r in results)
    tsum = sum(r[2] for r in results)
    lo, hi = _clopper_pearson(k, n_paths)
    if lo > 0.0:
        cls = EXPLOSIVE
    elif hi < 0.01:
        cls = NON_EXPLOSIVE
    else:
        cls = UNCERTAIN
    return MCResult(
        n_paths, k, lo, hi, cls, ov,
        tsum / k if k else math.nan,
        {"r_start": r_start, "T": T, "dt": dt, "seed": seed,
         "r_floor": r_floor, "r_explode": r_explode,
         "manifold": manifold.label},
    )
