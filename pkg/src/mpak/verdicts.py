"""Three-valued verdicts with attached evidence.

Numerical classifiers either certify a property (Holds), certify its failure
(Fails), or refuse (Inconclusive).  Refusal is an honest outcome, never an
error; every verdict carries the numbers that produced it.
"""

HOLDS = "Holds"
FAILS = "Fails"
INCONCLUSIVE = "Inconclusive"


class Verdict:
    __slots__ = ("status", "reason", "evidence")

    def __init__(self, status, reason, **evidence):
        if status not in (HOLDS, FAILS, INCONCLUSIVE):
            raise ValueError("bad verdict status %r" % status)
        self.status = status
        self.reason = reason
        self.evidence = evidence

    @classmethod
    def holds(cls, reason, **evidence):
        return cls(HOLDS, reason, **evidence)

    @classmethod
    def fails(cls, reason, **evidence):
        return cls(FAILS, reason, **evidence)

    @classmethod
    def inconclusive(cls, reason, **evidence):
        return cls(INCONCLUSIVE, reason, **evidence)

    def __bool__(self):
        raise TypeError("a Verdict is three-valued; compare .status explicitly")

    def __eq__(self, other):
        if isinstance(other, str):
            return self.status == other
        return (isinstance(other, Verdict) and self.status == other.status
                and self.reason == other.reason)

    def __repr__(self):
        return "Verdict(%s: %s)" % (self.status, self.reason)

    def to_dict(self):
        return {"status": self.status, "reason": self.reason,
                "evidence": self.evidence}


def certify_divergence(log_points, horizons, require_tail=3,
                       divergent_slope=-1.05, convergent_slope=-1.2,
                       spread=0.75):
    """Classify an improper integral from log-integrand samples at geometric
    horizons.

    ``log_points[k]`` is log phi(horizons[k]).  Successive log-log slopes
    s_k = d log phi / d log r are compared on the last ``require_tail``
    windows: all >= divergent_slope certifies divergence (a 1/r tail, slope
    exactly -1, must land on the divergent side); all <= convergent_slope
    certifies convergence; a slope spread above ``spread`` means the tail is
    not power-like and the ladder refuses.  -inf log values (integrand
    underflow to zero) certify convergence outright.
    """
    import numpy as np
    log_points = np.asarray(log_points, dtype=float)
    horizons = np.asarray(horizons, dtype=float)
    if np.any(np.isneginf(log_points)):
        return Verdict.fails("integrand underflows to zero at the horizon",
                             horizons=list(horizons))
    slopes = np.diff(log_points) / np.diff(np.log(horizons))
    tail = slopes[-require_tail:]
    ev = {"horizons": [float(h) for h in horizons],
          "slopes": [float(s) for s in slopes],
          "tail_window": int(require_tail)}
    if len(tail) < require_tail or not np.all(np.isfinite(tail)):
        return Verdict.inconclusive("not enough finite slope samples", **ev)
    # steeper-than-(-1.2) everywhere certifies convergence even when the
    # tail is not power-like (e.g. super-exponential decay)
    if np.all(tail <= convergent_slope):
        return Verdict.fails("tail slopes %s stay below %g"
                             % ([round(float(s), 3) for s in tail],
                                convergent_slope), **ev)
    if float(np.max(tail) - np.min(tail)) > spread:
        return Verdict.inconclusive("tail is not power-like "
                                    "(slope spread %.3g)" %
                                    float(np.max(tail) - np.min(tail)), **ev)
    if np.all(tail >= divergent_slope):
        return Verdict.holds("tail slopes %s stay above %g"
                             % ([round(float(s), 3) for s in tail],
                                divergent_slope), **ev)
    return Verdict.inconclusive("tail slopes straddle the decision band", **ev)
