"""Command line front end.

One verb per concept: classify, capacity, potential, solve, stack,
simulate, jets.  Results are JSON (schema "mpak/1", floats at 17
significant digits), grids go to CSV with an `r,u` header, and every file
output gets a manifest written beside it so runs can be replayed
byte-for-byte.  Exit codes: 0 ok, 1 verdict disagrees with --expect,
2 usage, 3 numerical diagnostic.
"""

import argparse
import hashlib
import math
import os
import sys
import time
import json

import numpy as np

from . import __version__
from .expr import parse_expr, ExprError, ExprDomainError
from .grid import Grid, GridFunction
from .jets import Jet, garding_branches, pucci_extremal
from .manifold import manifold_from_string
from .mc import simulate_radial_diffusion
from .potential import (q_capacity, infinity_capacity, capacitor_profile,
                        infinity_capacitor_profile, evans_potential,
                        polar_potential, parabolicity,
                        infinity_parabolicity, eikonal_parabolicity,
                        geodesic_completeness, stochastic_completeness,
                        diffusion_witness, omori_yau_radial_check,
                        negative_exhaustion_hessian_check)
from .solver import solve_obstacle, membership_margin, SolverError
from .stack import khasminskii_stack
from .subeq import (subeq_from_string, duality_suite, riesz_characteristic,
                    RieszDependenceError)
from .verdicts import Verdict, HOLDS, FAILS, INCONCLUSIVE

SCHEMA = "mpak/1"
FLOAT_FMT = ".17g"


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Deterministic serialization

def format_float(x):
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, FLOAT_FMT)


def _jval(x):
    if x is None:
        return "null"
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format_float(float(x))
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, np.ndarray):
        x = x.tolist()
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_jval(v) for v in x) + "]"
    if isinstance(x, dict):
        return "{" + ", ".join("%s: %s" % (json.dumps(str(k)), _jval(v))
                               for k, v in x.items()) + "}"
    if hasattr(x, "to_dict"):
        return _jval(x.to_dict())
    raise TypeError("cannot serialize %r" % type(x))


def jdumps(payload):
    """Deterministic JSON text: insertion-ordered keys, fixed float format."""
    return _jval(payload) + "\n"


def atomic_write(path, data):
    tmp = "%s.tmp.%d" % (path, os.getpid())
    with open(tmp, "w", newline="\n") as fh:
        fh.write(data)
    os.replace(tmp, path)


def csv_text(nodes, values):
    lines = ["r,u"]
    for r, u in zip(nodes, values):
        lines.append("%s,%s" % (format(float(r), FLOAT_FMT),
                                format_float(float(u)).strip('"')))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Small helpers

def _pair(text, what):
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError("%s needs two comma-separated numbers, got %r"
                         % (what, text))
    return float(parts[0]), float(parts[1])


def _expr_radial(src):
    return parse_expr(src, var="r")


def _sym_from_seed(m, seed):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((m, m))
    return 0.5 * (B + B.T)


def _matrix_from_args(args):
    if args.eigs:
        eigs = [float(v) for v in args.eigs.split(",")]
        if len(eigs) != args.m:
            raise UsageError("--eigs needs m=%d values" % args.m)
        return np.diag(eigs)
    return _sym_from_seed(args.m, args.seed)


def _verdict_payload(v):
    return v.to_dict()


# ---------------------------------------------------------------------------
# Subcommand handlers.  Each returns (payload, primary_verdict, csv_grid)
# where csv_grid is None or (nodes, values).

def _cmd_classify(args):
    man = manifold_from_string(args.manifold)
    battery = {
        "parabolic": lambda: parabolicity(man, q=args.q),
        "infinity_parabolic": lambda: infinity_parabolicity(man, r0=args.r_start),
        "eikonal": lambda: eikonal_parabolicity(man, r0=args.r_start),
        "stochastic": lambda: stochastic_completeness(
            man, r_start=args.r_start, r_cap=args.r_cap),
        "geodesic": lambda: geodesic_completeness(man),
    }
    payload = {"schema": SCHEMA, "command": "classify",
               "manifold": args.manifold, "q": args.q}
    primary = None
    if args.prop:
        v = battery[args.prop]()
        payload[args.prop] = v.status
        payload["detail"] = {args.prop: _verdict_payload(v)}
        primary = v
    else:
        detail = {}
        for name, fn in battery.items():
            v = fn()
            payload[name] = v.status
            detail[name] = _verdict_payload(v)
        payload["detail"] = detail
    return payload, primary, None


def _cmd_capacity(args):
    man = manifold_from_string(args.manifold)
    payload = {"schema": SCHEMA, "command": "capacity",
               "manifold": args.manifold, "r0": args.r0}
    grid_out = None
    if args.infinity:
        payload["q"] = "infinity"
        if args.r1 is None:
            cap = infinity_capacity(man, args.r0)
            payload["r1"] = None
            payload["capacity"] = cap
        else:
            u, info = infinity_capacitor_profile(args.r0, args.r1, n=args.n)
            payload["r1"] = args.r1
            payload["capacity"] = info["capacity"]
            grid_out = (u.grid.nodes, u.values)
    else:
        if args.r1 is None:
            raise UsageError("capacity with finite exponent needs --r1")
        payload["q"] = args.q
        payload["r1"] = args.r1
        payload["capacity"] = q_capacity(man, args.r0, args.r1, args.q)
        payload["capacity_no_constant"] = q_capacity(
            man, args.r0, args.r1, args.q, with_constant=False)
        if args.csv:
            u, info = capacitor_profile(man, args.r0, args.r1, args.q,
                                        n=args.n)
            payload["profile_capacity"] = info["capacity"]
            grid_out = (u.grid.nodes, u.values)
    return payload, None, grid_out


def _cmd_potential(args):
    payload = {"schema": SCHEMA, "command": "potential " + args.which}
    primary = None
    grid_out = None
    if args.which == "evans":
        man = manifold_from_string(args.manifold)
        if args.r1 is None:
            raise UsageError("potential evans needs --r1")
        w, info = evans_potential(man, args.r0, args.r1, n=args.n)
        payload.update({
            "manifold": args.manifold, "r0": args.r0, "r1": args.r1,
            "n": args.n,
            "value_range": [float(w.values[0]), float(w.values[-1])],
            "flux_deviation": float(np.max(np.abs(info["flux"] - 1.0))),
        })
        grid_out = (w.grid.nodes, w.values)
    elif args.which == "khasminskii":
        man = manifold_from_string(args.manifold)
        if not args.w:
            raise UsageError("potential khasminskii needs --w <expr in r>")
        window = _pair(args.window, "--window") if args.window \
            else (1e-2, 40.0)
        v = negative_exhaustion_hessian_check(man, args.w, window=window,
                                              n=args.n)
        payload.update({"manifold": args.manifold, "witness": args.w,
                        "window": list(window),
                        "verdict": _verdict_payload(v)})
        primary = v
    elif args.which == "eikonal":
        man = manifold_from_string(args.manifold)
        v = eikonal_parabolicity(man, r0=args.r0)
        inf_w = (-math.inf if math.isinf(man.rmax)
                 else -(man.rmax - args.r0))
        payload.update({"manifold": args.manifold, "r0": args.r0,
                        "witness": "-(r - %s)" % format(args.r0, "g"),
                        "witness_inf": inf_w,
                        "verdict": _verdict_payload(v)})
        primary = v
    elif args.which == "polar":
        p = args.p
        if p < 2:
            raise UsageError("polar potentials need p >= 2")
        if p != int(p):
            raise UsageError("the pole certificate needs integer p")
        p = int(p)
        from .manifold import ModelManifold
        man = ModelManifold.euclidean(args.m)
        grid = Grid(args.r0, args.r1, args.n)
        psi = polar_potential(man, p, grid)
        rs = np.geomspace(args.r0, args.r1, 64)
        # tangential eigenvalue is u'/r; radial is (1-p) times it for both
        # branches, so the degree-p sum cancels exactly
        if p == 2:
            du = 1.0 / rs
        else:
            du = (p - 2.0) * rs ** (1.0 - p)
        tang = du / rs
        d2u = (1.0 - p) * tang
        eigs = np.concatenate([d2u[:, None],
                               np.repeat(tang[:, None], args.m - 1, axis=1)],
                              axis=1)
        eigs.sort(axis=1)
        defect = float(np.max(np.abs(np.sum(eigs[:, :p], axis=1))))
        if defect <= 1e-10:
            v = Verdict.holds("sum of the %d smallest hessian eigenvalues "
                              "vanishes along the sample radii" % p,
                              defect=defect)
        else:
            v = Verdict.fails("pole certificate defect %.3g" % defect,
                              defect=defect)
        payload.update({"p": p, "m": args.m, "r0": args.r0, "r1": args.r1,
                        "defect": defect,
                        "pole_limit": "-inf",
                        "verdict": _verdict_payload(v)})
        primary = v
        grid_out = (grid.nodes, psi.values)
    elif args.which == "omori-yau-check":
        man = manifold_from_string(args.manifold)
        if not (args.w and args.control):
            raise UsageError("omori-yau-check needs --w and --control")
        window = _pair(args.window, "--window") if args.window \
            else (1.0, 1e3)
        variant = {"laplacian": "laplacian",
                   "hessian-max": "hessian_max"}[args.variant]
        v = omori_yau_radial_check(man, args.w, args.control,
                                   variant=variant, window=window, n=args.n)
        payload.update({"manifold": args.manifold, "witness": args.w,
                        "control": args.control, "variant": args.variant,
                        "window": list(window),
                        "verdict": _verdict_payload(v)})
        primary = v
    return payload, primary, grid_out


def _cmd_solve(args):
    man = manifold_from_string(args.manifold)
    r0, r1 = _pair(args.domain, "--domain")
    b0, b1 = _pair(args.bc, "--bc")
    sub = subeq_from_string(args.subeq, man.m)
    grid = Grid(r0, r1, args.n)
    obstacle = None
    if args.obstacle:
        obs_expr = _expr_radial(args.obstacle)
        obstacle = np.asarray(obs_expr.evaluate(grid.nodes), dtype=float)
    u, info = solve_obstacle(sub, man, grid, (b0, b1), obstacle=obstacle,
                             tol=args.tol)
    payload = {
        "schema": SCHEMA, "command": "solve",
        "subeq": args.subeq, "manifold": args.manifold,
        "grid": {"r0": r0, "r1": r1, "n": args.n},
        "boundary": [b0, b1],
        "obstacle": args.obstacle,
        "result": {
            "values": [float(v) for v in u.values],
            "residual": float(info["residual"]),
            "sweeps": int(info["sweeps"]),
            "status": "solved",
            "method": info.get("method", "projected_relaxation"),
        },
    }
    return payload, None, (grid.nodes, u.values)


def _cmd_stack(args):
    man = manifold_from_string(args.manifold)
    sub = subeq_from_string(args.subeq, man.m)
    decay_expr = _expr_radial(args.decay)
    def decay(r):
        return decay_expr.evaluate(np.asarray(r, dtype=float))
    report = khasminskii_stack(sub, man, args.anchor, decay, eps=args.eps,
                               n_nodes=args.n, levels=args.levels,
                               j_cap=args.j_cap)
    rd = report.to_dict()
    rd.pop("runtime", None)        # byte-stable output; timing -> manifest
    payload = {"schema": SCHEMA, "command": "stack",
               "subeq": args.subeq, "manifold": args.manifold,
               "decay": args.decay, "report": rd}
    grid_out = None
    if report.final is not None:
        grid_out = (report.final.grid.nodes, report.final.values)
    return payload, None, grid_out


def _cmd_simulate(args):
    man = manifold_from_string(args.manifold)
    res = simulate_radial_diffusion(man, r_start=args.r_start, T=args.T,
                                    n_paths=args.n_paths, dt=args.dt,
                                    seed=args.seed,
                                    r_explode=args.r_explode)
    payload = {"schema": SCHEMA, "command": "simulate",
               "manifold": args.manifold, "mc": res.to_dict()}
    primary = None
    if args.witness:
        v = diffusion_witness(man, r_start=args.r_start)
        payload["witness_verdict"] = _verdict_payload(v)
        primary = v
    return payload, primary, None


def _cmd_jets(args):
    payload = {"schema": SCHEMA, "command": "jets " + args.which}
    primary = None
    if args.which == "dual":
        sub = subeq_from_string(args.subeq, args.m)
        D = sub.dual()
        rng = np.random.default_rng(args.seed)
        resid = 0.0
        for _ in range(256):
            J = Jet(float(rng.normal()), rng.normal(size=args.m),
                    _sym_from_seed(args.m, int(rng.integers(1 << 31))))
            x = float(rng.uniform(0.2, 3.0))
            lhs = D.defining(J, x=x)
            rhs = -sub.defining(J.negated(), x=x)
            resid = max(resid, abs(lhs - rhs) / max(1.0, abs(lhs), abs(rhs)))
        payload.update({"entry": repr(sub), "dual": repr(D),
                        "negation_residual": resid,
                        "involution": bool(D.dual() == sub)})
    elif args.which == "riesz":
        sub = subeq_from_string(args.subeq, args.m)
        val = riesz_characteristic(sub, tol=args.tol)
        payload.update({"subeq": args.subeq, "m": args.m,
                        "riesz_characteristic": val})
    elif args.which == "garding":
        A = _matrix_from_args(args)
        branches = garding_branches(A, args.k)
        if not 1 <= args.j <= args.k:
            raise UsageError("branch index --j must lie in 1..k")
        payload.update({"m": args.m, "k": args.k, "j": args.j,
                        "branches": [float(b) for b in branches],
                        "branch_j": float(branches[args.j - 1])})
    elif args.which == "pucci":
        A = _matrix_from_args(args)
        val = pucci_extremal(A, args.lam, args.Lam, args.pucci_which)
        payload.update({"m": args.m, "lam": args.lam, "Lam": args.Lam,
                        "which": args.pucci_which, "value": float(val)})
    elif args.which == "duality-suite":
        report = duality_suite(args.m, n_samples=args.samples,
                               seed=args.seed, tol=args.tol)
        payload.update(report)
        primary = (Verdict.holds("catalog duality verified",
                                 max_residual=report["max_negation_residual"])
                   if report["ok"] else
                   Verdict.fails("duality residuals above tolerance",
                                 max_residual=report["max_negation_residual"]))
        payload["verdict"] = _verdict_payload(primary)
    elif args.which == "monotonicity":
        sub = subeq_from_string(args.subeq, args.m)
        rng = np.random.default_rng(args.seed)
        violations = 0
        worst = 0.0
        for _ in range(args.samples):
            J = Jet(float(rng.normal()), rng.normal(size=args.m),
                    _sym_from_seed(args.m, int(rng.integers(1 << 31))))
            x = float(rng.uniform(0.2, 3.0))
            base = sub.defining(J, x=x)
            B = rng.standard_normal((args.m, args.m))
            P = B @ B.T * float(rng.uniform(0.0, 1.0))
            up = sub.defining(Jet(J.value, J.grad, J.hess + P), x=x)
            down = sub.defining(Jet(J.value - float(rng.uniform(0.0, 2.0)),
                                    J.grad, J.hess), x=x)
            tol = 1e-9 * max(1.0, abs(base))
            gap = min(up - base, down - base)
            worst = min(worst, gap)
            if gap < -tol:
                violations += 1
        primary = (Verdict.holds("degenerate-elliptic and proper on %d "
                                 "sampled jets" % args.samples,
                                 worst_gap=worst)
                   if violations == 0 else
                   Verdict.fails("%d monotonicity violations" % violations,
                                 worst_gap=worst))
        payload.update({"subeq": args.subeq, "m": args.m,
                        "samples": args.samples, "violations": violations,
                        "worst_gap": worst,
                        "verdict": _verdict_payload(primary)})
    return payload, primary, None


# ---------------------------------------------------------------------------
# Parser

def _parser():
    p = argparse.ArgumentParser(
        prog="mpak",
        description="potential theory for nonlinear constraints on "
                    "radial model manifolds")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp, verdicted=True):
        sp.add_argument("-o", "--output", help="write JSON here (else stdout)")
        sp.add_argument("--csv", help="write grid output as CSV r,u")
        if verdicted:
            sp.add_argument("--expect", choices=["holds", "fails"],
                            help="exit 1 when the verdict disagrees")

    sp = sub.add_parser("classify", help="run the completeness classifiers")
    sp.add_argument("--manifold", required=True)
    sp.add_argument("--q", type=float, default=2.0)
    sp.add_argument("--property", dest="prop",
                    choices=["parabolic", "infinity_parabolic", "eikonal",
                             "stochastic", "geodesic"])
    sp.add_argument("--r-start", type=float, default=1.0)
    sp.add_argument("--r-cap", type=float, default=80.0)
    common(sp)
    sp.set_defaults(fn=_cmd_classify)

    sp = sub.add_parser("capacity", help="shell capacities")
    sp.add_argument("--manifold", required=True)
    sp.add_argument("--r0", type=float, default=1.0)
    sp.add_argument("--r1", type=float)
    sp.add_argument("--q", type=float, default=2.0)
    sp.add_argument("--infinity", action="store_true",
                    help="limit exponent instead of --q")
    sp.add_argument("--n", type=int, default=400)
    common(sp, verdicted=False)
    sp.set_defaults(fn=_cmd_capacity)

    sp = sub.add_parser("potential", help="named potentials and checks")
    sp.add_argument("which", choices=["evans", "khasminskii", "eikonal",
                                      "polar", "omori-yau-check"])
    sp.add_argument("--manifold")
    sp.add_argument("--r0", type=float, default=1.0)
    sp.add_argument("--r1", type=float)
    sp.add_argument("--n", type=int, default=400)
    sp.add_argument("--w", help="witness expression in r")
    sp.add_argument("--control", help="control expression in t")
    sp.add_argument("--variant", choices=["laplacian", "hessian-max"],
                    default="laplacian")
    sp.add_argument("--window")
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--m", type=int, default=2)
    common(sp)
    sp.set_defaults(fn=_cmd_potential)

    sp = sub.add_parser("solve", help="Dirichlet/obstacle problem")
    sp.add_argument("--subeq", required=True)
    sp.add_argument("--manifold", required=True)
    sp.add_argument("--domain", required=True, help="r0,r1")
    sp.add_argument("--bc", required=True, help="b0,b1")
    sp.add_argument("--n", type=int, default=200)
    sp.add_argument("--obstacle", help="upper obstacle expression in r")
    sp.add_argument("--tol", type=float, default=1e-8)
    common(sp, verdicted=False)
    sp.set_defaults(fn=_cmd_solve)

    sp = sub.add_parser("stack", help="stacked decaying-potential run")
    sp.add_argument("--subeq", required=True)
    sp.add_argument("--manifold", required=True)
    sp.add_argument("--anchor", type=float, default=1.0)
    sp.add_argument("--decay", default="-log(1+r)",
                    help="profile to dominate, expression in r")
    sp.add_argument("--eps", type=float, default=0.1)
    sp.add_argument("--n", type=int, default=2000)
    sp.add_argument("--levels", type=int, default=3)
    sp.add_argument("--j-cap", type=int, default=12)
    common(sp, verdicted=False)
    sp.set_defaults(fn=_cmd_stack)

    sp = sub.add_parser("simulate", help="radial diffusion Monte Carlo")
    sp.add_argument("--manifold", required=True)
    sp.add_argument("--r-start", type=float, default=1.0)
    sp.add_argument("--T", type=float, default=5.0)
    sp.add_argument("--n-paths", type=int, default=1000)
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--r-explode", type=float)
    sp.add_argument("--witness", action="store_true",
                    help="also run the bounded-witness criterion")
    common(sp)
    sp.set_defaults(fn=_cmd_simulate)

    sp = sub.add_parser("jets", help="jet-level algebra checks")
    sp.add_argument("which", choices=["dual", "riesz", "garding", "pucci",
                                      "duality-suite", "monotonicity"])
    sp.add_argument("--subeq")
    sp.add_argument("--m", type=int, default=3)
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--j", type=int, default=1)
    sp.add_argument("--lam", type=float, default=1.0)
    sp.add_argument("--Lam", type=float, default=1.0)
    sp.add_argument("--which-pucci", dest="pucci_which",
                    choices=["plus", "minus"], default="plus")
    sp.add_argument("--eigs", help="comma list, bypasses the random matrix")
    sp.add_argument("--samples", type=int, default=10000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tol", type=float, default=1e-9)
    common(sp)
    sp.set_defaults(fn=_cmd_jets)
    return p


NEEDS_SUBEQ = {"dual", "riesz", "monotonicity"}


def _resolved_inputs(args):
    skip = {"fn", "cmd", "output", "csv", "expect"}
    out = {}
    for key in sorted(vars(args)):
        if key in skip:
            continue
        val = getattr(args, key)
        if isinstance(val, (str, int, float, bool)) or val is None:
            out[key] = val
    return out


def main(argv=None):
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    if args.cmd == "jets" and args.which in NEEDS_SUBEQ and not args.subeq:
        print("mpak: jets %s needs --subeq" % args.which, file=sys.stderr)
        return 2
    t0 = time.time()
    try:
        payload, primary, grid_out = args.fn(args)
    except (UsageError, ExprError, RieszDependenceError, ValueError) as exc:
        print("mpak: %s" % exc, file=sys.stderr)
        return 2
    except (SolverError, ExprDomainError, ArithmeticError) as exc:
        print("mpak: numerical failure: %s" % exc, file=sys.stderr)
        return 3
    elapsed = time.time() - t0

    expect = getattr(args, "expect", None)
    if expect and primary is None:
        print("mpak: --expect needs a command that produces a verdict",
              file=sys.stderr)
        return 2

    text = jdumps(payload)
    outputs = []
    if args.output:
        atomic_write(args.output, text)
        outputs.append(args.output)
    else:
        sys.stdout.write(text)
    if args.csv:
        if grid_out is None:
            print("mpak: this command produces no grid; --csv ignored",
                  file=sys.stderr)
        else:
            atomic_write(args.csv, csv_text(*grid_out))
            outputs.append(args.csv)

    if outputs:
        digests = []
        for path in outputs:
            with open(path, "rb") as fh:
                blob = fh.read()
            digests.append({"path": path,
                            "sha256": hashlib.sha256(blob).hexdigest(),
                            "bytes": len(blob)})
        manifest = {
            "schema": SCHEMA, "kind": "manifest", "version": __version__,
            "argv": argv,
            "command": payload.get("command", args.cmd),
            "inputs": _resolved_inputs(args),
            "outputs": digests,
            "wall_clock_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ",
                                            time.gmtime()),
            "elapsed_seconds": elapsed,
        }
        atomic_write(outputs[0] + ".manifest.json", jdumps(manifest))

    if expect:
        if primary.status == INCONCLUSIVE:
            print("mpak: verdict Inconclusive under --expect", file=sys.stderr)
            return 3
        agrees = (primary.status == HOLDS) == (expect == "holds")
        if not agrees:
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
