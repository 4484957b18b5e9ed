"""Command-line interface.

Exit codes: 0 success or pass, 1 property failure or statistical
rejection, 2 usage or data error.  JSON reports go to stdout and a short
human-readable summary to stderr.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import core, families
from .empirical import estimate, kendall_tau, load_csv, ranks
from .errors import CopulaError, TiesPresent
from .inference import BootstrapConfig, run_tests
from .pmi import CHECKERS, check_all
from .simlab import REJECTION_HEADER, StudyConfig, run_study

SCHEMA_VERSION = 1
MEASURES = {"rho": "Pi", "gamma": "M_Gamma", "kappaV": "V"}

# family name -> (constructor, parameter flags)
CHECK_FAMILIES = {
    "gaussian": (families.gaussian, ("rho",)),
    "frank": (families.frank, ("delta",)),
    "fgm": (families.fgm, ("alpha",)),
    "fgm_cubic": (families.fgm_cubic, ()),
    "frechet": (families.frechet, ("alpha", "beta")),
    "marshall_olkin": (families.marshall_olkin, ("alpha", "beta")),
    "evc_example": (lambda: families.evc(families.example_pickands()), ()),
    "clayton": (lambda t: families.archimedean(families.gen_clayton(t)), ("theta",)),
    "gumbel": (lambda t: families.archimedean(families.gen_gumbel(t)), ("theta",)),
    "joe": (lambda t: families.archimedean(families.gen_joe(t)), ("theta",)),
    "amh": (lambda t: families.archimedean(families.gen_amh(t)), ("theta",)),
    "independence": (core.independence, ()),
    "upper_bound": (core.upper_bound, ()),
    "lower_bound": (core.lower_bound, ()),
    "m_gamma": (core.m_gamma, ()),
    "v": (core.v_copula, ()),
}


class UsageError(Exception):
    pass


def _emit(payload: dict) -> None:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    json.dump(payload, sys.stdout, indent=2, sort_keys=False)
    sys.stdout.write("\n")


def _say(args, text: str) -> None:
    if not args.quiet:
        print(text, file=sys.stderr)


def _seed(args) -> int:
    if args.seed is not None:
        return int(args.seed)
    return int(np.random.SeedSequence().entropy % 2**32)


def _model(args):
    ctor, names = CHECK_FAMILIES[args.family]
    values = []
    for name in names:
        v = getattr(args, name)
        if v is None:
            raise UsageError(f"family {args.family} needs --{name}")
        values.append(v)
    return ctor(*values), values


def cmd_check(args) -> int:
    C, params = _model(args)
    if args.criterion == "all":
        reports = check_all(C, args.grid, args.tol, args.direction)
    else:
        reports = {args.criterion: CHECKERS[args.criterion](C, args.grid, args.tol,
                                                            args.direction)}
    # PQD is a different dependence notion; it is reported but only decides
    # the outcome when requested on its own
    decisive = [r for k, r in reports.items() if k != "pqd"] or list(reports.values())
    passed = all(r.passed for r in decisive)
    _emit({"command": "check", "family": args.family, "params": params,
           "direction": args.direction.upper(), "passed": passed,
           "reports": {k: r.to_dict() for k, r in reports.items()}})
    for k, r in reports.items():
        _say(args, f"{k:8s} {'pass' if r.passed else 'FAIL'}  min slack {r.min_slack:.3g}")
    return 0 if passed else 1


def _load_ranks(args, seed):
    x = load_csv(args.input)
    try:
        return ranks(x, tie_policy=args.ties, seed=seed)
    except TiesPresent as e:
        rows = ", ".join(str(r + 1) for r in e.rows[:50])
        more = " ..." if len(e.rows) > 50 else ""
        raise UsageError(f"ties present in data rows {rows}{more}; "
                         "use --ties jitter to break them") from None


def cmd_estimate(args) -> int:
    seed = _seed(args)
    R = _load_ranks(args, seed)
    names = list(MEASURES) if args.measure == "all" else [args.measure]
    kinds = ["EC", "ECC"] if args.estimator == "both" else [args.estimator.upper()]
    out = []
    for name in names:
        for kind in kinds:
            d = estimate(R, MEASURES[name], kind).to_dict()
            d["name"] = name
            out.append(d)
            _say(args, f"{name:7s} {kind:4s} {d['value']: .6f}")
    _emit({"command": "estimate", "input": str(args.input), "n": R.n, "ties": args.ties,
           "seed": seed, "kendall_tau": kendall_tau(R), "estimates": out})
    return 0


def cmd_test(args) -> int:
    seed = _seed(args)
    R = _load_ranks(args, seed)
    pairs = ("T1", "T2", "T3") if args.pair == "all" else (args.pair,)
    cfg = BootstrapConfig(replicates=args.replicates, seed=seed, bandwidth=args.bandwidth,
                          estimator_kind=args.estimator.upper(),
                          margin_correction=not args.no_margin_correction)
    reports = run_tests(R, pairs, args.direction, args.alpha, cfg)
    _emit({"command": "test", "input": str(args.input), "n": R.n, "ties": args.ties,
           "seed": seed, "reports": [r.to_dict() for r in reports]})
    for r in reports:
        _say(args, f"{r.pair} {r.direction} T = {r.statistic:.4f}  "
                   f"({'reject' if r.reject else 'no rejection'} at {r.threshold:.3f})")
    return 1 if any(r.reject for r in reports) else 0


def cmd_simulate(args) -> int:
    seed = _seed(args)
    cfg = StudyConfig(family=args.family, params=args.params, ns=args.n,
                      repetitions=args.reps, replicates=args.replicates, level=args.alpha,
                      pairs=tuple(args.pairs), kinds=tuple(k.upper() for k in args.estimator),
                      seed=seed, direction=args.direction, workers=args.workers)
    rows = run_study(cfg, args.study, args.out, resume=not args.no_resume)
    _say(args, f"wrote {len(rows)} rows to {args.out} (seed {seed})")
    if args.study == "rejection" and not args.quiet:
        for r in rows:
            print(",".join(str(r[h]) for h in REJECTION_HEADER[:7]), file=sys.stderr)
    return 0


def _direction(s):
    s = s.upper()
    if s not in ("PMI", "NMI"):
        raise argparse.ArgumentTypeError("direction must be pmi or nmi")
    return s


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pmicopula",
                                description="PMI/NMI checks, concordance estimators and tests")
    p.add_argument("--quiet", action="store_true", help="suppress the summary on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="grid check of PMI/NMI and PQD for a copula family")
    c.add_argument("--family", required=True, choices=sorted(CHECK_FAMILIES))
    for name in ("rho", "delta", "alpha", "beta", "theta"):
        c.add_argument(f"--{name}", type=float)
    c.add_argument("--criterion", default="all", choices=[*CHECKERS, "all"])
    c.add_argument("--grid", type=int, default=200)
    c.add_argument("--direction", type=_direction, default="PMI")
    c.add_argument("--tol", type=float, default=None)
    c.set_defaults(func=cmd_check)

    def data_args(q):
        q.add_argument("--input", required=True, help="CSV file with two numeric columns")
        q.add_argument("--ties", choices=["error", "jitter"], default="jitter")
        q.add_argument("--seed", type=int, default=None)

    e = sub.add_parser("estimate", help="rank estimates of concordance measures")
    data_args(e)
    e.add_argument("--measure", default="all", choices=[*MEASURES, "all"])
    e.add_argument("--estimator", default="both", type=str.lower,
                   choices=["ec", "ecc", "both"])
    e.set_defaults(func=cmd_estimate)

    t = sub.add_parser("test", help="asymptotic PMI/NMI tests")
    data_args(t)
    t.add_argument("--pair", default="all", choices=["T1", "T2", "T3", "all"])
    t.add_argument("--direction", type=_direction, default="PMI")
    t.add_argument("--alpha", type=float, default=0.05, help="significance level")
    t.add_argument("--replicates", type=int, default=1000)
    t.add_argument("--estimator", default="ec", type=str.lower, choices=["ec", "ecc"])
    t.add_argument("--bandwidth", type=float, default=None)
    t.add_argument("--no-margin-correction", action="store_true",
                   help="drop the derivative terms of the bootstrap process (diagnostic)")
    t.set_defaults(func=cmd_test)

    s = sub.add_parser("simulate", help="rejection-rate or variance simulation study")
    s.add_argument("--study", required=True, choices=["rejection", "variance"])
    s.add_argument("--family", required=True)
    s.add_argument("--params", required=True, type=float, nargs="+")
    s.add_argument("--n", required=True, type=int, nargs="+")
    s.add_argument("--reps", type=int, default=200)
    s.add_argument("--replicates", type=int, default=1000)
    s.add_argument("--alpha", type=float, default=0.05, help="significance level")
    s.add_argument("--pairs", nargs="+", default=["T1", "T2", "T3"],
                   choices=["T1", "T2", "T3"])
    s.add_argument("--estimator", nargs="+", default=["ec"], type=str.lower,
                   choices=["ec", "ecc"])
    s.add_argument("--direction", type=_direction, default="PMI")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out", required=True)
    s.add_argument("--no-resume", action="store_true", help="ignore and do not write a journal")
    s.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except (UsageError, CopulaError, ValueError, OSError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
