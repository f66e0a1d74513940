"""Command line entry point.

Exit codes: 0 when every certified bound holds, 1 when a bound or check
fails, 2 when a verification is inconclusive, 3 on invalid input or a
construction error (unbalanced or disconnected measure, bad arity, ...).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .approx import approximate
from .birkhoff import level_bound_checks, level_csv, reports_csv, typicality_report
from .cyclic import covering_inequality, demo_instance, stopping_times
from .errors import ArityError, ShiftApproxError
from .measures import (
    MarkovSpec,
    Observable,
    check_shift_balance,
    ingest_trajectory,
    integral,
    markov_word_measure,
    read_trajectory,
)
from .splice import SplicedPoint, build_schedule, modulus_sequence, predicted_bounds, splice
from .symbolic import PeriodicPoint, WordMeasure, as_fraction, classify, empirical_measure, frac_pair

log = logging.getLogger("shiftapprox")

EXIT_OK, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_ERROR = 0, 1, 2, 3


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix="." + path.name, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _num(x) -> str:
    return format(float(x), ".17g")


# measure sources


def load_measure(args) -> WordMeasure:
    sources = [s for s in ("markov", "uniform", "trajectory", "target") if getattr(args, s, None)]
    if len(sources) != 1:
        raise ShiftApproxError("give exactly one measure source (--markov, --uniform, --trajectory or --target)")
    src = sources[0]
    if src == "markov":
        return markov_word_measure(MarkovSpec.load(args.markov, args.m), args.n)
    if src == "uniform":
        return WordMeasure.uniform(args.m, args.n)
    if src == "target":
        return WordMeasure.from_json(json.loads(Path(args.target).read_text()))
    samples = read_trajectory(args.trajectory, args.column)
    if getattr(args, "close", False):
        # reading the trajectory as one period gives exactly balanced counts
        point = PeriodicPoint(args.m, tuple(classify(s, args.m) for s in samples))
        return empirical_measure(point, args.n)
    return ingest_trajectory(samples, args.m, args.n)


def parse_observable(spec: str, m: int) -> Observable:
    """``indicator:0,1`` | ``const:VALUE`` | path to a JSON table
    ``{"depth": d, "table": [...], "bound": M, "name": ...}``."""
    if spec.startswith("indicator:"):
        word = tuple(int(x) for x in spec.split(":", 1)[1].split(","))
        return Observable.indicator(m, word)
    if spec.startswith("const:"):
        return Observable.constant(m, as_fraction(spec.split(":", 1)[1]))
    data = json.loads(Path(spec).read_text())
    table = [as_fraction(v) for v in data["table"]]
    bound = as_fraction(data["bound"]) if "bound" in data else None
    return Observable.cellwise(m, int(data["depth"]), table, bound, name=data.get("name", Path(spec).stem))


def _N_levels(args, levels: int) -> list[int]:
    if args.N is None:
        raise ShiftApproxError("splice needs --N")
    Ns = [int(x) for x in str(args.N).split(",")]
    if len(Ns) == 1 and levels > 1:
        Ns = [Ns[0] * 4**l for l in range(levels)]
    if len(Ns) != levels:
        raise ArityError(f"{len(Ns)} denominators for {levels} levels")
    return Ns


# subcommands


def cmd_approximate(args) -> int:
    kappa = load_measure(args)
    balance = check_shift_balance(kappa)
    if not balance.balanced:
        raise ShiftApproxError(
            f"measure is not shift-balanced (imbalance {balance.imbalance}); "
            "use --close to read a trajectory cyclically"
        )
    if args.N is not None and args.delta is not None:
        raise ShiftApproxError("--N and --delta are mutually exclusive")
    N = int(args.N) if args.N is not None else None
    delta = as_fraction(args.delta) if args.delta is not None else None
    res = approximate(kappa, N=N, delta=delta)
    out = Path(args.out)
    modes = ["paper", "cyclic"] if args.mode == "both" else [args.mode]
    report = {
        "reports": [res.report(md) for md in ("paper", "cyclic")],
        "deviation": frac_pair(res.rationalized.deviation),
        "measure": res.rationalized.kappa.to_json(),
    }
    write_atomic(out / "approximate.json", dump_json(report))
    for md in modes:
        write_atomic(out / f"beta_{md}.json", dump_json(res.point(md).to_json()))
    for md in modes:
        print(json.dumps(res.report(md), sort_keys=True))
    return EXIT_OK if res.paper_error.within_bound else EXIT_FAIL


def cmd_splice(args) -> int:
    kappa = load_measure(args)
    levels = args.levels
    Ns = _N_levels(args, levels)
    f = parse_observable(args.observable, kappa.m) if args.observable else Observable.constant(kappa.m, 0)
    mode = "cyclic" if args.mode == "both" else args.mode
    points = [approximate(kappa, N=N).point(mode) for N in Ns]
    c = [p.c for p in points]
    g, Q = modulus_sequence(f, c)
    sched = build_schedule(c, g)
    alpha = splice(points, sched)
    bounds = predicted_bounds(f.bound, Q, sched.C)
    out = Path(args.out)
    write_atomic(out / "plan.json", dump_json(sched.to_json()))
    write_atomic(out / "alpha.json", dump_json(alpha.to_json()))
    lines = ["n,Q,C,M,b,derived"]
    lines += [f"{r['n']},{_num(r['Q'])},{r['C']},{_num(r['M'])},{_num(r['b'])},{_num(r['derived'])}" for r in bounds.rows()]
    write_atomic(out / "bounds.csv", "\n".join(lines) + "\n")
    print(json.dumps(sched.to_json(), sort_keys=True))
    return EXIT_OK


def _load_point(path):
    data = json.loads(Path(path).read_text())
    return SplicedPoint.from_json(data) if "schedule" in data else PeriodicPoint.from_json(data)


def cmd_verify(args) -> int:
    point = _load_point(args.point)
    args.m = point.m
    kappa = load_measure(args)
    specs = args.observable or ["indicator:0"]
    family = [parse_observable(s, point.m) for s in specs]
    targets = [integral(f, kappa) for f in family]
    if isinstance(point, SplicedPoint):
        horizon_ = args.horizon or point.schedule.T[-1]
        point.schedule.verify()
    else:
        horizon_ = args.horizon or point.c
    reports = typicality_report(point, family, targets, as_fraction(args.epsilon), horizon_)
    out = Path(args.out)
    write_atomic(out / "report.csv", reports_csv(reports))
    summary = {"reports": [r.summary() for r in reports]}
    level_ok = True
    if isinstance(point, SplicedPoint):
        checks_csv = []
        summary["levels"] = []
        for f in family:
            checks = level_bound_checks(point, f)
            level_ok &= all(ch.passed for ch in checks if ch.checked)
            summary["levels"].append({"observable": f.name, "passed": all(ch.passed for ch in checks if ch.checked)})
            checks_csv.append(level_csv(checks))
        write_atomic(out / "levels.csv", "".join(checks_csv))
    statuses = {r.status for r in reports}
    if "fail" in statuses or not level_ok:
        code = EXIT_FAIL
    elif "inconclusive" in statuses:
        code = EXIT_INCONCLUSIVE
    else:
        code = EXIT_OK
    summary["exit_code"] = code
    write_atomic(out / "summary.json", dump_json(summary))
    print(dump_json(summary), end="")
    return code


def cmd_ingest(args) -> int:
    args.markov = args.uniform = args.target = None
    kappa = load_measure(args)
    balance = check_shift_balance(kappa)
    write_atomic(Path(args.out) / "measure.json", dump_json(kappa.to_json()))
    print(json.dumps({"balanced": balance.balanced, "imbalance": frac_pair(balance.imbalance)}))
    return EXIT_OK


def cmd_cyclic_demo(args) -> int:
    k = args.k
    eps = as_fraction(args.epsilon)
    rng = np.random.default_rng(args.seed)
    F, G = demo_instance(k, rng, eps)
    dec = stopping_times(F, G, eps, k)
    res = covering_inequality(dec, F, G, k, eps)
    ok = res.passed and not dec.violations()
    record = {
        "k": k,
        "epsilon": frac_pair(eps),
        "r": dec.r,
        "T_J": dec.T_J,
        "J": dec.J,
        "lhs": frac_pair(res.lhs),
        "rhs": frac_pair(res.rhs),
        "pass": ok,
    }
    out = Path(args.out)
    write_atomic(out / "cyclic_demo.json", dump_json(record))
    if args.csv:
        write_atomic(out / "stopping_times.csv", "x,T\n" + "".join(f"{x},{t}\n" for x, t in enumerate(dec.T.tolist())))
    print(json.dumps(record, sort_keys=True))
    return EXIT_OK if ok else EXIT_FAIL


# parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file of option defaults; flags win")
    p.add_argument("--m", type=int, default=2, help="partition resolution")
    p.add_argument("--n", type=int, default=2, help="word length")
    p.add_argument("--N", help="common denominator (splice: comma list or base)")
    p.add_argument("--delta", help="per-word tolerance, exclusive with --N")
    p.add_argument("--mode", choices=["paper", "cyclic", "both"], default="both")
    p.add_argument("--epsilon", default="0.01")
    p.add_argument("--horizon", type=int)
    p.add_argument("--out", default="out")
    p.add_argument("--seed", type=int, default=0)


def _sources(p: argparse.ArgumentParser) -> None:
    p.add_argument("--markov", help="Markov spec JSON {P, pi}")
    p.add_argument("--uniform", action="store_true")
    p.add_argument("--trajectory", help="samples in [0,1], one per line or CSV")
    p.add_argument("--column", help="CSV column name or index")
    p.add_argument("--close", action="store_true", help="count trajectory windows cyclically")
    p.add_argument("--target", help="WordMeasure JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shiftapprox", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("approximate", help="periodic point approximating a measure")
    _common(p)
    _sources(p)
    p.set_defaults(func=cmd_approximate)

    p = sub.add_parser("splice", help="splice per-level approximations into one point")
    _common(p)
    _sources(p)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--observable", help="observable used to size the blocks")
    p.set_defaults(func=cmd_splice)

    p = sub.add_parser("verify", help="typicality and bound checks for a point")
    _common(p)
    _sources(p)
    p.add_argument("--point", required=True, help="PeriodicPoint or spliced point JSON")
    p.add_argument("--observable", action="append")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("ingest", help="word measure of a trajectory")
    _common(p)
    p.add_argument("--trajectory", required=True)
    p.add_argument("--column")
    p.add_argument("--close", action="store_true")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("cyclic-demo", help="stopping-time covering on a random instance")
    _common(p)
    p.add_argument("--k", type=int, default=10_000)
    p.add_argument("--csv", action="store_true", help="also write T(x) as CSV")
    p.set_defaults(func=cmd_cyclic_demo)
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        config = json.loads(Path(args.config).read_text())
        sub = parser._subparsers._group_actions[0].choices[args.command]
        sub.set_defaults(**{k.replace("-", "_"): v for k, v in config.items()})
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ShiftApproxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except AssertionError as exc:
        print(f"bound violated: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
