"""Command-line front door: self-tests and experiments with CSV/JSON output.

Every run prints one header line embedding its full config, then data rows.
Floats are printed with 17 significant digits so replaying a config reproduces
the output byte for byte.  Exit codes: 0 pass, 1 invariant failure, 2
runtime/numeric failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .enumeration import Box
from .ergodic import measure_lower_bound_check, second_moment_experiment
from .errors import LabError
from .experiments import (power_schedule, profile, bad_set_fraction,
                          run_schedule, sample_forms, schedule_preset,
                          shrinking_target_fraction)
from .forms import Q0, GroupElement
from .spin import selftest
from .targets import make_region


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract wants 64
        raise _UsageError(message)


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",")]


def _regions(text: str) -> list[tuple[float, float]]:
    out = []
    for part in text.split(","):
        xi, delta = part.split(":")
        out.append((float(xi), float(delta)))
    return out


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _config(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("func",)}


def _header(args) -> str:
    return (f"# oppenheim-lab v{__version__} "
            f"config={json.dumps(_config(args), sort_keys=True)}")


def _emit(args, lines: list[str]) -> None:
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(args, payload: dict) -> None:
    doc = {"tool": f"oppenheim-lab v{__version__}", "config": _config(args)}
    doc.update(payload)
    _emit(args, [json.dumps(doc, sort_keys=True)])


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_spin_selftest(args) -> int:
    report = selftest(seed=args.seed, pairs=args.pairs, corrupt=args.corrupt_cover)
    if args.json:
        _emit_json(args, {"report": report})
    else:
        lines = [_header(args)]
        for name, ok in report["checks"].items():
            detail = {
                "homomorphism": f"residual={_fmt(report['residual_homomorphism'])}",
                "orthogonality": f"residual={_fmt(report['residual_orthogonality'])}",
                "kernel": f"residual={_fmt(report['residual_kernel'])}",
                "growth": (f"ratio in [{_fmt(report['growth_ratio_min'])},"
                           f"{_fmt(report['growth_ratio_max'])}]"),
            }[name]
            lines.append(f"{'PASS' if ok else 'FAIL'} {name} {detail}")
        _emit(args, lines)
    return 0 if report["ok"] else 1


def _cmd_rogers(args) -> int:
    if args.vol <= 0:
        raise _UsageError(f"--vol must be positive, got {args.vol}")
    side = args.vol ** (1.0 / 3.0)
    box = Box((0.0, 0.0, 0.0), (side, side, side))
    report = second_moment_experiment(box, args.t, args.samples,
                                      args.base_points, args.seed,
                                      p_max=args.p_max, threads=args.threads)
    if args.format == "json":
        _emit_json(args, {"report": report.to_json()})
    else:
        lines = [_header(args),
                 f"lhs,{_fmt(report.estimate)},{_fmt(report.std_err)}"]
        for name in sorted(report.rhs):
            item = report.rhs[name]
            lines.append(f"rhs,{name},{_fmt(item['partial'])},{_fmt(item['tail'])}")
        lines.append(f"matched,{report.convention or 'none'}")
        _emit(args, lines)
    return 0


def _cmd_badset(args) -> int:
    rows = []
    for k in args.k:
        frac, err = bad_set_fraction(k, args.delta, args.xi, args.trials,
                                     args.seed, threads=args.threads)
        rows.append({"k": k, "trials": args.trials, "fraction": frac, "std_err": err})
    if args.format == "json":
        _emit_json(args, {"rows": rows})
    else:
        lines = [_header(args), "k,trials,fraction,std_err"]
        lines += [f"{_fmt(r['k'])},{r['trials']},{_fmt(r['fraction'])},{_fmt(r['std_err'])}"
                  for r in rows]
        _emit(args, lines)
    return 0


def _cmd_target_miss(args) -> int:
    region = make_region(args.xi, args.delta)
    rows = []
    for t in args.t:
        frac, err = shrinking_target_fraction(t, region, args.trials, args.seed,
                                              budget=args.budget, threads=args.threads)
        rows.append({"t": t, "trials": args.trials, "budget": args.budget,
                     "fraction": frac, "std_err": err})
    if args.format == "json":
        _emit_json(args, {"rows": rows})
    else:
        lines = [_header(args), "t,trials,budget,fraction,std_err"]
        lines += [f"{_fmt(r['t'])},{r['trials']},{r['budget']},"
                  f"{_fmt(r['fraction'])},{_fmt(r['std_err'])}" for r in rows]
        _emit(args, lines)
    return 0


def _make_schedule(args):
    if args.schedule in ("pow14", "logk"):
        return schedule_preset(args.schedule, eta=args.eta)
    if args.schedule == "power":
        return power_schedule(args.delta_exp, args.n_exp, eta=args.eta)
    raise _UsageError(f"unknown schedule {args.schedule!r}")


def _cmd_oppenheim(args) -> int:
    sched = _make_schedule(args)
    if args.form == "q0":
        pairs = [(GroupElement.identity(), Q0)]
    else:
        pairs = sample_forms(args.seed, args.forms)
    rows = []
    for idx, pair in enumerate(pairs):
        report = run_schedule(sched, pair, args.k, threads=args.threads)
        for row in report.rows:
            rows.append({"form": idx, "c": report.c, **row.to_json()})
    if args.format == "json":
        _emit_json(args, {"rows": rows})
    else:
        lines = [_header(args),
                 "form,c,k,n_bound,delta,grid_size,d_max,passed,witness_xi,n1,n2,n3"]
        for r in rows:
            n1, n2, n3 = r["witness_n"]
            lines.append(
                f"{r['form']},{_fmt(r['c'])},{_fmt(r['k'])},{_fmt(r['n_bound'])},"
                f"{_fmt(r['delta'])},{r['grid_size']},{_fmt(r['d_max'])},"
                f"{_fmt(r['passed'])},{_fmt(r['witness_xi'])},{n1},{n2},{n3}")
        _emit(args, lines)
    return 0


def _cmd_profile(args) -> int:
    if args.form == "q0":
        q = Q0
    else:
        q = sample_forms(args.seed, 1)[0][1]
    rows = profile(q, args.k, args.n, args.step)
    if args.format == "json":
        _emit_json(args, {"rows": rows})
    else:
        lines = [_header(args), "xi,best_err,n1,n2,n3,evaluated"]
        for r in rows:
            n1, n2, n3 = r["n"]
            lines.append(f"{_fmt(r['xi'])},{_fmt(r['best_err'])},"
                         f"{n1},{n2},{n3},{r['evaluated']}")
        _emit(args, lines)
    return 0


def _cmd_measure_bound(args) -> int:
    rows = []
    for xi, delta in args.regions:
        region = make_region(xi, delta)
        rep = measure_lower_bound_check(region, args.t, args.samples,
                                        args.base_points, args.seed,
                                        threads=args.threads)
        rows.append(rep.to_json())
    if args.format == "json":
        _emit_json(args, {"rows": rows})
    else:
        lines = [_header(args),
                 "xi,delta,volume,bound,estimate,std_err,passed"]
        for r in rows:
            lines.append(f"{_fmt(r['region']['xi'])},{_fmt(r['region']['delta'])},"
                         f"{_fmt(r['volume'])},{_fmt(r['bound'])},"
                         f"{_fmt(r['estimate'])},{_fmt(r['std_err'])},{_fmt(r['passed'])}")
        _emit(args, lines)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common(p, fmt: bool = True):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--output", default=None)
    if fmt:
        p.add_argument("--format", choices=("csv", "json"), default="csv")


def build_parser() -> _Parser:
    parser = _Parser(prog="oppenheim-lab",
                     description="Value-distribution experiments for indefinite "
                                 "ternary quadratic forms")
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("spin-selftest", help="run the cover's invariant suite")
    p.add_argument("--pairs", type=int, default=1000)
    p.add_argument("--json", action="store_true")
    p.add_argument("--corrupt-cover", action="store_true",
                   help="fault injection: use the transposed (composition-"
                        "reversing) cover to demonstrate a failure")
    _add_common(p, fmt=False)
    p.set_defaults(func=_cmd_spin_selftest)

    p = sub.add_parser("rogers", help="second-moment identity experiment")
    p.add_argument("--vol", type=float, required=True)
    p.add_argument("--t", type=float, default=1000.0)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--base-points", type=int, default=8)
    p.add_argument("--p-max", type=int, default=64)
    _add_common(p)
    p.set_defaults(func=_cmd_rogers)

    p = sub.add_parser("badset", help="bad-set fraction vs search radius")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--xi", type=float, required=True)
    p.add_argument("--k", type=_floats, required=True)
    p.add_argument("--trials", type=int, default=400)
    _add_common(p)
    p.set_defaults(func=_cmd_badset)

    p = sub.add_parser("target-miss", help="orbit-ball miss fraction vs radius")
    p.add_argument("--t", type=_floats, required=True)
    p.add_argument("--xi", type=float, default=0.0)
    p.add_argument("--delta", type=float, default=0.3)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--budget", type=int, default=2000)
    _add_common(p)
    p.set_defaults(func=_cmd_target_miss)

    p = sub.add_parser("oppenheim", help="schedule verification on random forms")
    p.add_argument("--schedule", default="pow14")
    p.add_argument("--eta", type=float, default=0.9)
    p.add_argument("--delta-exp", type=float, default=0.25)
    p.add_argument("--n-exp", type=float, default=0.25)
    p.add_argument("--k", type=_floats, required=True)
    p.add_argument("--forms", type=int, default=1)
    p.add_argument("--form", choices=("random", "q0"), default="random")
    _add_common(p)
    p.set_defaults(func=_cmd_oppenheim)

    p = sub.add_parser("profile", help="min-error table across a xi grid")
    p.add_argument("--form", choices=("random", "q0"), default="q0")
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--n", type=float, required=True)
    p.add_argument("--step", type=float, required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_profile)

    p = sub.add_parser("measure-bound", help="hitting-measure lower bound check")
    p.add_argument("--regions", type=_regions, required=True,
                   metavar="XI:DELTA[,XI:DELTA...]")
    p.add_argument("--t", type=float, default=1000.0)
    p.add_argument("--samples", type=int, default=5000)
    p.add_argument("--base-points", type=int, default=8)
    _add_common(p)
    p.set_defaults(func=_cmd_measure_bound)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 64
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 64
    except LabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
