"""Command-line driver: ``qidiff {find,oracle,estimate,selftest}``.

Every command writes one JSON report (to ``--out`` or stdout). Reports carry a
``schema_version``, the seed where one applies, and a ``timing`` block holding
the wall-clock timestamp and elapsed time; everything outside ``timing`` is a
pure function of the arguments.

Exit codes: 0 success, 1 bad config or parameters, 2 infeasible at toy scale.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import logging
import os
import sys
import time
import warnings
from fractions import Fraction

from . import __version__, oracle, resources
from .cipher import component_view, load_cipher, rounds_view
from .errors import FeasibilityError, QidiffError
from .finder import SearchParams, find_impo_diff, find_impo_diff2
from .fixtures import parse_function
from .gf2 import DEFAULT_CAP

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_FEASIBILITY = 0, 1, 2

log = logging.getLogger("qidiff")


def default_workers() -> int:
    env = os.environ.get("QIDIFF_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer QIDIFF_WORKERS=%r", env)
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1)


def dump_report(report: dict, out: str | None):
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def strip_timing(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "timing"}


def _envelope(command: str, result: dict, started: float, seed=None) -> dict:
    report = {"schema_version": SCHEMA_VERSION, "command": command, "version": __version__,
              "result": result,
              "timing": {"timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
                         "elapsed_s": round(time.perf_counter() - started, 3)}}
    if seed is not None:
        report["seed"] = seed
    return report


def _e0(text):
    if text is None or text == "auto":
        return text
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"e0 must be a fraction or decimal, not {text!r}")


def measured_e0(spec, algorithm: str) -> Fraction:
    """Largest exhaustive theta over every view the search will touch."""
    best = Fraction(0)
    for t in range(1, spec.r):
        for direction in ("forward", "backward"):
            view = rounds_view(spec, t, direction)
            if algorithm == "full":
                best = max(best, oracle.brute_theta(view).theta)
            else:
                best = max([best] + [rep.theta for rep in oracle.brute_component_thetas(view)])
    return best


def cmd_find(args) -> dict:
    spec = load_cipher(args.cipher)
    e0 = measured_e0(spec, args.algo) if args.e0 == "auto" else args.e0
    params = SearchParams(c=args.c, e0=e0, backend=args.backend, seed=args.seed,
                          enumeration_cap=args.cap, verify_with_oracle=args.verify,
                          workers=args.workers or default_workers())
    search = find_impo_diff if args.algo == "full" else find_impo_diff2
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        result = search(spec, params)
    for msg in result.warnings:
        log.warning(msg)
    out = result.to_json()
    out["estimate"] = resources.estimate(args.algo, spec.n, spec.m, spec.r, args.c).to_json()
    return out


def _target(args):
    if args.function:
        return parse_function(args.function)
    if not args.cipher:
        raise argparse.ArgumentTypeError("give --cipher or --function")
    view = rounds_view(load_cipher(args.cipher), args.rounds, args.direction)
    return component_view(view, args.component) if args.component else view


def cmd_oracle(args) -> dict:
    what = args.what
    if what in ("structures", "theta"):
        F = _target(args)
        out = {"function": F.name, "N": F.N, "M": F.M}
        if what == "structures":
            out["space"] = oracle.brute_linear_structures(F).to_json()
            out["dim"] = len(out["space"]["basis"])
        else:
            out["theta"] = oracle.brute_theta(F).to_json()
            if args.components:
                out["components"] = [r.to_json() for r in oracle.brute_component_thetas(F)]
        return out
    spec = load_cipher(args.cipher) if args.cipher else None
    if spec is None:
        raise argparse.ArgumentTypeError(f"oracle {what} needs --cipher")
    if what == "truncated":
        diffs = oracle.brute_prob1_truncated(spec, args.rounds, args.direction)
        return {"cipher": spec.to_json(), "rounds": args.rounds, "direction": args.direction,
                "count": len(diffs), "differentials": [d.to_json() for d in diffs]}
    ids = sorted(oracle.brute_impossible_differentials(spec))
    return {"cipher": spec.to_json(), "count": len(ids),
            "impossible": [[a.hex(), b.hex()] for a, b in ids]}


def cmd_estimate(args) -> dict:
    est = resources.estimate(args.algo, args.n, args.m, args.r, args.c)
    out = est.to_json()
    check = resources.per_split_estimate(args.algo, args.n, args.m, args.r, args.c)
    out["per_split_agrees"] = check == est
    return out


def cmd_selftest(args) -> dict:
    """Fast end-to-end sanity checks; a failing check makes the command exit 1."""
    from .fixtures import standard_fixtures
    from .qsim import exact_distribution, statevector_distribution, total_variation

    checks = {}
    est = resources.estimate("FindImpoDiff", 64, 80, 25, 3)
    checks["table_full"] = (est.tau, est.cnot, est.hadamard, est.ue_calls, est.qubits) == \
        (72, 1916928, 12460032, 14976, 272)
    est = resources.estimate("FindImpoDiff2", 8, 8, 4, 3)
    checks["table_truncated"] = (est.tau, est.cnot, est.hadamard, est.ue_calls, est.qubits) == \
        (9, 2448, 83232, 153, 18)
    checks["sampler_fidelity"] = all(
        total_variation(exact_distribution(F).pmf, statevector_distribution(F)) <= 1e-9
        for F in standard_fixtures()[:7])
    spec = load_cipher("weakspn8.json")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = find_impo_diff(spec, SearchParams(c=5, seed=args.seed, verify_with_oracle=True))
    checks["weakspn8_sound"] = all(r.verified == "oracle_confirmed" for r in res)
    return {"checks": checks, "passed": all(checks.values())}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qidiff", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    out = argparse.ArgumentParser(add_help=False)
    out.add_argument("--out", help="report path (default: stdout)")

    f = sub.add_parser("find", parents=[out], help="search a cipher for impossible differentials")
    f.add_argument("--cipher", required=True, help="cipher config path or shipped config name")
    f.add_argument("--algo", choices=("full", "truncated"), default="full")
    f.add_argument("--c", type=int, default=4, help="samples per dimension (default 4)")
    f.add_argument("--e0", type=_e0, default=None,
                   help="assumed bound on theta, or 'auto' to measure it exhaustively")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--backend", choices=("fourier", "statevector"), default="fourier")
    f.add_argument("--verify", action="store_true", help="check every record by exhaustive scan")
    f.add_argument("--workers", type=int, default=None,
                   help="threads (default: $QIDIFF_WORKERS or the CPU count)")
    f.add_argument("--cap", type=int, default=DEFAULT_CAP, help="max solution-space elements enumerated")
    f.set_defaults(handler=cmd_find)

    o = sub.add_parser("oracle", help="exhaustive classical ground truth")
    o.add_argument("what", choices=("structures", "theta", "truncated", "impossible"))
    o.add_argument("--cipher")
    o.add_argument("--function", help="named fixture, e.g. identity:4, and2, sbox:weakspn8")
    o.add_argument("--rounds", type=int, default=1)
    o.add_argument("--direction", choices=("forward", "backward"), default="forward")
    o.add_argument("--component", type=int, default=None, help="restrict to output bit i")
    o.add_argument("--components", action="store_true", help="theta: also report every output bit")
    o.add_argument("--out")
    o.set_defaults(handler=cmd_oracle)

    e = sub.add_parser("estimate", parents=[out], help="quantum resource counts")
    e.add_argument("--algo", default="full",
                   help="full | truncated (or FindImpoDiff | FindImpoDiff2)")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--m", type=int, required=True)
    e.add_argument("--r", type=int, required=True)
    e.add_argument("--c", type=int, default=4)
    e.set_defaults(handler=cmd_estimate)

    s = sub.add_parser("selftest", parents=[out], help="quick end-to-end checks")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(handler=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    started = time.perf_counter()
    try:
        result = args.handler(args)
    except FeasibilityError as exc:
        print(f"qidiff: infeasible: {exc}", file=sys.stderr)
        return EXIT_FEASIBILITY
    except (QidiffError, argparse.ArgumentTypeError, OSError) as exc:
        print(f"qidiff: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    seed = getattr(args, "seed", None)
    dump_report(_envelope(args.command, result, started, seed), args.out)
    if args.command == "selftest" and not result["passed"]:
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
