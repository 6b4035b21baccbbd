"""Command-line entry point: ``spherepack <verb> [options]``.

Exit status is 0 on success, 1 when a certificate comes out invalid or an
improvement claim fails re-certification, 2 for usage errors and 3 when a
computation needs more precision than was requested.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import construct, lattice, optimizer
from .certifier import Verdict, certify
from .io import PackingFormatError, read_packing, read_report, render_packing, write_packing, write_report
from .numerics import PrecisionError, format_sci

EXIT_INVALID = 1
EXIT_USAGE = 2
EXIT_PRECISION = 3


class UsageError(Exception):
    pass


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _write_or_print(args, pf) -> None:
    if args.out:
        write_packing(args.out, pf)
    else:
        sys.stdout.write(pf.dumps())


def _summary(pf) -> dict:
    return {"n": pf.n, "p": pf.p, "provenance": pf.provenance, "r": pf.r, "digits": pf.digits, "edge": pf.edge}


def cmd_gen(args) -> int:
    pf = render_packing(lattice.gen_ccp(args.p, args.digits), args.digits)
    if args.out or not args.json:
        _write_or_print(args, pf)
    if args.json:
        print(json.dumps(_summary(pf), indent=2, sort_keys=True))
    return 0


def cmd_pattern(args) -> int:
    try:
        packing = lattice.apply_pattern(args.p, args.r, args.digits)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    pf = render_packing(packing, args.digits)
    if args.out or not args.json:
        _write_or_print(args, pf)
    if args.json:
        out = _summary(pf)
        out["mobile"] = len(lattice.mobile_spheres(packing.lattice, args.p))
        print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def cmd_bound(args) -> int:
    if args.p < 3:
        raise UsageError("bound needs p >= 3")
    value = construct.lower_bound_I(args.p, args.digits)
    text = format_sci(value.value, 4, "down")
    _emit(args, {"p": args.p, "digits": value.digits, "lower_bound": text}, f"I_{args.p} >= {text}")
    return 0


def cmd_construct(args) -> int:
    try:
        cp = construct.build_Pp(args.p, args.digits, allow_large=args.allow_large)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    pf = render_packing(cp.packing)
    if args.out:
        write_packing(args.out, pf)
    cert = certify(pf.rows, args.p)
    payload = {
        "n": pf.n,
        "p": args.p,
        "digits": cp.packing.digits,
        "tau3": cp.tau.tau3.to_string(6) if cp.tau else None,
        "edge": pf.edge[: 30 + len(str(args.p))],
        "verdict": cert.verdict.value,
        "margin_exponent": cert.margin_exponent,
        "improvement": cert.improvement,
    }
    text = "\n".join(f"{k}: {v}" for k, v in payload.items())
    if not args.out and not args.json:
        sys.stdout.write(pf.dumps())
    else:
        _emit(args, payload, text)
    return 0 if cert.verdict is Verdict.IMPROVED else EXIT_INVALID


def _one_run(job):
    p, r, cfg = job
    return optimizer.improve(p, r, cfg)


def _rank(report):
    """Sort key: improved first, then the exact separation ratio ``m^2 / E^2``."""
    cert = certify(report.packing.points, report.p, report.packing.unit_sq)
    return (report.improved, Fraction(cert.min_sq_distance) / cert.edge_sq)


def cmd_improve(args) -> int:
    if args.r >= args.p:
        raise UsageError("improve needs r < p")
    if args.r not in lattice.PATTERNS:
        raise UsageError(f"no removal pattern for r={args.r}")
    if args.runs < 1:
        raise UsageError("--runs must be >= 1")
    if args.iters < 1:
        raise UsageError("--iters must be >= 1")
    digits = args.digits or optimizer.default_digits(args.p, args.r)
    if digits < 20:
        raise UsageError("--digits must be >= 20")
    dirs = optimizer.FULL_DIRECTIONS if args.directions == "full" else optimizer.DEFAULT_DIRECTIONS
    configs = [
        optimizer.SearchConfig(
            seed=args.seed + k,
            digits=digits,
            max_iterations=args.iters,
            stop_on_first_improvement=args.stop_first,
            directions=dirs,
            shuffle_order=args.shuffle,
            progress_every=args.progress,
        )
        for k in range(args.runs)
    ]
    jobs = [(args.p, args.r, cfg) for cfg in configs]
    if args.runs == 1:
        reports = [_one_run(jobs[0])]
    else:
        with ProcessPoolExecutor(max_workers=min(args.runs, args.workers or args.runs)) as pool:
            reports = list(pool.map(_one_run, jobs))
    best = max(reports, key=_rank)

    pf = render_packing(best.packing)
    if args.out:
        write_packing(args.out, pf)
        pf = read_packing(args.out)
    cert = certify(pf.rows, args.p)
    if args.report:
        write_report(args.report, best)
    payload = best.to_dict()
    payload["runs"] = args.runs
    payload["certified"] = cert.verdict.value
    text = "\n".join(
        [
            f"n: {best.n}  p: {best.p}  r: {best.r}  seed: {best.config.seed}  digits: {digits}",
            f"iterations: {best.iterations}  moves: {best.moves}",
            f"improvement d_n - d'_p: {best.improvement}",
            f"certificate: {cert.verdict.value}",
        ]
    )
    _emit(args, payload, text)
    if best.improved and cert.verdict is not Verdict.IMPROVED:
        print("error: improvement claim failed re-certification", file=sys.stderr)
        return EXIT_INVALID
    if not best.improved and best.diagnostic:
        print(best.diagnostic, file=sys.stderr)
    return 0


def cmd_certify(args) -> int:
    pf = read_packing(args.file)
    p = args.p or pf.p
    cert = certify(pf.rows, p)
    payload = {
        "n": cert.n,
        "p": cert.p,
        "verdict": cert.verdict.value,
        "margin_exponent": cert.margin_exponent,
        "improvement": cert.improvement,
    }
    _emit(args, payload, "\n".join(cert.lines()))
    return EXIT_INVALID if cert.verdict is Verdict.INVALID else 0


def cmd_report(args) -> int:
    try:
        data = read_report(args.file)
    except (UnicodeDecodeError, json.JSONDecodeError):
        pf = read_packing(args.file)
        cert = certify(pf.rows, pf.p)
        data = {**_summary(pf), "seed": pf.seed, "verdict": cert.verdict.value, "improvement": cert.improvement}
    if args.json:
        print(json.dumps(data, indent=2, sort_keys=True))
    else:
        for key in sorted(data):
            value = data[key]
            if isinstance(value, dict):
                value = ", ".join(f"{k}={v}" for k, v in sorted(value.items()))
            print(f"{key}: {value}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spherepack", description="Dense sphere packings in a cube near ccp sizes.")
    ap.add_argument("-v", "--verbose", action="store_true", help="progress messages on stderr")
    sub = ap.add_subparsers(dest="verb", required=True)

    def common(sp, digits_default=20):
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        sp.add_argument("--digits", type=int, default=digits_default)

    sp = sub.add_parser("gen", help="ccp packing G_p")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--out")
    common(sp)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("pattern", help="G_p with removal pattern R_r")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--r", type=int, required=True)
    sp.add_argument("--out")
    common(sp)
    sp.set_defaults(func=cmd_pattern)

    sp = sub.add_parser("improve", help="local search from a pattern packing")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--r", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--iters", type=int, default=1000)
    sp.add_argument("--stop-first", action="store_true")
    sp.add_argument("--runs", type=int, default=1)
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--directions", choices=("default", "full"), default="default")
    sp.add_argument("--shuffle", action="store_true", help="random sphere order per iteration")
    sp.add_argument("--progress", type=int, default=0, metavar="K", help="log every K iterations")
    sp.add_argument("--out", help="packing file for the best run")
    sp.add_argument("--report", help="JSON search report for the best run")
    common(sp, digits_default=None)
    sp.set_defaults(func=cmd_improve)

    sp = sub.add_parser("bound", help="constructive lower bound I_p")
    sp.add_argument("--p", type=int, required=True)
    common(sp, digits_default=None)
    sp.set_defaults(func=cmd_bound)

    sp = sub.add_parser("construct", help="constructive packing P_p")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--allow-large", action="store_true")
    sp.add_argument("--out")
    common(sp, digits_default=None)
    sp.set_defaults(func=cmd_construct)

    sp = sub.add_parser("certify", help="exact certificate of a packing file")
    sp.add_argument("--file", required=True)
    sp.add_argument("--p", type=int, default=None)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_certify)

    sp = sub.add_parser("report", help="show a search report or packing file")
    sp.add_argument("--file", required=True)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr, format="%(message)s")
    if getattr(args, "p", None) is not None and args.p < 2:
        ap.error("--p must be >= 2")
    try:
        return args.func(args)
    except UsageError as exc:
        ap.error(str(exc))
    except PrecisionError as exc:
        hint = f" (try --digits {exc.required_digits})" if exc.required_digits else ""
        print(f"precision error: {exc}{hint}", file=sys.stderr)
        return EXIT_PRECISION
    except (PackingFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
