"""Command line entry point: ``topogen <subcommand> ...``.

Exit codes: 0 success, 1 a checked property failed, 2 usage error.
Reports are JSON objects; tables are CSV with a header row and LF endings.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import genpair, kronecker, liegen, permgroups, stevens
from .dyadic import parse_dyadic

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _rational_text(q, limit: int = 200) -> str:
    """Exact ``p/q`` text, or a 30-digit decimal prefixed with ``~`` when too long."""
    text = str(q)
    if len(text) <= limit:
        return text
    num, den = int(q.numerator), int(q.denominator)
    whole, rest = divmod(num, den)
    digits = (rest * 10**30) // den
    return f"~{whole}.{digits:030d}"


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        Path(path).write_bytes(text.encode())
    else:
        sys.stdout.write(text)


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _output(args, report: dict, header=None, rows=None) -> None:
    """JSON report to ``--out``; the table to ``--csv`` (or to ``--out`` in csv format)."""
    if args.format == "csv" and header is not None:
        _emit(_csv_text(header, rows), args.out)
        return
    _emit(_json_text(report), args.out)
    if header is not None and args.csv:
        _emit(_csv_text(header, rows), args.csv)


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not an exact rational: {text!r}") from None


def _dyadic(text: str):
    try:
        return parse_dyadic(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _weights(text: str):
    try:
        return stevens.parse_weights(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# -- subcommands ---------------------------------------------------------


def cmd_norm(args) -> int:
    x = _dyadic(args.x)
    ws = _weights(args.weights)
    res = stevens.norm(x, ws)
    report = {
        "x": str(x),
        "weights": str(ws),
        "value": str(res.value),
        "witness": {str(i): a for i, a in res.witness.items()},
    }
    if args.circle:
        report["circle_norm"] = str(stevens.circle_norm(x, ws))
    status = EXIT_OK
    if args.check:
        lo = (x.scale if x.num else 0) - max(abs(x.num).bit_length(), 1) - 2
        hi = max(x.scale, 0)
        oracle = stevens.norm_oracle(x, ws, (lo, hi), args.maxcoeff)
        report["oracle"] = str(oracle)
        report["oracle_agrees"] = oracle == res.value
        if oracle != res.value:
            status = EXIT_FAIL
    _output(args, report)
    return status


def cmd_weights_validate(args) -> int:
    ws = _weights(args.weights)
    try:
        lo, hi = (int(t) for t in args.window.split(","))
    except ValueError:
        raise UsageError(f"window must be 'lo,hi', got {args.window!r}") from None
    report = {"weights": str(ws), "window": [lo, hi]}
    status = EXIT_OK
    try:
        stevens.validate_weights(ws, lo, hi)
        report["ok"] = True
    except stevens.WeightViolation as exc:
        report.update(ok=False, index=exc.index, reason=exc.reason)
        status = EXIT_FAIL
    try:
        report["diverges"] = stevens.divergence_flag(ws)
        report["totally_disconnected"] = report["diverges"]
    except stevens.UndecidableTail as exc:
        report["diverges"] = None
        report["divergence_note"] = str(exc)
    _output(args, report)
    return status


def cmd_genpair(args) -> int:
    g0, h0 = _dyadic(args.g0), _dyadic(args.h0)
    if g0.num == 0:
        raise UsageError("g0 must be nonzero")
    if args.N < 0:
        raise UsageError("N must be non-negative")
    ws = _weights(args.weights)
    targets = [_dyadic(t) for t in args.targets.split(",")] if args.targets else []
    cert = genpair.construct_pair(g0, h0, args.N)
    rows = []
    for n in range(args.N + 1):
        try:
            c = genpair.construct_pair(g0, h0, n)
        except genpair.NotCoprime as exc:
            # the odd beta cannot help at n = 0 when k1 is even and k2 odd
            rows.append([n, "", "", f"no_certificate:gcd={exc.gcd}", ""])
            continue
        dist = stevens.norm(genpair.perturbation(c), ws).value
        if not targets:
            rows.append([n, _rational_text(dist), "", "", ""])
        for t in targets:
            hit = genpair.reach_target(c, t)
            rows.append([n, _rational_text(dist), str(t), *(hit if hit else ("unreachable", ""))])
    report = {"certificate": cert.as_dict(), "weights": str(ws)}
    report["h_minus_h0_norm"] = _rational_text(stevens.norm(genpair.perturbation(cert), ws).value)
    report["targets"] = {
        str(t): (list(hit) if (hit := genpair.reach_target(cert, t)) else None) for t in targets
    }
    _output(args, report, ["N", "norm_h_minus_h0", "target", "u", "v"], rows)
    return EXIT_OK


def cmd_kronecker(args) -> int:
    try:
        syms, _ = kronecker.parse_basis(args.basis)
        rows = kronecker.parse_coords(args.coords, len(syms))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    cv = kronecker.CoordVector(tuple(syms), tuple(tuple(r) for r in rows))
    verdict = kronecker.is_topological_generator(cv)
    rank = kronecker.rational_rank(cv.matrix())
    rational = all(all(c == 0 for c in r[1:]) for r in cv.rows)
    if rational and cv.dim == 1:
        point = cv.rows[0][0]
    else:
        point = cv.approximate()
        if cv.dim == 1:
            point = float(point[0])
    Ks = sorted({k for k in (1, 10, 100, 1000, 10_000, 100_000) if k < args.K} | {args.K})
    table = []
    for K in Ks:
        r = kronecker.orbit_covering_radius(point, K, args.resolution)
        if isinstance(r, kronecker.CoveringEstimate):
            table.append([K, repr(r.radius), repr(r.cell_diameter), r.coarse])
        else:
            table.append([K, str(r) if isinstance(r, Fraction) else repr(r), "", False])
    report = {
        "basis": list(syms),
        "coords": [[str(c) for c in r] for r in cv.rows],
        "rank": rank,
        "generator": verdict,
        "covering_radius": table[-1][1],
        "K": args.K,
    }
    _output(args, report, ["K", "covering_radius", "cell_diameter", "coarse"], table)
    return EXIT_OK


def _submeasure(text: str):
    if text == "harmonic":
        return permgroups.harmonic()
    raise UsageError(f"escape needs an additive submeasure; supported: harmonic (got {text!r})")


def cmd_escape(args) -> int:
    lam = _submeasure(args.lam)
    eps = _fraction(args.eps)
    if eps <= 0 or args.N < 0:
        raise UsageError("need eps > 0 and N >= 0")
    try:
        w = permgroups.escape_construction(lam, eps, args.N)
    except AssertionError as exc:
        print(f"escape witness failed its checks: {exc}", file=sys.stderr)
        return EXIT_FAIL
    bound = args.N * eps / 2
    rows = [
        [i + 1, f"{b[0]}-{b[-1]}", len(b), _rational_text(v)]
        for i, (b, v) in enumerate(zip(w.blocks, w.block_values))
    ]
    report = {
        "lambda": str(lam),
        "eps": str(eps),
        "N": args.N,
        "blocks": [[b[0], b[-1]] for b in w.blocks],
        "block_values": [_rational_text(v) for v in w.block_values],
        "generators_inside_eps_ball": all(v < eps for v in w.block_values),
        "distance": _rational_text(w.distance),
        "distance_float": float(w.distance),
        "lower_bound": str(bound),
        "distance_ge_lower_bound": bool(w.distance >= bound),
    }
    _output(args, report, ["i", "block", "size", "lambda"], rows)
    return EXIT_OK


def cmd_qna_check(args) -> int:
    model = args.model
    if not model.startswith("du:"):
        raise UsageError("model must be du:<points>")
    try:
        n = int(model[3:])
    except ValueError:
        raise UsageError(f"bad point count in {model!r}") from None
    eps = _fraction(args.eps)
    if eps <= 0 or args.k < 1 or n < 1:
        raise UsageError("need eps > 0, k >= 1 and a positive point count")
    rep = permgroups.qna_modulus_check(n, eps, args.k, args.L, args.trials, args.seed)
    rows = [[t, size, str(worst), str(bound), ok] for t, size, worst, bound, ok in rep.rows]
    _output(args, rep.as_dict(), ["trial", "ball_size", "max_distance", "support_bound", "ok"], rows)
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_so3_cover(args) -> int:
    try:
        pair = liegen.parse_pair(args.pair)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    net = liegen.so3_net(args.net, args.seed)
    cell = args.cell if args.cell is not None else args.target / 4
    g = liegen.grow_ball(pair, args.L, net, cell=cell, cap=args.cap)
    rows = [[L, size, repr(r)] for L, size, r in g.rows()]
    report = {
        "pair": args.pair,
        "L": args.L,
        "net": args.net,
        "seed": args.seed,
        "net_mesh": net.mesh,
        "cell": cell,
        "covering_radius": g.radii[-1],
        "target": args.target,
        "below_target": g.radii[-1] < args.target,
    }
    _output(args, report, ["L", "ball_size", "covering_radius"], rows)
    return EXIT_OK


# -- parser --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="topogen", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", metavar="<subcommand>")
    sub.required = True

    def add(name, func, help, default_format="json"):
        sp = sub.add_parser(name, help=help)
        sp.set_defaults(func=func)
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--csv", help="also write the table to this CSV file")
        sp.add_argument("--format", choices=("json", "csv"), default=default_format)
        return sp

    sp = add("norm", cmd_norm, "Stevens norm of a dyadic rational")
    sp.add_argument("--x", required=True, help="dyadic, e.g. 3/4 or -9/2^4")
    sp.add_argument("--weights", default="harmonic")
    sp.add_argument("--circle", action="store_true", help="also report the norm modulo Z")
    sp.add_argument("--check", action="store_true", help="cross-check against the exhaustive oracle")
    sp.add_argument("--maxcoeff", type=int, default=3)

    sp = add("weights-validate", cmd_weights_validate, "check a weight sequence on a window")
    sp.add_argument("--weights", required=True)
    sp.add_argument("--window", default="-8,64", help="lo,hi")

    sp = add("genpair", cmd_genpair, "dense generating pair certificate")
    sp.add_argument("--g0", required=True)
    sp.add_argument("--h0", required=True)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--weights", default="harmonic")
    sp.add_argument("--targets", default="")

    sp = add("kronecker", cmd_kronecker, "Kronecker criterion and orbit covering radius")
    sp.add_argument("--basis", required=True, help='e.g. "1,sqrt2"')
    sp.add_argument("--coords", required=True, help='rows over the basis, ";"-separated')
    sp.add_argument("--K", type=int, default=1000)
    sp.add_argument("--resolution", type=int, default=64)

    sp = add("escape", cmd_escape, "far products of near-identity permutations")
    sp.add_argument("--lambda", dest="lam", default="harmonic")
    sp.add_argument("--eps", required=True)
    sp.add_argument("--N", type=int, required=True)

    sp = add("qna-check", cmd_qna_check, "support-union bound for words in small generators")
    sp.add_argument("--model", default="du:12")
    sp.add_argument("--eps", required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--L", type=int, required=True)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)

    sp = add("so3-cover", cmd_so3_cover, "word-ball covering radius in SO(3)", default_format="csv")
    sp.add_argument("--pair", required=True, help='e.g. "x:0.3,z:0.3"')
    sp.add_argument("--L", type=int, required=True)
    sp.add_argument("--net", type=int, default=2000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--target", type=float, default=0.4)
    sp.add_argument("--cell", type=float, default=None, help="dedup cell diameter (default target/4)")
    sp.add_argument("--cap", type=int, default=3_000_000)
    return p


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"topogen {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AssertionError, genpair.NotCoprime) as exc:
        print(f"topogen {args.command}: check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main() -> None:
    sys.exit(run())
