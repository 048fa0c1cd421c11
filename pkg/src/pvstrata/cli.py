"""Command-line front end: report, verify, find-oneps, classify."""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .betaset import EMPTY, EX2, resolve_fixture_dir
from .certify import Infeasible, find_oneps, oneps_problems
from .checks import LISTED_NONEMPTY_CASE2, FixtureError, Fixtures, levi_text, load_fixtures, run_verify
from .invariants import InvariantError, NotSemistableError, ex2_class
from .repspace import coord, coordinates, point

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

REPORT_FIELDS = ("case", "index", "beta", "status", "levi", "z", "w", "orbit", "certificate")


class UsageError(ValueError):
    """Bad command-line input; maps to exit status 2."""


def _frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def report_rows(fx: Fixtures) -> list[dict]:
    rows = []
    for e in fx.catalog.entries:
        i = e.beta.index
        data = fx.data[i]
        if e.status == EMPTY:
            cert = fx.certificates[i]
            steps = " + ".join(f"{s.lemma}({','.join(s.zeroed)})" for s in cert.steps) or "none"
            summary = f"eliminate {steps}; 1-PS {list(cert.lam)}"
            orbit = "n/a"
        else:
            spec = fx.specs[i]
            rep = ",".join(f"x{c.label}={_frac(spec.representative[c.serial - 1])}"
                           for c in coordinates(fx.case_id) if spec.representative[c.serial - 1])
            summary = f"P = {spec.expression}; m = {spec.power}; R = {rep}"
            orbit = "Ex2(k)" if e.orbit_set == EX2 else "single point"
        rows.append({
            "case": fx.case_id,
            "index": i,
            "beta": [_frac(v) for v in e.beta.vector],
            "status": e.status,
            "levi": levi_text(data),
            "z": [c.label for c in data.z_coords],
            "w": [c.label for c in data.w_coords],
            "orbit": orbit,
            "certificate": summary,
        })
    return rows


def report_notes(fx: Fixtures) -> list[str]:
    ne = fx.catalog.indices("NonEmpty")
    notes = [f"{len(fx.catalog.entries)} strata, {len(ne)} non-empty: {', '.join(map(str, ne))}"]
    if fx.case_id == 2:
        missing = sorted(set(ne) - set(LISTED_NONEMPTY_CASE2))
        if missing:
            notes.append(
                f"discrepancy: the enumerated list of non-empty indices has {len(LISTED_NONEMPTY_CASE2)} entries "
                f"and omits {', '.join(map(str, missing))}, whose non-emptiness is proved separately; "
                f"the total {len(ne)} counts it"
            )
    return notes


def render_json(fx: Fixtures) -> str:
    doc = {"case": fx.case_id, "notes": report_notes(fx), "rows": report_rows(fx)}
    return json.dumps(doc, indent=1, ensure_ascii=False) + "\n"


def _cell(value) -> str:
    if isinstance(value, list):
        return " ".join(str(v) for v in value)
    return str(value)


def render_markdown(fx: Fixtures) -> str:
    lines = [f"# Strata of case {fx.case_id}", ""]
    lines += [f"- {n}" for n in report_notes(fx)]
    lines += ["", "| " + " | ".join(REPORT_FIELDS) + " |", "|" + "---|" * len(REPORT_FIELDS)]
    for row in report_rows(fx):
        lines.append("| " + " | ".join(_cell(row[f]) for f in REPORT_FIELDS) + " |")
    return "\n".join(lines) + "\n"


def parse_markdown_rows(text: str) -> list[dict]:
    """Rows of a Markdown report, with list fields split back into lists."""
    rows = []
    table = [ln for ln in text.splitlines() if ln.startswith("| ")]
    for line in table[1:]:
        cells = [c.strip() for c in line.strip()[1:-1].split(" | ")]
        row = dict(zip(REPORT_FIELDS, cells))
        row["case"], row["index"] = int(row["case"]), int(row["index"])
        for f in ("beta", "z", "w"):
            row[f] = row[f].split() if row[f] else []
        rows.append(row)
    return rows


def parse_point_file(case_id: int, text: str) -> tuple[Fraction, ...]:
    values = {}
    n = len(coordinates(case_id))
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"line {lineno}: expected 'serial = p/q'")
        lhs, rhs = (s.strip() for s in line.split("=", 1))
        try:
            serial = int(lhs)
            value = Fraction(rhs)
        except ValueError:
            raise UsageError(f"line {lineno}: cannot parse {line!r}") from None
        if not 1 <= serial <= n:
            raise UsageError(f"line {lineno}: serial {serial} outside 1..{n}")
        values[coord(case_id, serial).label] = value
    return point(case_id, values)


def _parse_coord_arg(case_id: int, token: str):
    """A serial number, or a label written as x131."""
    try:
        if token.startswith("x"):
            return coord(case_id, token[1:])
        return coord(case_id, int(token))
    except (KeyError, ValueError):
        raise UsageError(f"no coordinate {token!r} in case {case_id}") from None


# ------------------------------------------------------------------ commands


def cmd_report(args) -> int:
    fx = load_fixtures(args.case, args.fixtures)
    sys.stdout.write(render_json(fx) if args.format == "json" else render_markdown(fx))
    return EXIT_OK


def cmd_verify(args) -> int:
    cases = {"case1": (1,), "case2": (2,), "all": (1, 2), "1": (1,), "2": (2,)}[args.target]
    if args.case is not None:
        cases = (args.case,)
    fixtures = {c: load_fixtures(c, args.fixtures) for c in cases}  # fail before any check runs
    failed = 0
    for c in cases:
        results = run_verify(c, args.fixtures, seed=args.seed, jobs=args.jobs, full=args.full)
        for r in results:
            print(r.line())
        bad = [r for r in results if not r.ok]
        failed += len(bad)
        strata = len(fixtures[c].catalog.entries)
        bad_idx = {r.index for r in bad if r.index is not None}
        print(f"case{c}: {strata - len(bad_idx)}/{strata} strata certified, {len(bad)} failed checks")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_find_oneps(args) -> int:
    fx = load_fixtures(args.case, args.fixtures)
    if args.beta not in fx.data:
        raise UsageError(f"no stratum {args.beta} in case {args.case}")
    data = fx.data[args.beta]
    zeroed = [_parse_coord_arg(args.case, t) for t in args.zeroed]
    outside = [c for c in zeroed if c not in data.z_coords]
    if outside:
        raise UsageError(f"coordinates {outside} are not in Z for stratum {args.beta}")
    residual = [c for c in data.z_coords if c not in zeroed]
    res = find_oneps(data, residual)
    if isinstance(res, Infeasible):
        print("infeasible")
        if res.multipliers:
            mult = ", ".join(f"x{c.label}: {z}" for c, z in zip(residual, res.multipliers) if z)
            print(f"Farkas multipliers (nonnegative, sum 1, cancel every admissible direction): {mult}")
        else:
            print("no nonzero admissible 1-PS direction exists")
        return EXIT_OK
    failures, weights, orth = oneps_problems(res, data, residual)
    print(f"1-PS {list(res)}")
    print(f"pairing with beta: {orth}")
    print("weights: " + ", ".join(f"x{k}={v}" for k, v in weights.items()))
    print(f"weight list {list(weights.values())}")
    if failures:
        print("check failed: " + "; ".join(failures))
        return EXIT_FAIL
    return EXIT_OK


def cmd_classify(args) -> int:
    fx = load_fixtures(args.case, args.fixtures)
    spec = fx.specs.get(args.beta)
    if spec is None or spec.orbit_set != EX2:
        raise UsageError(f"stratum {args.beta} of case {args.case} has no Ex2 classification")
    try:
        x = parse_point_file(args.case, Path(args.point_file).read_text())
    except OSError as exc:
        raise UsageError(str(exc)) from None
    try:
        desc = ex2_class(spec, x)
    except NotSemistableError as exc:
        raise UsageError(f"point is not semistable: {exc}") from None
    note = "" if desc.reduced else " (large cofactor, square-free reduction unconfirmed)"
    print(f"disc class {desc.square_class}: {desc.algebra}{note}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pvstrata", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--fixtures", default="./fixtures",
                        help="fixture directory (the bundled copy is used when it does not exist)")
    common.add_argument("--seed", type=int, default=0, help="seed for the randomized checks")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("report", parents=[common], help="tabulate every stratum of one case")
    r.add_argument("--case", type=int, choices=(1, 2), required=True)
    r.add_argument("--format", choices=("markdown", "json"), default="markdown")
    r.set_defaults(func=cmd_report)

    v = sub.add_parser("verify", parents=[common], help="run every certificate and property check")
    v.add_argument("target", nargs="?", default="all", choices=("case1", "case2", "all", "1", "2"))
    v.add_argument("--case", type=int, choices=(1, 2))
    v.add_argument("--full", action="store_true", help="also re-derive the label set")
    v.set_defaults(func=cmd_verify)

    f = sub.add_parser("find-oneps", parents=[common], help="search a destabilizing 1-PS")
    f.add_argument("--case", type=int, choices=(1, 2), required=True)
    f.add_argument("beta", type=int, help="stratum index")
    f.add_argument("zeroed", nargs="*", help="eliminated coordinates: serials, or labels such as x131")
    f.set_defaults(func=cmd_find_oneps)

    c = sub.add_parser("classify", parents=[common], help="Ex2 class of a point")
    c.add_argument("--case", type=int, choices=(1, 2), required=True)
    c.add_argument("beta", type=int, help="stratum index (29 in case 1, 67 in case 2)")
    c.add_argument("point_file", help="lines of the form 'serial = p/q'")
    c.set_defaults(func=cmd_classify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if hasattr(args, "fixtures"):
        args.fixtures = str(resolve_fixture_dir(args.fixtures))
    try:
        return args.func(args)
    except (UsageError, FixtureError, InvariantError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
