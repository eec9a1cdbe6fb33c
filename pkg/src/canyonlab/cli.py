"""Command line: ``canyonlab card|compare|sweep``.

Exit codes: 0 on success (whatever the verdict), 2 on a computation error,
3 on a parse error.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from .equivalence import decide
from .errors import CanyonError, ParseError
from .invariants import identity_card
from .numerics import working_precision
from .parser import parse_germ
from .serialize import card_to_json, dumps, rat, verdict_to_json

__all__ = ["main", "cmd_card", "cmd_compare", "cmd_sweep", "build_parser"]

EXIT_OK, EXIT_COMPUTE, EXIT_PARSE = 0, 2, 3


def _bindings(items) -> dict[str, Fraction]:
    out = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise ParseError(f"bad binding {item!r}, expected name=value", 0)
        try:
            out[name.strip()] = Fraction(value.strip())
        except ValueError:
            raise ParseError(f"bad value in binding {item!r}", len(name) + 1) from None
    return out


def cmd_card(expr: str, bindings=None, trunc=None) -> dict:
    germ = parse_germ(expr, bindings)
    return card_to_json(identity_card(germ.poly, trunc=trunc))


def cmd_compare(expr_f: str, expr_g: str, bindings=None, certificate: bool = False) -> dict:
    f = parse_germ(expr_f, bindings).poly
    g = parse_germ(expr_g, bindings).poly
    return verdict_to_json(decide(f, g), certificate)


def cmd_sweep(template: str, param: str, values, bindings=None, certificate: bool = False) -> dict:
    """Compare the template at every pair of parameter values; group values never told apart."""
    values = [Fraction(v) for v in values]
    binds = dict(bindings or {})
    cards = {}
    for v in values:
        binds[param] = v
        cards[v] = identity_card(parse_germ(template, binds).poly)
    parent = {v: v for v in values}

    def find(v):
        while parent[v] != v:
            v = parent[v]
        return v

    pairs = []
    for k, a in enumerate(values):
        for b in values[k + 1:]:
            verdict = decide(cards[a], cards[b])
            pairs.append({"a": rat(a), "b": rat(b), "verdict": verdict.kind, "route": verdict.route,
                          **({"detail": verdict_to_json(verdict, True)} if certificate else {})})
            if verdict.kind != "not_equivalent":
                parent[find(a)] = find(b)
    classes: dict = {}
    for v in values:
        classes.setdefault(find(v), []).append(rat(v))
    return {"template": template, "param": param, "values": [rat(v) for v in values], "pairs": pairs,
            "classes": sorted(classes.values())}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--bind", action="append", metavar="NAME=VALUE", help="bind a parameter to a rational")
    common.add_argument("--precision-bits", type=int, default=None)
    common.add_argument("--zero-tol", type=float, default=None)
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="pretty", action="store_false", help="compact canonical JSON (default)")
    fmt.add_argument("--pretty", dest="pretty", action="store_true", help="indented JSON")
    common.set_defaults(pretty=False)

    ap = argparse.ArgumentParser(prog="canyonlab", description="Identity cards and non-equivalence of plane germs.")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("card", parents=[common], help="print the identity card of a germ")
    p.add_argument("expr")
    p.add_argument("--trunc", type=Fraction, default=None, help="initial truncation order for polar arcs")
    p = sub.add_parser("compare", parents=[common], help="try to refute equivalence of two germs")
    p.add_argument("f")
    p.add_argument("g")
    p.add_argument("--certificate", action="store_true", help="include full refutation traces")
    p = sub.add_parser("sweep", parents=[common], help="pairwise comparison over parameter values")
    p.add_argument("template")
    p.add_argument("--param", required=True)
    p.add_argument("--values", required=True, help="comma separated rationals")
    p.add_argument("--certificate", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        binds = _bindings(args.bind)
        with working_precision(args.precision_bits, args.zero_tol):
            if args.command == "card":
                doc = cmd_card(args.expr, binds, args.trunc)
            elif args.command == "compare":
                doc = cmd_compare(args.f, args.g, binds, args.certificate)
            else:
                values = [v for v in args.values.split(",") if v.strip()]
                doc = cmd_sweep(args.template, args.param, values, binds, args.certificate)
    except ParseError as exc:
        print(dumps({"error": type(exc).__name__, "message": str(exc), "position": exc.position}, args.pretty))
        return EXIT_PARSE
    except (CanyonError, ValueError, ArithmeticError) as exc:
        print(dumps({"error": type(exc).__name__, "message": str(exc)}, args.pretty))
        return EXIT_COMPUTE
    print(dumps(doc, args.pretty))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
