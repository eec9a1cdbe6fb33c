"""Canonical JSON for cards and verdicts.

Rationals are ``"p/q"`` strings, infinite orders are ``"inf"``, and complex
balls are ``{"re", "im", "rad"}`` plus ``"rational"`` when the ball pins down
a Gaussian rational of small height.  Keys are sorted on output so equal inputs
give byte-identical documents.
"""
from __future__ import annotations

import json
from fractions import Fraction

from .equivalence import Candidates, MatchingRecord, Refuted, ScaleConstraint, Unsatisfiable, Verdict
from .invariants import IdentityCard, SecondLevel, ThirdLevel
from .numerics import Coeff, UPoly, get_config
from .parser import render
from .puiseux import INF, PuiseuxSeries

__all__ = ["rat", "coeff", "series", "card_to_json", "verdict_to_json", "dumps"]

DIGITS = 40


def rat(q) -> str | None:
    if q is None:
        return None
    if q == INF:
        return "inf"
    return str(Fraction(q))


def coeff(c) -> dict | None:
    if c is None:
        return None
    if isinstance(c, UPoly):
        return {"upoly": [coeff(k) for k in c.coeffs]}
    c = c if isinstance(c, Coeff) else Coeff(c)
    re, im = c.mid_strings(DIGITS)
    out = {"re": re, "im": im, "rad": f"{float(c.radius.upper()):.3e}"}
    g = c.recognize()
    if g is not None:
        out["rational"] = str(g)
    return out


def series(s: PuiseuxSeries) -> dict:
    return {"terms": [{"e": rat(e), "c": coeff(c)} for e, c in s.terms], "trunc": rat(s.trunc)}


def _second(r: SecondLevel) -> dict:
    return {
        "pair": list(r.pair),
        "h": rat(r.h),
        "delta": rat(r.delta),
        "bound": rat(r.bound),
        "H": rat(r.H),
        "a_tilde": [coeff(a) for a in r.a_tilde] if r.a_tilde else None,
        "diff": coeff(r.diff),
        "applicable": r.applicable,
    }


def _third(r: ThirdLevel) -> dict:
    return {
        "triple": list(r.triple),
        "h": rat(r.h),
        "H": rat(r.H),
        "H_prime": rat(r.H_prime),
        "delta": rat(r.delta),
        "delta_prime": rat(r.delta_prime),
        "A": [coeff(a) for a in r.A] if r.A else None,
        "diff": coeff(r.diff),
        "applicable": r.applicable,
        "reason": r.reason,
    }


def card_to_json(card: IdentityCard) -> dict:
    sk = card.skeleton
    cfg = get_config()
    cl = sk.clusters
    return {
        "germ": render(sk.germ) if sk.germ.is_exact() else None,
        "analysed": render(sk.f) if sk.f.is_exact() else None,
        "shear": rat(sk.shear),
        "precision_bits": cfg.precision_bits,
        "zero_tol": repr(cfg.zero_tol),
        "trunc": {"polars": rat(sk.polar_trunc), "roots": rat(sk.root_trunc)},
        "tangent_cone": [coeff(a) for a in sk.cone],
        "polars": [
            {
                "arc": series(p.arc),
                "orbit": p.orbit,
                "multiplicity": p.multiplicity,
                "h": rat(p.h),
                "a": coeff(p.a),
                "d": rat(p.d),
                "bar": p.bar_id,
                "tangent": p.tangent,
                "tangential": p.tangential,
            }
            for p in sk.polars
        ],
        "kuo_lu_tree": {
            "roots": len(sk.tree.roots),
            "bars": [
                {"id": b.id, "height": rat(b.height), "members": list(b.members), "parent": b.parent,
                 "children": list(b.children)}
                for b in sk.tree.bars
            ],
        },
        "canyons": [
            {"id": c.id, "members": list(c.members), "d": rat(c.degree), "h": rat(c.h), "a": coeff(c.a),
             "tangent": c.tangent, "bar": c.bar_id, "in_card": c.id in card.canyons}
            for c in sk.canyons
        ],
        "clusters": [
            {"tangent": k.tangent, "d": rat(k.degree), "bar": k.bar_id, "h": rat(k.h), "canyons": list(ids),
             "omega": [list(w) for w in cl.omega[k]]}
            for k, ids in sorted(cl.groups.items(), key=lambda kv: (kv[0].tangent, kv[0].degree, kv[0].bar_id))
        ],
        "contacts": [{"i": i, "j": j, "k": rat(k)} for (i, j), k in sorted(cl.contacts.items()) if i < j],
        "K": {str(i): [rat(k) for k in ks] for i, ks in sorted(cl.K.items())},
        "first_level": [{"canyon": i, "h": rat(h), "a": coeff(a)} for i, (h, a) in sorted(card.first.items())],
        "second_level": [_second(r) for k, r in sorted(card.second.items()) if k[0] < k[1]],
        "third_level": [_third(r) for _, r in sorted(card.third.items())],
        "notes": list(card.notes),
    }


def _constraint(c: ScaleConstraint) -> dict:
    p, w = c.weak()
    return {"exponent": rat(c.exponent), "value": coeff(c.value), "source": c.source,
            "integer_form": {"p": p, "q": c.q, "w": coeff(w)}}


def _solution(s) -> dict:
    if isinstance(s, Unsatisfiable):
        return {"kind": "unsatisfiable", "g": s.g, "z": coeff(s.z), "failing": s.failing,
                "lhs": coeff(s.lhs), "rhs": coeff(s.rhs)}
    if isinstance(s, Candidates):
        return {"kind": "candidates", "g": s.g, "z": coeff(s.z), "values": [coeff(v) for v in s.values]}
    return None


def _refuted(r: Refuted) -> dict:
    return {"pair": list(r.pair), "exponent": rat(r.exponent), "lhs": coeff(r.lhs), "rhs": coeff(r.rhs),
            "development": [{"beta": rat(b), "r": coeff(v)} for b, v in r.development], "reason": r.reason}


def _record(rec: MatchingRecord, full: bool) -> dict:
    out = {
        "matching": [list(p) for p in rec.matching.canyons] if rec.matching else None,
        "refuted": rec.refuted,
        "route": rec.route,
    }
    if not full:
        return out
    d = rec.detail
    if "tangent" in d:
        out["tangent"] = d["tangent"]
    if "mismatch" in d:
        out["mismatch"] = d["mismatch"]
    if "constraints" in d:
        out["constraints"] = [_constraint(c) for c in d["constraints"]]
    if "solution" in d:
        out["solution"] = _solution(d["solution"])
    if "refutations" in d:
        out["refutations"] = [{"c": coeff(c), **_refuted(r)} for c, r in d["refutations"]]
    if "f" in d and "g" in d:
        out["keys"] = {"f": d["f"], "g": d["g"]}
    if "error" in d:
        out["error"] = d["error"]
    return out


def verdict_to_json(v: Verdict, certificate: bool = False) -> dict:
    return {
        "verdict": v.kind,
        "route": v.route,
        "matchings": sum(1 for r in v.records if r.matching is not None),
        "records": [_record(r, certificate) for r in v.records],
        "notes": list(v.notes),
    }


def dumps(doc, pretty: bool = False) -> str:
    if pretty:
        return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False)
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
