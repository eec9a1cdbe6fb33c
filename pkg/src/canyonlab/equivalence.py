"""Refuting bi-Lipschitz equivalence of two germs.

For every way of matching the canyons of f with those of g that respects the
discrete invariants, the continuous invariants impose relations ``c**k = v``
on the scale constant ``c`` of each tangent line.  A matching dies if these
relations have no common solution, or if for every surviving ``c`` the
development of the second coordinate of phi cannot be made consistent.  The
germs are declared not equivalent only when every matching dies.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from .errors import CanyonError, CombinatorialBlowup, InconsistentDevelopment, PrecisionExhausted
from .invariants import (
    IdentityCard,
    branches,
    develop_phi2,
    identity_card,
    series_denominator,
)
from .numerics import Coeff, UPoly, as_coeff, nth_roots, upoly_roots
from .puiseux import BivarPoly, PuiseuxSeries, compose_series

__all__ = [
    "Matching",
    "ScaleConstraint",
    "Candidates",
    "Unsatisfiable",
    "Consistent",
    "Refuted",
    "MatchingRecord",
    "Verdict",
    "ROUTES",
    "canyon_key",
    "enumerate_matchings",
    "solve_scale_constraints",
    "group_constraints",
    "refined_check",
    "refute_matching",
    "replay",
    "decide",
]

ROUTES = ("discrete_invariants", "second_level_mismatch", "scale_constraints", "refined_check")


# ---------------------------------------------------------------------------
# matchings


@dataclass(frozen=True)
class Matching:
    canyons: tuple[tuple[int, int], ...]  # (canyon of f, canyon of g)
    tangents: tuple[tuple[int, int], ...]  # (tangent line of f, tangent line of g)

    def __getitem__(self, i: int) -> int:
        return dict(self.canyons)[i]

    def tangent(self, t: int) -> int:
        return dict(self.tangents)[t]


def canyon_key(card: IdentityCard, i: int):
    c = card.canyons[i]
    group = card.groups[c.tangent]
    contacts = tuple(sorted(card.contact(i, j) for j in group if j != i))
    return (c.degree, c.h, card.bar_height(i), card.cluster_size(i), card.clusters.K[i], contacts, len(group))


def enumerate_matchings(card_f: IdentityCard, card_g: IdentityCard, cap: int = 10**4) -> list[Matching]:
    """All canyon bijections preserving keys, tangent lines and pairwise contacts."""
    fs = sorted(card_f.canyons)
    gs = sorted(card_g.canyons)
    kf = {i: canyon_key(card_f, i) for i in fs}
    kg = {j: canyon_key(card_g, j) for j in gs}
    if sorted(map(repr, kf.values())) != sorted(map(repr, kg.values())):
        return []
    out: list[Matching] = []
    assign: dict[int, int] = {}
    tmap: dict[int, int] = {}

    def ok(i, j) -> bool:
        if kf[i] != kg[j] or j in assign.values():
            return False
        ti, tj = card_f.canyons[i].tangent, card_g.canyons[j].tangent
        if ti in tmap and tmap[ti] != tj:
            return False
        if ti not in tmap and tj in tmap.values():
            return False
        for i2, j2 in assign.items():
            if card_f.canyons[i2].tangent == ti and card_f.contact(i, i2) != card_g.contact(j, j2):
                return False
        return True

    def walk(k: int):
        if k == len(fs):
            if len(out) >= cap:
                raise CombinatorialBlowup(f"more than {cap} canyon matchings")
            out.append(Matching(tuple(sorted(assign.items())), tuple(sorted(tmap.items()))))
            return
        i = fs[k]
        for j in gs:
            if ok(i, j):
                ti = card_f.canyons[i].tangent
                fresh = ti not in tmap
                assign[i] = j
                if fresh:
                    tmap[ti] = card_g.canyons[j].tangent
                walk(k + 1)
                del assign[i]
                if fresh:
                    del tmap[ti]

    walk(0)
    return out


# ---------------------------------------------------------------------------
# scale constraints


@dataclass(frozen=True)
class ScaleConstraint:
    """``c**exponent = value``."""

    exponent: Fraction
    value: Coeff
    source: str = ""

    @property
    def p(self) -> int:
        return Fraction(self.exponent).numerator

    @property
    def q(self) -> int:
        return Fraction(self.exponent).denominator

    def weak(self) -> tuple[int, Coeff]:
        """The necessary integer form ``c**p = value**q``."""
        return self.p, as_coeff(self.value) ** self.q


@dataclass(frozen=True)
class Candidates:
    g: int
    z: Coeff
    values: tuple[Coeff, ...]


@dataclass(frozen=True)
class Unsatisfiable:
    g: int
    z: Coeff
    failing: int  # index of the constraint whose consistency check fails
    lhs: Coeff  # z**(p/g)
    rhs: Coeff  # value**q


def _bezout(ps: list[int]) -> tuple[int, list[int]]:
    g, coeffs = ps[0], [1] + [0] * (len(ps) - 1)
    for k in range(1, len(ps)):
        # extended Euclid on (g, ps[k])
        old_r, r, old_s, s, old_t, t = g, ps[k], 1, 0, 0, 1
        while r:
            quo = old_r // r
            old_r, r = r, old_r - quo * r
            old_s, s = s, old_s - quo * s
            old_t, t = t, old_t - quo * t
        if old_r < 0:
            old_r, old_s, old_t = -old_r, -old_s, -old_t
        coeffs = [a * old_s for a in coeffs]
        coeffs[k] = old_t
        g = old_r
    return g, coeffs


def solve_scale_constraints(constraints) -> Candidates | Unsatisfiable:
    """Common solutions ``c`` of ``c**p_i = w_i`` (integer forms of the constraints).

    With ``g = gcd(p_i) = sum alpha_i p_i`` any solution has
    ``c**g = z := prod w_i**alpha_i``; the system is solvable iff
    ``z**(p_i/g) = w_i`` for all i, and then the solutions are the g-th roots of z.
    """
    if not constraints:
        raise ValueError("no constraints")
    weak = [c.weak() for c in constraints]
    ps = [p for p, _ in weak]
    g, alpha = _bezout(ps)
    z = Coeff(1)
    for (p, w), a in zip(weak, alpha):
        if a:
            z = z * (w ** a)
    for k, (p, w) in enumerate(weak):
        lhs = z ** (p // g)
        if not lhs.overlaps(w):
            return Unsatisfiable(g, z, k, lhs, w)
    return Candidates(g, z, tuple(nth_roots(z, g)))


def group_constraints(card_f: IdentityCard, card_g: IdentityCard, m: Matching, tangent: int):
    """Constraints on the scale constant of one tangent line, or a level mismatch.

    Returns ``(constraints, mismatch)``; ``mismatch`` describes an invariant
    order that differs between matched records.
    """
    ids = card_f.groups[tangent]
    out = []
    for i in ids:
        (h, a), (_, b) = card_f.first[i], card_g.first[m[i]]
        out.append(ScaleConstraint(h, a / b, f"first_level {i}->{m[i]}"))
    for i in ids:
        for j in ids:
            if i >= j or (i, j) not in card_f.second:
                continue
            rf, rg = card_f.second[(i, j)], card_g.second.get((m[i], m[j]))
            if rg is None:
                return out, f"second level ({i},{j}) has no counterpart"
            if rf.applicable != rg.applicable or (rf.applicable and rf.H != rg.H):
                return out, (f"second level ({i},{j}): H={rf.H} applicable={rf.applicable} vs "
                             f"({m[i]},{m[j]}): H={rg.H} applicable={rg.applicable}")
            if rf.applicable:
                out.append(ScaleConstraint(rf.H - rf.h, rf.diff / rg.diff, f"second_level ({i},{j})"))
    for key, rf in card_f.third.items():
        if card_f.canyons[key[0]].tangent != tangent:
            continue
        rg = card_g.third.get(tuple(m[k] for k in key))
        if rg is None:
            return out, f"third level {key} has no counterpart"
        if rf.applicable != rg.applicable or (rf.applicable and (rf.H_prime != rg.H_prime or rf.H != rg.H)):
            return out, (f"third level {key}: H'={rf.H_prime} applicable={rf.applicable} vs "
                         f"H'={rg.H_prime} applicable={rg.applicable}")
        if rf.applicable:
            out.append(ScaleConstraint(rf.H_prime - rf.H, rf.diff / rg.diff, f"third_level {key}"))
    return out, None


# ---------------------------------------------------------------------------
# refined check


@dataclass(frozen=True)
class Consistent:
    pass


@dataclass(frozen=True)
class Refuted:
    pair: tuple[int, int]  # canyons of f; (i, i) for a failed development
    exponent: Fraction | None
    lhs: object
    rhs: object
    development: tuple = ()  # (beta, r) terms used on the first branch tried
    reason: str = ""


def _p_system(eqs) -> tuple[Fraction, str] | None:
    """First exponent at which the equations ``poly_e(p) = 0`` become unsolvable."""
    for e, poly in eqs:
        if poly.degree == 0 and poly.coeffs[0].certainly_nonzero():
            return e, "no value of p cancels this term"
    free = [(e, q) for e, q in eqs if q.degree >= 1]
    if not free:
        return None
    e0, q0 = free[0]
    try:
        roots = [z for z, _ in upoly_roots(q0)]
    except PrecisionExhausted:
        return None
    for z in roots:
        if all(not q(z).certainly_nonzero() for _, q in eqs):
            return None
    last = max(e for e, _ in free)
    return last, "equations in p are inconsistent"


def _as_upoly(c) -> UPoly:
    return c if isinstance(c, UPoly) else UPoly([c])


def _pair_refutes(card_f, card_g, m, i, j, bi, bj, c):
    """Refuted record if the pair (i, j) is inconsistent for branches ``bi``, ``bj``; else None."""
    ci, cj = card_f.canyons[i], card_f.canyons[j]
    gi, gj = card_g.canyons[m[i]], card_g.canyons[m[j]]
    try:
        dev = develop_phi2((ci.h, ci.value), (gi.h, gi.value), c, ci.degree, bi)
    except InconsistentDevelopment as exc:
        return Refuted((i, i), exc.exponent, exc.residual, None, (), "development of phi_2 breaks down")
    if i == j:
        return None
    delta = card_f.contact(i, j)
    top = min(cj.h + ci.degree - 2, cj.h + cj.degree - 1)
    last = cj.h + delta - 1
    Y = dev.P + PuiseuxSeries([(delta, UPoly.var())])
    rhs = compose_series(gj.value, Y, top, bj.pow)
    resid = (cj.value - rhs).truncate(top)
    eqs = [(e, _as_upoly(q)) for e, q in resid.terms if e <= last]
    bad = _p_system(eqs)
    if bad is None:
        return None
    e, why = bad
    return Refuted((i, j), e, cj.value.coeff(e), rhs.coeff(e), dev.terms, why)


def refined_check(card_f: IdentityCard, card_g: IdentityCard, m: Matching, c, tangent: int | None = None):
    """Consistent, or Refuted when some pair of canyons fails for every branch of ``c``."""
    c = as_coeff(c)
    tangents = [tangent] if tangent is not None else list(card_f.groups)
    for t in tangents:
        ids = card_f.groups[t]
        N = series_denominator(*(card_g.canyons[m[i]].value for i in ids))
        bs = branches(c, N)
        for i in ids:
            for j in ids:
                combos = [(bi, bj) for bi in bs for bj in (bs if i != j else bs[:1])]
                first = None
                for bi, bj in combos:
                    r = _pair_refutes(card_f, card_g, m, i, j, bi, bj, c)
                    if r is None:
                        break
                    first = first or r
                else:
                    return first
    return Consistent()


# ---------------------------------------------------------------------------
# decision


@dataclass
class MatchingRecord:
    matching: Matching | None
    refuted: bool
    route: str | None
    detail: dict = field(default_factory=dict)


@dataclass
class Verdict:
    kind: str  # "not_equivalent" or "inconclusive"
    records: list[MatchingRecord]
    notes: list[str] = field(default_factory=list)

    @property
    def route(self) -> str | None:
        if self.kind != "not_equivalent":
            return None
        used = [r.route for r in self.records if r.route]
        return max(used, key=ROUTES.index) if used else None


def refute_matching(card_f: IdentityCard, card_g: IdentityCard, m: Matching) -> MatchingRecord:
    groups = {}
    for t in card_f.groups:
        cons, mismatch = group_constraints(card_f, card_g, m, t)
        if mismatch:
            return MatchingRecord(m, True, "second_level_mismatch", {"tangent": t, "mismatch": mismatch})
        sol = solve_scale_constraints(cons)
        if isinstance(sol, Unsatisfiable):
            return MatchingRecord(m, True, "scale_constraints",
                                  {"tangent": t, "constraints": cons, "solution": sol})
        groups[t] = (cons, sol)
    for t, (cons, sol) in groups.items():
        kills = []
        for c in sol.values:
            r = refined_check(card_f, card_g, m, c, t)
            if not isinstance(r, Refuted):
                break
            kills.append((c, r))
        else:
            return MatchingRecord(m, True, "refined_check",
                                  {"tangent": t, "constraints": cons, "solution": sol, "refutations": kills})
    return MatchingRecord(m, False, None, {"groups": groups})


def replay(card_f: IdentityCard, card_g: IdentityCard, rec: MatchingRecord) -> bool:
    """Recompute the refutation of one record from the two cards."""
    if rec.route == "discrete_invariants":
        return not enumerate_matchings(card_f, card_g)
    m, t = rec.matching, rec.detail["tangent"]
    cons, mismatch = group_constraints(card_f, card_g, m, t)
    if rec.route == "second_level_mismatch":
        return mismatch is not None
    if mismatch is not None:
        return False
    sol = solve_scale_constraints(cons)
    if rec.route == "scale_constraints":
        return isinstance(sol, Unsatisfiable)
    if rec.route == "refined_check":
        return isinstance(sol, Candidates) and all(
            isinstance(refined_check(card_f, card_g, m, c, t), Refuted) for c in sol.values)
    return False


def decide(f: BivarPoly | IdentityCard, g: BivarPoly | IdentityCard, cap: int = 10**4) -> Verdict:
    """``not_equivalent`` when every invariant-respecting matching is refuted, else ``inconclusive``."""
    try:
        card_f = f if isinstance(f, IdentityCard) else identity_card(f)
        card_g = g if isinstance(g, IdentityCard) else identity_card(g)
        matchings = enumerate_matchings(card_f, card_g, cap)
    except CanyonError as exc:
        return Verdict("inconclusive", [], [f"{type(exc).__name__}: {exc}"])
    if not matchings:
        detail = {"f": sorted(map(repr, (canyon_key(card_f, i) for i in card_f.canyons))),
                  "g": sorted(map(repr, (canyon_key(card_g, j) for j in card_g.canyons)))}
        return Verdict("not_equivalent", [MatchingRecord(None, True, "discrete_invariants", detail)])
    records, notes = [], []
    for m in matchings:
        try:
            rec = refute_matching(card_f, card_g, m)
        except CanyonError as exc:
            rec = MatchingRecord(m, False, None, {"error": f"{type(exc).__name__}: {exc}"})
            notes.append(f"matching {m.canyons}: {type(exc).__name__}")
        records.append(rec)
    kind = "not_equivalent" if all(r.refuted for r in records) else "inconclusive"
    return Verdict(kind, records, notes)
