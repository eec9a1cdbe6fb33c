"""Geometric skeleton of a germ: polars, Kuo-Lu tree, gradient degrees, canyons, clusters."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import count

import sympy

from .errors import (
    BarMismatch,
    InconsistentCanyon,
    PrecisionExhausted,
    TruncationAmbiguous,
    TruncationTooSmall,
)
from .numerics import Coeff, GaussRat, UPoly, as_coeff, upoly_roots
from .puiseux import (
    INF,
    BivarPoly,
    PuiseuxSeries,
    conjugates,
    newton_puiseux,
    series_contact,
    substitute_x,
)

__all__ = [
    "PolarArc",
    "Bar",
    "KuoLuTree",
    "Canyon",
    "ClusterKey",
    "Clusters",
    "Skeleton",
    "is_mini_regular",
    "mini_regularize",
    "tangent_cone",
    "exact_polar_factor",
    "polar_arcs",
    "f_roots",
    "kuo_lu_tree",
    "bar_of",
    "gradient_degree",
    "gradient_degree_formula",
    "derivative_orders",
    "group_canyons",
    "cluster",
    "skeleton",
]


@dataclass(frozen=True)
class PolarArc:
    arc: PuiseuxSeries
    multiplicity: int
    orbit: int
    value: PuiseuxSeries  # f(arc(y), y)
    h: Fraction
    a: Coeff
    direction: Coeff | None  # slope of the tangent line x = direction*y; None for {y = 0}
    tangent: int | None  # index into the tangent cone, None when not tangential
    d: Fraction | None = None
    bar_id: int | None = None

    @property
    def tangential(self) -> bool:
        return self.tangent is not None


@dataclass
class Bar:
    id: int
    height: Fraction
    members: tuple[int, ...]
    parent: int | None
    children: list[int] = field(default_factory=list)


@dataclass
class KuoLuTree:
    roots: list[tuple[PuiseuxSeries, int]]  # conjugate-expanded roots of f
    bars: list[Bar]

    def bar(self, bar_id: int) -> Bar:
        return self.bars[bar_id]

    def depth(self, bar_id: int) -> int:
        k, b = 0, self.bars[bar_id]
        while b.parent is not None:
            k += 1
            b = self.bars[b.parent]
        return k


@dataclass(frozen=True)
class Canyon:
    id: int
    members: tuple[int, ...]  # polar indices
    representative: PolarArc
    degree: Fraction
    h: Fraction
    a: Coeff
    tangent: int | None
    bar_id: int | None
    multiplicity: int

    @property
    def value(self) -> PuiseuxSeries:
        return self.representative.value

    @property
    def arc(self) -> PuiseuxSeries:
        return self.representative.arc


@dataclass(frozen=True)
class ClusterKey:
    tangent: int
    degree: Fraction
    bar_id: int
    h: Fraction


@dataclass
class Clusters:
    groups: dict[ClusterKey, tuple[int, ...]]  # canyon ids, sorted
    contacts: dict[tuple[int, int], Fraction]  # k(i, j) for canyons sharing a tangent line
    K: dict[int, tuple[Fraction, ...]]  # sorted multiset of contacts inside the cluster
    omega: dict[ClusterKey, list[tuple[int, ...]]]  # partition by equal K_i


# ---------------------------------------------------------------------------
# regularity and tangent cone


def is_mini_regular(f: BivarPoly) -> bool:
    m = f.order()
    return m > 0 and (m, 0) in f.monomials


def _shear_candidates():
    yield Fraction(0)
    for den in count(1):
        for num in range(1, 6 * den + 1):
            q = Fraction(num, den)
            if q.denominator != den:
                continue
            yield q
            yield -q


def mini_regularize(f: BivarPoly, max_tries: int = 500) -> tuple[BivarPoly, Fraction]:
    """``f(x, y + lam*x)`` for the first ``lam`` that makes ``f`` mini-regular in x.

    The search runs over 0, 1, -1, 2, -2, ... and then halves, thirds, ....
    """
    if f.is_zero():
        raise ValueError("zero germ")
    if (0, 0) in f.monomials:
        raise ValueError("germ does not vanish at the origin")
    for k, lam in enumerate(_shear_candidates()):
        if k > max_tries:
            break
        g = f if lam == 0 else f.substitute_linear(1, 0, lam, 1)
        if is_mini_regular(g):
            return g, lam
    raise ValueError("no regularizing shear found")


def tangent_cone(f: BivarPoly) -> list[Coeff]:
    """Slopes ``a`` of the lines ``x = a*y`` in the tangent cone of a mini-regular germ."""
    form = f.initial_form()
    poly = UPoly([as_coeff(form.get(i, GaussRat(0))) for i in range(max(form) + 1)])
    if poly.degree < 1:
        return []
    return [z for z, _ in upoly_roots(poly)]


def _tangent_index(cone: list[Coeff], slope: Coeff) -> int | None:
    for k, c in enumerate(cone):
        if c.overlaps(slope):
            return k
    return None


# ---------------------------------------------------------------------------
# polars


def _to_sympy(f: BivarPoly, xs, ys):
    expr = 0
    for (i, j), c in f.monomials.items():
        expr += (sympy.Rational(c.re.numerator, c.re.denominator)
                 + sympy.I * sympy.Rational(c.im.numerator, c.im.denominator)) * xs**i * ys**j
    return sympy.Poly(expr, xs, ys, domain=sympy.QQ_I)


def _from_sympy(p) -> BivarPoly:
    out = {}
    for (i, j), c in p.terms():
        re, im = sympy.re(c), sympy.im(c)
        out[(i, j)] = GaussRat(Fraction(int(re.p), int(re.q)), Fraction(int(im.p), int(im.q)))
    return BivarPoly(out)


def exact_polar_factor(f: BivarPoly) -> BivarPoly:
    """``f_x / gcd(f, f_x)``: its Puiseux roots are the roots of f_x that are not roots of f."""
    fx = f.diff_x()
    if not f.is_exact() or fx.is_zero():
        return fx
    xs, ys = sympy.symbols("x y")
    P, Q = _to_sympy(f, xs, ys), _to_sympy(fx, xs, ys)
    G = sympy.gcd(P, Q)
    q, r = sympy.div(Q, G)
    if not r.is_zero:
        raise ArithmeticError("inexact polynomial division")
    return _from_sympy(q)


def _direction(arc: PuiseuxSeries) -> Coeff | None:
    if not arc.terms:
        return Coeff(0)
    e, c = arc.terms[0]
    if e > 1:
        return Coeff(0)
    if e == 1:
        return c
    return None


def polar_arcs(f: BivarPoly, trunc, cone: list[Coeff] | None = None) -> list[PolarArc]:
    """Polar arcs of ``f`` with conjugates listed separately.

    Arcs of one conjugate orbit share ``orbit``.  ``d`` and ``bar_id`` are
    filled in later by :func:`skeleton`.
    """
    q = exact_polar_factor(f)
    if cone is None:
        cone = tangent_cone(f)
    out = []
    if q.deg_x < 1:
        return out
    for orbit, (rep, mult) in enumerate(newton_puiseux(q, trunc)):
        for arc in conjugates(rep):
            value = substitute_x(f, arc)
            if not value.terms:
                if value.trunc == INF:
                    continue  # a root of f after all
                raise TruncationAmbiguous("f vanishes along a polar to the available order")
            h, a = value.terms[0]
            direction = _direction(arc)
            tangent = None if direction is None else _tangent_index(cone, direction)
            out.append(PolarArc(arc, mult, orbit, value, h, a, direction, tangent))
    return out


def f_roots(f: BivarPoly, trunc) -> list[tuple[PuiseuxSeries, int]]:
    """Puiseux roots of ``f`` of positive order, conjugates listed separately."""
    out = []
    for rep, mult in newton_puiseux(f, trunc):
        out.extend((arc, mult) for arc in conjugates(rep))
    return out


# ---------------------------------------------------------------------------
# Kuo-Lu tree


def kuo_lu_tree(f: BivarPoly, trunc=None, roots=None) -> KuoLuTree:
    """Contact-order hierarchy of the roots of ``f``.

    A bar groups roots that agree below its height and split at it; its
    children are the classes of the relation ``contact > height``.
    """
    if roots is None:
        roots = f_roots(f, trunc if trunc is not None else 4 * max(f.deg_y, 1))
    n = len(roots)
    contact = {}
    for i in range(n):
        for j in range(i + 1, n):
            contact[(i, j)] = contact[(j, i)] = series_contact(roots[i][0], roots[j][0])
    bars: list[Bar] = []

    def build(members: tuple[int, ...], parent: int | None):
        height = min(contact[(i, j)] for i in members for j in members if i < j)
        bar = Bar(len(bars), height, members, parent)
        bars.append(bar)
        classes: list[list[int]] = []
        for i in members:
            for cls in classes:
                if contact[(i, cls[0])] > height:
                    cls.append(i)
                    break
            else:
                classes.append([i])
        for cls in classes:
            if len(cls) > 1:
                child = build(tuple(cls), bar.id)
                bar.children.append(child)
        return bar.id

    if n >= 2:
        build(tuple(range(n)), None)
    else:
        bars.append(Bar(0, Fraction(1), tuple(range(n)), None))
    return KuoLuTree(roots, bars)


def bar_of(tree: KuoLuTree, polar: PolarArc) -> int:
    """Deepest bar all of whose roots have contact at least its height with the polar."""
    contacts = [series_contact(polar.arc, z) for z, _ in tree.roots]
    total = sum((c * m for c, (_, m) in zip(contacts, tree.roots)), Fraction(0))
    if total != polar.h:
        raise BarMismatch(f"ord f(gamma) = {polar.h} but the root contacts sum to {total}")
    best, best_depth = 0, -1
    for bar in tree.bars:
        if all(contacts[i] >= bar.height for i in bar.members):
            depth = tree.depth(bar.id)
            if depth > best_depth:
                best, best_depth = bar.id, depth
    return best


# ---------------------------------------------------------------------------
# gradient degree


def _exact_ord(s: PuiseuxSeries):
    return s.ord(exact=True)


def derivative_orders(f: BivarPoly, arc: PuiseuxSeries):
    """``({k: ord d^k f_x/dx^k (arc)}, {k: ord d^k f_y/dx^k (arc)})`` for the nonzero derivatives."""
    fx, fy = f.diff_x(), f.diff_y()
    o, p = {}, {}
    k, g = 1, fx.diff_x()
    while not g.is_zero():
        o[k] = _exact_ord(substitute_x(g, arc))
        k, g = k + 1, g.diff_x()
    k, g = 0, fy
    while not g.is_zero():
        p[k] = _exact_ord(substitute_x(g, arc))
        k, g = k + 1, g.diff_x()
    return o, p


def gradient_degree_formula(f: BivarPoly, arc: PuiseuxSeries) -> Fraction:
    """Closed form ``max_k (lambda_inf - ord D_k)/k`` of the gradient degree (clamped at 1)."""
    o, p = derivative_orders(f, arc)
    p0 = p[0]
    best = Fraction(1)
    for k, v in o.items():
        if v != INF:
            best = max(best, Fraction(p0 - v) / k)
    for k, v in p.items():
        if k and v != INF:
            best = max(best, Fraction(p0 - v) / k)
    return best


def _lambda(f_x: BivarPoly, f_y: BivarPoly, arc: PuiseuxSeries, q: Fraction):
    """``ord min(f_x, f_y)`` along ``arc + u*y**q`` with ``u`` symbolic."""
    if q >= arc.trunc:
        raise TruncationTooSmall(f"perturbation exponent {q} beyond arc truncation {arc.trunc}")
    moved = arc + PuiseuxSeries([(q, UPoly.var())])
    return min(substitute_x(f_x, moved).ord(exact=True), substitute_x(f_y, moved).ord(exact=True))


def gradient_degree(f: BivarPoly, polar: PolarArc | PuiseuxSeries) -> Fraction:
    """Smallest ``q >= 1`` at which a generic perturbation ``u*y**q`` keeps the gradient order.

    ``u`` is carried as a polynomial indeterminate; ``lambda(q)`` is evaluated
    at the breakpoints of the piecewise linear function it is built from.
    """
    arc = polar.arc if isinstance(polar, PolarArc) else polar
    fx, fy = f.diff_x(), f.diff_y()
    if substitute_x(fx, arc).terms:
        raise ValueError("arc is not a polar: f_x does not vanish along it")
    o, p = derivative_orders(f, arc)
    lam_inf = p[0]
    if lam_inf == INF:
        raise ValueError("gradient vanishes identically along the arc")
    cands = {Fraction(1)}
    for k, v in o.items():
        if v != INF:
            cands.add(Fraction(lam_inf - v) / k)
    for k, v in p.items():
        if k and v != INF:
            cands.add(Fraction(lam_inf - v) / k)
    cands = sorted(c for c in cands if c >= 1)
    # lambda is nondecreasing; take the first breakpoint from which it is stable
    d = None
    for q in reversed(cands):
        if _lambda(fx, fy, arc, q) == lam_inf:
            d = q
        else:
            break
    if d is None:
        raise PrecisionExhausted("gradient order never stabilises at a breakpoint")
    return d


# ---------------------------------------------------------------------------
# canyons and clusters


def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def group_canyons(polars: list[PolarArc]) -> list[Canyon]:
    """Polars with equal degree ``d`` and mutual contact ``>= d`` share a canyon."""
    n = len(polars)
    parent = list(range(n))
    for i in range(n):
        for j in range(i + 1, n):
            if polars[i].d != polars[j].d:
                continue
            if series_contact(polars[i].arc, polars[j].arc) >= polars[i].d:
                parent[_find(parent, i)] = _find(parent, j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(_find(parent, i), []).append(i)
    out = []
    for members in sorted(groups.values()):
        rep = polars[members[0]]
        for m in members[1:]:
            other = polars[m]
            if other.h != rep.h or not other.a.overlaps(rep.a) or other.tangent != rep.tangent:
                raise InconsistentCanyon(f"polars {members[0]} and {m} share a canyon but differ in (h, a)")
        out.append(Canyon(len(out), tuple(members), rep, rep.d, rep.h, rep.a, rep.tangent, rep.bar_id,
                          sum(polars[m].multiplicity for m in members)))
    return out


def cluster(canyons: list[Canyon]) -> Clusters:
    """Key tangential canyons of degree > 1 by (tangent line, degree, bar)."""
    kept = [c for c in canyons if c.tangent is not None and c.degree > 1]
    groups: dict[ClusterKey, list[int]] = {}
    for c in kept:
        groups.setdefault(ClusterKey(c.tangent, c.degree, c.bar_id, c.h), []).append(c.id)
    contacts = {}
    for a in kept:
        for b in kept:
            if a.id < b.id and a.tangent == b.tangent:
                k = series_contact(a.arc, b.arc)
                contacts[(a.id, b.id)] = contacts[(b.id, a.id)] = k
    K = {}
    omega = {}
    for key, ids in groups.items():
        for i in ids:
            K[i] = tuple(sorted(contacts[(i, j)] for j in ids if j != i))
        classes: dict[tuple, list[int]] = {}
        for i in ids:
            classes.setdefault(K[i], []).append(i)
        omega[key] = [tuple(v) for _, v in sorted(classes.items())]
    return Clusters({k: tuple(v) for k, v in groups.items()}, contacts, K, omega)


# ---------------------------------------------------------------------------
# everything at once


@dataclass
class Skeleton:
    germ: BivarPoly  # as given
    f: BivarPoly  # mini-regular form actually analysed
    shear: Fraction
    cone: list[Coeff]
    polars: list[PolarArc]
    tree: KuoLuTree
    canyons: list[Canyon]
    clusters: Clusters
    polar_trunc: Fraction
    root_trunc: Fraction
    notes: list[str] = field(default_factory=list)


def _initial_trunc(f: BivarPoly) -> Fraction:
    return Fraction(max(8, 2 * f.deg_y))


def skeleton(f: BivarPoly, trunc=None, max_trunc=None) -> Skeleton:
    """Regularize ``f`` and compute polars, tree, degrees, canyons and clusters.

    Truncation orders adapt: they grow until every polar value is known past
    ``h + d + 2`` and every root contact is decided.
    """
    g, lam = mini_regularize(f)
    cone = tangent_cone(g)
    T = Fraction(trunc) if trunc is not None else _initial_trunc(g)
    cap = Fraction(max_trunc) if max_trunc is not None else max(T * 16, Fraction(256))
    while True:
        try:
            polars = polar_arcs(g, T, cone)
            polars = [replace(p, d=gradient_degree(g, p)) for p in polars]
            short = [p for p in polars if p.value.trunc < p.h + p.d + 2]
            if short:
                raise TruncationTooSmall("polar values not known far enough")
            break
        except (TruncationAmbiguous, TruncationTooSmall):
            if T >= cap:
                raise
            T *= 2
    h_max = max((p.h for p in polars), default=Fraction(1))
    TR = max(h_max + 2, _initial_trunc(g))
    while True:
        try:
            tree = kuo_lu_tree(g, roots=f_roots(g, TR))
            polars = [replace(p, bar_id=bar_of(tree, p)) for p in polars]
            break
        except (TruncationAmbiguous, TruncationTooSmall):
            if TR >= cap:
                raise
            TR *= 2
    canyons = group_canyons(polars)
    notes = [] if lam == 0 else [f"sheared by y -> y + ({lam})*x"]
    return Skeleton(f, g, lam, cone, polars, tree, canyons, cluster(canyons), T, TR, notes)
