"""The invariant ladder of a germ and the development of the second coordinate of phi."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import lcm

from .errors import InconsistentDevelopment, NotApplicable, TruncationTooSmall
from .numerics import Coeff, as_coeff, nth_roots
from .puiseux import INF, BivarPoly, PuiseuxSeries, compose_series, series_contact
from .singularity import Canyon, Skeleton, skeleton

__all__ = [
    "SecondLevel",
    "ThirdLevel",
    "Branch",
    "Development",
    "IdentityCard",
    "first_level",
    "normalized_value",
    "second_level",
    "third_level",
    "branches",
    "develop_phi2",
    "identity_card",
]


@dataclass(frozen=True)
class SecondLevel:
    pair: tuple[int, int]
    h: Fraction
    delta: Fraction
    H: Fraction | float
    a_tilde: tuple[Coeff, Coeff] | None
    diff: Coeff | None
    applicable: bool

    @property
    def bound(self) -> Fraction:
        return self.h + self.delta - 1


@dataclass(frozen=True)
class ThirdLevel:
    triple: tuple[int, int, int]
    h: Fraction | None
    H: Fraction | float | None
    H_prime: Fraction | float | None
    delta: Fraction
    delta_prime: Fraction
    A: tuple[Coeff, Coeff] | None  # (A_12, A_31)
    diff: Coeff | None
    applicable: bool
    reason: str = ""


def first_level(canyon: Canyon) -> tuple[Fraction, Coeff]:
    if canyon.degree <= 1 or canyon.tangent is None:
        raise NotApplicable("first-level pair needs a tangential canyon of degree > 1")
    return canyon.h, canyon.a


def normalized_value(canyon: Canyon) -> PuiseuxSeries:
    """``f(gamma(y), y) / a`` along the canyon representative."""
    return canyon.value / canyon.a


def _need(s: PuiseuxSeries, t):
    if s.trunc < t:
        raise TruncationTooSmall(f"series known to O(y^{s.trunc}), need O(y^{t})")


def second_level(ci: Canyon, cj: Canyon) -> SecondLevel:
    """``H = ord(s_i - s_j)`` and ``diff`` of the ``y**H`` coefficients, ``s = f(gamma)/a``."""
    if ci.id == cj.id:
        raise ValueError("second level needs two distinct canyons")
    if ci.h != cj.h:
        raise NotApplicable(f"orders differ: {ci.h} vs {cj.h}")
    h = ci.h
    delta = series_contact(ci.arc, cj.arc)
    bound = h + delta - 1
    si, sj = normalized_value(ci), normalized_value(cj)
    _need(si, bound)
    _need(sj, bound)
    gap = (si - sj).truncate(bound)
    if not gap.terms:
        return SecondLevel((ci.id, cj.id), h, delta, INF, None, None, False)
    H = gap.ord()
    ai, aj = as_coeff(si.coeff(H)), as_coeff(sj.coeff(H))
    return SecondLevel((ci.id, cj.id), h, delta, H, (ai, aj), ai - aj, True)


def third_level(c1: Canyon, c2: Canyon, c3: Canyon) -> ThirdLevel:
    """Level three for the pivot ``c1``: compare ``(s1-s2)/(a~1-a~2)`` with ``(s3-s1)/(a~3-a~1)``."""
    ids = (c1.id, c2.id, c3.id)
    if len(set(ids)) != 3:
        raise ValueError("third level needs three distinct canyons")
    delta = series_contact(c1.arc, c2.arc)
    delta_p = series_contact(c1.arc, c3.arc)
    if not c1.h == c2.h == c3.h:
        return ThirdLevel(ids, None, None, None, delta, delta_p, None, None, False, "orders differ")
    h = c1.h
    bound = min(h + delta - 1, h + delta_p - 1)
    s1, s2, s3 = (normalized_value(c) for c in (c1, c2, c3))
    for s in (s1, s2, s3):
        _need(s, bound)
    d12 = (s1 - s2).truncate(bound)
    d31 = (s3 - s1).truncate(bound)
    if not d12.terms or not d31.terms:
        return ThirdLevel(ids, h, INF, None, delta, delta_p, None, None, False, "difference vanishes below bound")
    H = d12.ord()
    if d31.ord() != H:
        return ThirdLevel(ids, h, None, None, delta, delta_p, None, None, False, "H orders differ")
    n12 = d12 / as_coeff(d12.coeff(H))
    n31 = d31 / as_coeff(d31.coeff(H))
    gap = (n12 - n31).truncate(bound)
    if not gap.terms:
        return ThirdLevel(ids, h, H, INF, delta, delta_p, None, None, False, "normalized differences agree below bound")
    Hp = gap.ord()
    A12, A31 = as_coeff(n12.coeff(Hp)), as_coeff(n31.coeff(Hp))
    return ThirdLevel(ids, h, H, Hp, delta, delta_p, (A12, A31), A12 - A31, True)


# ---------------------------------------------------------------------------
# development of phi_2 along a polar


@dataclass(frozen=True)
class Branch:
    """A choice ``chat`` with ``chat**N == c``; fractional powers ``c**e`` mean ``chat**(e*N)``."""

    c: Coeff
    N: int
    chat: Coeff

    def pow(self, e) -> Coeff:
        k = Fraction(e) * self.N
        if k.denominator != 1:
            raise ValueError(f"exponent {e} not in (1/{self.N})Z")
        return self.chat ** int(k)


def branches(c, N: int) -> list[Branch]:
    c = as_coeff(c)
    if N == 1:
        return [Branch(c, 1, c)]
    return [Branch(c, N, r) for r in nth_roots(c, N)]


def series_denominator(*series: PuiseuxSeries) -> int:
    return reduce(lcm, (s.denominator() for s in series), 1)


@dataclass(frozen=True)
class Development:
    c: Coeff
    terms: tuple[tuple[Fraction, Coeff], ...]  # (beta_k, r_k), starting with (1, c)
    cutoff: Fraction
    branch: Branch | None = None

    @property
    def P(self) -> PuiseuxSeries:
        return PuiseuxSeries(list(self.terms))


def develop_phi2(f_data, g_data, c, d, branch: Branch | None = None, max_steps: int = 200) -> Development:
    """Solve ``series_f(y) = series_g(P(y))`` for ``P = c*y + sum r_k y**beta_k``, ``beta_k < d - 1``.

    ``f_data`` and ``g_data`` are ``(h, series)`` pairs.  Each step reads the
    lowest exponent ``e`` of the residual and cancels it with
    ``beta = e - h + 1``, ``r = rho*c/(a*h)``, ``a`` the leading coefficient
    of ``series_f``.
    """
    h, sf = f_data
    hg, sg = g_data
    h, d = Fraction(h), Fraction(d)
    if h != hg:
        raise InconsistentDevelopment(min(h, hg), None, "orders along the polars differ")
    c = as_coeff(c)
    if branch is None:
        branch = branches(c, series_denominator(sg))[0]
    top = h + d - 2  # residual exponents at or above this no longer constrain P
    _need(sf, top)
    _need(sg, top)
    a = as_coeff(sf.leading()[1])
    terms = [(Fraction(1), c)]
    for _ in range(max_steps):
        P = PuiseuxSeries(terms)
        resid = (sf - compose_series(sg, P, top, branch.pow)).truncate(top)
        if not resid.terms:
            break
        e, rho = resid.terms[0]
        if e <= h:
            raise InconsistentDevelopment(e, rho)
        beta = e - h + 1
        if beta >= d - 1:
            break
        terms.append((beta, rho * c / (a * h)))
    else:
        raise InconsistentDevelopment(None, None, "development did not terminate")
    return Development(c, tuple(terms), d - 1, branch)


# ---------------------------------------------------------------------------
# identity card


@dataclass
class IdentityCard:
    skeleton: Skeleton
    canyons: dict[int, Canyon]  # tangential canyons of degree > 1, by id
    groups: dict[int, tuple[int, ...]]  # tangent index -> canyon ids
    first: dict[int, tuple[Fraction, Coeff]]
    second: dict[tuple[int, int], SecondLevel]
    third: dict[tuple[int, int, int], ThirdLevel]
    notes: list[str] = field(default_factory=list)

    @property
    def clusters(self):
        return self.skeleton.clusters

    def contact(self, i: int, j: int) -> Fraction:
        return self.skeleton.clusters.contacts[(i, j)]

    def bar_height(self, i: int) -> Fraction:
        return self.skeleton.tree.bar(self.canyons[i].bar_id).height

    def cluster_size(self, i: int) -> int:
        for ids in self.skeleton.clusters.groups.values():
            if i in ids:
                return len(ids)
        raise KeyError(i)


def _flip(rec: SecondLevel) -> SecondLevel:
    if not rec.applicable:
        return SecondLevel(rec.pair[::-1], rec.h, rec.delta, rec.H, None, None, False)
    return SecondLevel(rec.pair[::-1], rec.h, rec.delta, rec.H, rec.a_tilde[::-1], -rec.diff, True)


def identity_card(f: BivarPoly | Skeleton, **kw) -> IdentityCard:
    sk = f if isinstance(f, Skeleton) else skeleton(f, **kw)
    kept = {c.id: c for c in sk.canyons if c.tangent is not None and c.degree > 1}
    groups: dict[int, list[int]] = {}
    for c in kept.values():
        groups.setdefault(c.tangent, []).append(c.id)
    first = {i: first_level(c) for i, c in kept.items()}
    second = {}
    third = {}
    for ids in groups.values():
        for i in ids:
            for j in ids:
                if i < j and kept[i].h == kept[j].h:
                    rec = second_level(kept[i], kept[j])
                    second[(i, j)] = rec
                    second[(j, i)] = _flip(rec)
        for i in ids:
            for j in ids:
                for k in ids:
                    if len({i, j, k}) == 3:
                        third[(i, j, k)] = third_level(kept[i], kept[j], kept[k])
    return IdentityCard(sk, kept, {t: tuple(sorted(v)) for t, v in sorted(groups.items())},
                        first, second, third, list(sk.notes))
