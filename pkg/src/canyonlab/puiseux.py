"""Truncated fractional power series in y and the Newton-Puiseux solver.

A :class:`PuiseuxSeries` is a finite sum of terms ``c * y**e`` (``e``
rational) known modulo ``O(y**trunc)``.  ``trunc`` is ``math.inf`` for series
that are exact, such as polynomials or roots that terminate.  Coefficients are
usually :class:`~canyonlab.numerics.Coeff`, but any ring element with
``is_zero()`` works, which is how a symbolic unknown rides along as a
:class:`~canyonlab.numerics.UPoly`.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce
from math import lcm

from .errors import PrecisionExhausted, TruncationAmbiguous, TruncationTooSmall
from .numerics import Coeff, GaussRat, UPoly, as_coeff, get_config, root_of_unity, upoly_roots, working_precision

__all__ = [
    "INF",
    "PuiseuxSeries",
    "BivarPoly",
    "ord",
    "series_arith",
    "substitute_x",
    "compose_rational_power",
    "compose_series",
    "conjugates",
    "contact_order",
    "series_contact",
    "newton_puiseux",
]

INF = math.inf


def _rat(e) -> Fraction:
    return e if isinstance(e, Fraction) else Fraction(e)


def _is_zero(c) -> bool:
    if isinstance(c, GaussRat):
        return not c
    return c.is_zero()


def _binom(h: Fraction, k: int) -> Fraction:
    out = Fraction(1)
    for j in range(k):
        out = out * (h - j) / (j + 1)
    return out


class PuiseuxSeries:
    """``sum c_e y**e + O(y**trunc)`` with strictly increasing rational exponents."""

    __slots__ = ("terms", "trunc")

    def __init__(self, terms=(), trunc=INF):
        trunc = INF if trunc == INF else _rat(trunc)
        items = terms.items() if isinstance(terms, dict) else terms
        acc: dict[Fraction, object] = {}
        for e, c in items:
            e = _rat(e)
            if e >= trunc:
                continue
            if not isinstance(c, (Coeff, UPoly)):
                c = as_coeff(c)
            acc[e] = acc[e] + c if e in acc else c
        self.terms = tuple((e, acc[e]) for e in sorted(acc) if not _is_zero(acc[e]))
        self.trunc = trunc

    # construction -----------------------------------------------------------
    @classmethod
    def _raw(cls, terms, trunc) -> PuiseuxSeries:
        """Trusted constructor: ``terms`` already sorted, reduced and nonzero."""
        out = object.__new__(cls)
        out.terms = tuple(terms)
        out.trunc = trunc
        return out

    @classmethod
    def monomial(cls, c, e, trunc=INF) -> PuiseuxSeries:
        return cls([(e, c)], trunc)

    @classmethod
    def zero(cls, trunc=INF) -> PuiseuxSeries:
        return cls((), trunc)

    # queries ----------------------------------------------------------------
    def ord(self, exact: bool = False):
        if self.terms:
            return self.terms[0][0]
        if exact and self.trunc != INF:
            raise TruncationAmbiguous(f"series vanishes to O(y^{self.trunc}); order unknown")
        return INF

    def leading(self):
        if not self.terms:
            raise TruncationAmbiguous("series has no known terms")
        return self.terms[0]

    def coeff(self, e):
        e = _rat(e)
        if e >= self.trunc:
            raise TruncationTooSmall(f"coefficient of y^{e} lies beyond O(y^{self.trunc})")
        for ee, c in self.terms:
            if ee == e:
                return c
        return Coeff(0)

    def exponents(self) -> list[Fraction]:
        return [e for e, _ in self.terms]

    def denominator(self) -> int:
        return reduce(lcm, (e.denominator for e, _ in self.terms), 1)

    def is_exact(self) -> bool:
        return self.trunc == INF

    def is_zero(self) -> bool:
        """True when no term is known; the series is then ``O(y**trunc)``."""
        return not self.terms

    def _low(self):
        return self.terms[0][0] if self.terms else self.trunc

    # arithmetic -------------------------------------------------------------
    def truncate(self, t) -> PuiseuxSeries:
        t = min(self.trunc, t if t == INF else _rat(t))
        return PuiseuxSeries._raw([(e, c) for e, c in self.terms if e < t], t)

    def __add__(self, other):
        if not isinstance(other, PuiseuxSeries):
            other = PuiseuxSeries([(0, other)])
        t = min(self.trunc, other.trunc)
        a, b = self.terms, other.terms
        out, i, j = [], 0, 0
        while i < len(a) or j < len(b):
            if j == len(b) or (i < len(a) and a[i][0] < b[j][0]):
                e, c = a[i]
                i += 1
            elif i == len(a) or b[j][0] < a[i][0]:
                e, c = b[j]
                j += 1
            else:
                e, c = a[i][0], a[i][1] + b[j][1]
                i += 1
                j += 1
                if _is_zero(c):
                    continue
            if e >= t:
                break
            out.append((e, c))
        return PuiseuxSeries._raw(out, t)

    __radd__ = __add__

    def __neg__(self):
        return PuiseuxSeries._raw([(e, -c) for e, c in self.terms], self.trunc)

    def __sub__(self, other):
        if not isinstance(other, PuiseuxSeries):
            other = PuiseuxSeries([(0, other)])
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, PuiseuxSeries):
            la, lb = self._low(), other._low()
            t = min(self.trunc + lb, other.trunc + la)
            acc: dict[Fraction, object] = {}
            for ea, ca in self.terms:
                if ea + lb >= t:
                    break
                for eb, cb in other.terms:
                    e = ea + eb
                    if e >= t:
                        break
                    p = ca * cb
                    acc[e] = acc[e] + p if e in acc else p
            return PuiseuxSeries(acc, t)
        return PuiseuxSeries([(e, c * other) for e, c in self.terms], self.trunc)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return PuiseuxSeries([(e, c / scalar) for e, c in self.terms], self.trunc)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integer powers; see compose_rational_power")
        out = PuiseuxSeries([(0, 1)])
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def shift(self, e) -> PuiseuxSeries:
        """Multiply by ``y**e``."""
        e = _rat(e)
        return PuiseuxSeries._raw([(ee + e, c) for ee, c in self.terms], self.trunc + e)

    def map_coeffs(self, fn) -> PuiseuxSeries:
        return PuiseuxSeries([(e, fn(e, c)) for e, c in self.terms], self.trunc)

    def agrees_with(self, other: PuiseuxSeries) -> bool:
        """Coefficient balls overlap at every exponent below both truncations."""
        t = min(self.trunc, other.trunc)
        exps = {e for e, _ in self.terms if e < t} | {e for e, _ in other.terms if e < t}
        for e in exps:
            a, b = self.coeff(e), other.coeff(e)
            if isinstance(a, UPoly) or isinstance(b, UPoly):
                if not (UPoly([0]) + a - b).is_zero():
                    return False
            elif not as_coeff(a).overlaps(b):
                return False
        return True

    def __repr__(self):
        parts = [f"({c})*y^{e}" for e, c in self.terms]
        if self.trunc != INF:
            parts.append(f"O(y^{self.trunc})")
        return " + ".join(parts) if parts else ("0" if self.trunc == INF else f"O(y^{self.trunc})")


def ord(s: PuiseuxSeries, exact: bool = False):  # noqa: A001 - mirrors the mathematical name
    return s.ord(exact)


def series_arith(a: PuiseuxSeries, b: PuiseuxSeries, op: str) -> PuiseuxSeries:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


# ---------------------------------------------------------------------------
# bivariate polynomials


def _vadd(a, b):
    if isinstance(a, GaussRat) and isinstance(b, GaussRat):
        return a + b
    return as_coeff(a) + as_coeff(b)


def _vmul(a, b):
    if isinstance(a, GaussRat) and isinstance(b, GaussRat):
        return a * b
    return as_coeff(a) * as_coeff(b)


def _value(c):
    if isinstance(c, (GaussRat, Coeff)):
        return c
    if isinstance(c, (int, Fraction)):
        return GaussRat.of(c)
    return as_coeff(c)


class BivarPoly:
    """Polynomial in x, y.  Coefficients are exact :class:`GaussRat` where possible."""

    __slots__ = ("monomials",)

    def __init__(self, monomials=None):
        acc: dict[tuple[int, int], object] = {}
        for (i, j), c in (monomials or {}).items():
            if i < 0 or j < 0:
                raise ValueError("negative exponent")
            c = _value(c)
            acc[(i, j)] = _vadd(acc[(i, j)], c) if (i, j) in acc else c
        self.monomials = {k: acc[k] for k in sorted(acc) if not _is_zero(acc[k])}

    @classmethod
    def x(cls):
        return cls({(1, 0): 1})

    @classmethod
    def y(cls):
        return cls({(0, 1): 1})

    @classmethod
    def const(cls, c):
        return cls({(0, 0): c})

    # structure --------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.monomials

    def is_exact(self) -> bool:
        return all(isinstance(c, GaussRat) for c in self.monomials.values())

    @property
    def deg_x(self) -> int:
        return max((i for i, _ in self.monomials), default=-1)

    @property
    def deg_y(self) -> int:
        return max((j for _, j in self.monomials), default=-1)

    def coeff(self, i: int, j: int) -> Coeff:
        return as_coeff(self.monomials.get((i, j), GaussRat(0)))

    def order(self) -> int:
        """Total degree of the initial form."""
        return min((i + j for i, j in self.monomials), default=-1)

    def initial_form(self) -> dict[int, object]:
        """``{i: coefficient of x**i y**(m-i)}`` for the lowest total degree m."""
        m = self.order()
        return {i: c for (i, j), c in self.monomials.items() if i + j == m}

    def x_coefficients(self) -> list[PuiseuxSeries]:
        """``[A_0, ..., A_n]`` with ``f = sum A_i(y) x**i``, each an exact series."""
        n = self.deg_x
        buckets: list[list] = [[] for _ in range(n + 1)]
        for (i, j), c in self.monomials.items():
            buckets[i].append((j, as_coeff(c)))
        return [PuiseuxSeries(b) for b in buckets]

    # arithmetic -------------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, BivarPoly):
            other = BivarPoly.const(other)
        out = dict(self.monomials)
        for k, c in other.monomials.items():
            out[k] = _vadd(out[k], c) if k in out else c
        return BivarPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return BivarPoly({k: _vmul(c, GaussRat(-1)) for k, c in self.monomials.items()})

    def __sub__(self, other):
        if not isinstance(other, BivarPoly):
            other = BivarPoly.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, BivarPoly):
            other = BivarPoly.const(other)
        out: dict[tuple[int, int], object] = {}
        for (i1, j1), c1 in self.monomials.items():
            for (i2, j2), c2 in other.monomials.items():
                k = (i1 + i2, j1 + j2)
                p = _vmul(c1, c2)
                out[k] = _vadd(out[k], p) if k in out else p
        return BivarPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integer powers")
        out = BivarPoly.const(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, BivarPoly):
            return NotImplemented
        return self.monomials == other.monomials

    def __hash__(self):
        return hash(tuple(self.monomials.items()))

    def diff_x(self) -> BivarPoly:
        return BivarPoly({(i - 1, j): _vmul(c, GaussRat(i)) for (i, j), c in self.monomials.items() if i})

    def diff_y(self) -> BivarPoly:
        return BivarPoly({(i, j - 1): _vmul(c, GaussRat(j)) for (i, j), c in self.monomials.items() if j})

    def substitute_linear(self, xx, xy, yx, yy) -> BivarPoly:
        """``f(xx*x + xy*y, yx*x + yy*y)``."""
        X = BivarPoly({(1, 0): xx, (0, 1): xy})
        Y = BivarPoly({(1, 0): yx, (0, 1): yy})
        out = BivarPoly()
        xp = {0: BivarPoly.const(1)}
        yp = {0: BivarPoly.const(1)}
        for (i, j), c in self.monomials.items():
            for k in range(max(xp), i):
                xp[k + 1] = xp[k] * X
            for k in range(max(yp), j):
                yp[k + 1] = yp[k] * Y
            out = out + xp[i] * yp[j] * c
        return out

    def scale_y(self, c) -> BivarPoly:
        """``f(x, c*y)``."""
        c = _value(c)
        out = {}
        for (i, j), v in self.monomials.items():
            w = v
            for _ in range(j):
                w = _vmul(w, c)
            out[(i, j)] = w
        return BivarPoly(out)

    def __call__(self, x, y):
        out = Coeff(0)
        for (i, j), c in self.monomials.items():
            out = out + as_coeff(c) * as_coeff(x) ** i * as_coeff(y) ** j
        return out

    def __repr__(self):
        from .parser import render

        return f"BivarPoly({render(self)!r})"


def substitute_x(f: BivarPoly, s: PuiseuxSeries) -> PuiseuxSeries:
    """``f(s(y), y)`` by Horner's rule in x."""
    coeffs = f.x_coefficients()
    if not coeffs:
        return PuiseuxSeries.zero()
    out = coeffs[-1]
    for a in reversed(coeffs[:-1]):
        out = out * s + a
    return out


def compose_rational_power(s: PuiseuxSeries, h, trunc=None, lead_pow=None) -> PuiseuxSeries:
    """``s(y)**h`` for rational ``h`` via the binomial series of the leading term.

    Writing ``s = c y**e (1 + u)`` with ``ord u > 0``, the result is
    ``c**h y**(e h) * sum binom(h, k) u**k``.  ``lead_pow`` fixes the value of
    ``c**h`` (a branch choice for fractional ``h``); the principal power is the
    default.  ``trunc`` caps the result when the expansion would not terminate.
    """
    h = _rat(h)
    e0, c0 = s.leading()
    if not isinstance(c0, Coeff):
        raise TypeError("leading coefficient must be a Coeff")
    if lead_pow is None:
        lead_pow = c0.pow_frac(h)
    base_exp = e0 * h
    u = PuiseuxSeries(s.terms[1:], s.trunc).shift(-e0) / c0
    rel = u.trunc
    if trunc is not None:
        rel = min(rel, _rat(trunc) - base_exp)
    terminating = h.denominator == 1 and h >= 0
    if rel == INF and u.terms and not terminating:
        raise ValueError("infinite expansion: pass trunc")
    u = u.truncate(rel)
    total = PuiseuxSeries([(0, 1)], rel)
    if u.terms:
        ou = u.ord()
        power = PuiseuxSeries([(0, 1)])
        k = 1
        while (k * ou < rel) and not (terminating and k > h):
            power = power * u
            total = total + power * Coeff(_binom(h, k))
            k += 1
    return (total * lead_pow).shift(base_exp)


def compose_series(s: PuiseuxSeries, P: PuiseuxSeries, trunc, branch=None) -> PuiseuxSeries:
    """``s(P(y))`` for a series ``s`` in Y and an arc ``P`` of order 1.

    ``branch(e)`` returns the value used for ``c**e``, ``c`` the leading
    coefficient of ``P``.
    """
    trunc = _rat(trunc) if trunc != INF else INF
    e0 = P.ord()
    out = PuiseuxSeries.zero(min(trunc, s.trunc * e0 if s.trunc != INF else INF))
    for e, b in s.terms:
        if e * e0 >= out.trunc:
            break
        lp = None if branch is None else branch(e)
        out = out + compose_rational_power(P, e, out.trunc, lp) * b
    return out


# ---------------------------------------------------------------------------
# conjugates and contact


def conjugates(s: PuiseuxSeries) -> list[PuiseuxSeries]:
    """All ``N`` conjugates of ``s`` (``N`` the common exponent denominator), ``s`` first."""
    n = s.denominator()
    out = []
    for k in range(n):
        out.append(PuiseuxSeries([(e, c * root_of_unity(k * int(e * n), n)) if k else (e, c)
                                  for e, c in s.terms], s.trunc))
    return out


def series_contact(a: PuiseuxSeries, b: PuiseuxSeries):
    """``ord(a - b)`` for the two given series (no conjugation)."""
    diff = a - b
    if diff.terms:
        return diff.terms[0][0]
    if diff.trunc == INF:
        return INF
    raise TruncationAmbiguous(f"series agree to O(y^{diff.trunc})")


def contact_order(a: PuiseuxSeries, b: PuiseuxSeries):
    """Maximal ``ord(a' - b')`` over conjugates ``a'`` of ``a`` and ``b'`` of ``b``.

    Pairs of conjugates that coincide are skipped, so two distinct members of
    one conjugate orbit have a finite contact.
    """
    best = None
    ca, cb = conjugates(a), conjugates(b)
    t = min(a.trunc, b.trunc)
    for x in ca:
        for z in cb:
            diff = x - z
            if not diff.terms:
                continue
            o = diff.terms[0][0]
            if best is None or o > best:
                best = o
    if best is None:
        if t == INF:
            raise ValueError("contact_order of identical arcs")
        raise TruncationAmbiguous(f"arcs agree to O(y^{t})")
    return best


# ---------------------------------------------------------------------------
# Newton-Puiseux


def _lower_hull(points: list[tuple[int, Fraction]]) -> list[tuple[int, Fraction]]:
    hull: list[tuple[int, Fraction]] = []
    for p in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point unless it lies strictly below the chord
            if (y2 - y1) * (p[0] - x1) >= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def _shift_x(A: list[PuiseuxSeries], c: Coeff, e: Fraction, trunc=INF) -> list[PuiseuxSeries]:
    """Coefficients of ``F(c y**e + x, y)`` from those of ``F(x, y)``, modulo ``y**trunc``."""
    n = len(A) - 1
    out = [PuiseuxSeries.zero() for _ in range(n + 1)]
    cpow = [Coeff(1)]
    for _ in range(n):
        cpow.append(cpow[-1] * c)
    for k in range(n + 1):
        if not A[k].terms:
            continue
        for i in range(k + 1):
            # A_k * binom(k, i) * c**(k-i) * y**((k-i) e), cut at trunc
            de, scale = (k - i) * e, cpow[k - i] * math.comb(k, i)
            terms = [(ee + de, cc * scale) for ee, cc in A[k].terms if ee + de < trunc]
            part = PuiseuxSeries._raw([tm for tm in terms if not _is_zero(tm[1])], min(A[k].trunc + de, trunc))
            out[i] = out[i] + part
    if trunc != INF:
        out = [a.truncate(trunc) if a.terms or a.trunc != INF else a for a in out]
    return out


def _orbits(roots: list[tuple[Coeff, int]], r: int, e: Fraction):
    """Group characteristic roots into orbits under ``z -> exp(2 pi i r e) z``."""
    step = r * e
    size = step.denominator
    w = root_of_unity(step.numerator % size, size) if size > 1 else Coeff(1)
    used = [False] * len(roots)
    reps = []
    for idx, (z, m) in enumerate(roots):
        if used[idx]:
            continue
        used[idx] = True
        cur = z
        for _ in range(size - 1):
            cur = cur * w
            for jdx, (z2, _m2) in enumerate(roots):
                if not used[jdx] and z2.overlaps(cur):
                    used[jdx] = True
                    break
        reps.append((z, m))
    return reps


def newton_puiseux(F: BivarPoly, trunc) -> list[tuple[PuiseuxSeries, int]]:
    """Puiseux roots ``x = zeta(y)`` of ``F`` with ``ord zeta > 0``.

    One representative per conjugate orbit, each with its multiplicity.  A
    root that terminates is returned exactly (``trunc = inf``); the others are
    known modulo ``O(y**trunc)``.  Roots that still coincide at ``trunc`` come
    back as one series with their combined multiplicity.
    """
    trunc = _rat(trunc)
    bits = get_config().precision_bits
    for scale in (1, 2, 4):
        # deep expansions lose absolute accuracy; retry with more working bits
        with working_precision(bits * scale):
            A = F.x_coefficients()
            if len(A) < 2:
                return []
            out: list[tuple[PuiseuxSeries, int]] = []
            try:
                _solve(A, Fraction(0), [], 1, trunc, out, A)
            except PrecisionExhausted:
                if scale == 4:
                    raise
                continue
        out.sort(key=lambda rm: _sort_key(rm[0]))
        return out


def _sort_key(s: PuiseuxSeries):
    if not s.terms:
        return (INF, 0.0)
    e, c = s.terms[0]
    return (e, round(c.arg(), 9))


def _exact_multiplicity(A0, P: PuiseuxSeries, most: int) -> int:
    """How many x-derivatives of ``sum A0[i] x**i`` vanish identically at ``P`` (at most ``most``)."""
    D, k = list(A0), 0
    while k < most and len(D) > 1:
        val = PuiseuxSeries.zero()
        try:
            for a in reversed(D):
                val = val * P + a
        except PrecisionExhausted:
            break
        if val.terms or val.trunc != INF:
            break
        k += 1
        D = [a * Coeff(i) for i, a in enumerate(D)][1:]
    return k


def _solve(A, e_min, prefix, r, trunc, out, A0):
    # strip the factor x**k when A_0 vanishes identically
    k = 0
    while k < len(A) and A[k].is_zero() and A[k].is_exact():
        k += 1
    if k == len(A):
        raise ValueError("polynomial vanishes identically")
    if k:
        out.append((PuiseuxSeries(prefix), k))
        A = A[k:]
    if len(A) < 2:
        return
    # a coefficient known only as O(y**t) enters as the virtual point (i, t)
    points = [(i, a.ord() if a.terms else a.trunc) for i, a in enumerate(A) if a.terms or a.trunc != INF]
    hull = _lower_hull(points)
    merged = 0
    for (i1, v1), (i2, v2) in zip(hull, hull[1:]):
        e = Fraction(v1 - v2) / (i2 - i1)
        if e <= e_min:
            break
        if e >= trunc:
            merged += i2 - i1
            continue
        if not (A[i1].terms and A[i2].terms):
            raise TruncationTooSmall(f"Newton edge of slope {e} rests on an unknown coefficient")
        edge = {i: A[i].coeff(v1 - (i - i1) * e) for i in range(i1, i2 + 1)
                if A[i].terms and A[i].ord() + i * e == v1 + i1 * e}
        char = UPoly([edge.get(i, Coeff(0)) for i in range(i1, i2 + 1)])
        n = len(A) - 1
        for c, m in _orbits(upoly_roots(char), r, e):
            # the m roots continuing c*y**e are the roots of order > e of the shift; a change
            # of F by O(y**M) moves them by at least (M - ord A_n - (n - m) e) / m >= trunc
            M = A[-1].ord() + (n - m) * e + m * trunc + 1 if trunc != INF else INF
            A2 = _shift_x(A, c, e, M)
            _solve(A2, e, prefix + [(e, c)], r * (r * e).denominator, trunc, out, A0)
    if merged:
        # truncation hides exact termination; test the prefix against the original polynomial
        exact = _exact_multiplicity(A0, PuiseuxSeries(prefix), merged) if prefix else 0
        if exact:
            out.append((PuiseuxSeries(prefix), exact))
        if merged > exact:
            out.append((PuiseuxSeries(prefix, trunc), merged - exact))
