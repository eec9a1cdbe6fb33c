"""Coefficient arithmetic: complex balls, exact Gaussian rationals, univariate roots.

Every coefficient that is not known exactly is a :class:`Coeff`, a complex
ball backed by ``flint.acb``.  Arithmetic on balls is outward rounded, so the
exact result of any computation lies in the returned ball.  Zero tests are
three-valued: a ball that contains 0 but is wider than the zero tolerance
raises :class:`PrecisionExhausted` instead of guessing.
"""
from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np
from flint import acb, arb, ctx, fmpq

from .errors import DivisionByUncertainZero, PrecisionExhausted

__all__ = [
    "NumericsConfig",
    "get_config",
    "configure",
    "working_precision",
    "GaussRat",
    "Coeff",
    "UPoly",
    "root_of_unity",
    "nth_roots",
    "upoly_roots",
]


@dataclass(frozen=True)
class NumericsConfig:
    precision_bits: int = 256
    zero_tol: float = 2.0 ** -128


_config = NumericsConfig()
ctx.prec = _config.precision_bits


def get_config() -> NumericsConfig:
    return _config


def configure(precision_bits: int | None = None, zero_tol: float | None = None) -> NumericsConfig:
    """Set the process-wide working precision and zero tolerance."""
    global _config
    bits = _config.precision_bits if precision_bits is None else int(precision_bits)
    tol = _config.zero_tol if zero_tol is None else float(zero_tol)
    if bits < 53:
        raise ValueError("precision_bits must be at least 53")
    if not 0 < tol < 1:
        raise ValueError("zero_tol must lie in (0, 1)")
    _config = NumericsConfig(bits, tol)
    ctx.prec = bits
    return _config


@contextlib.contextmanager
def working_precision(precision_bits: int | None = None, zero_tol: float | None = None):
    old = _config
    configure(precision_bits, zero_tol)
    try:
        yield _config
    finally:
        configure(old.precision_bits, old.zero_tol)


# ---------------------------------------------------------------------------
# exact Gaussian rationals (germ coefficients)


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, (int, Rational)):
        return Fraction(v)
    raise TypeError(f"not a rational: {v!r}")


@dataclass(frozen=True)
class GaussRat:
    """An exact element of Q(i)."""

    re: Fraction
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", _frac(self.re))
        object.__setattr__(self, "im", _frac(self.im))

    @classmethod
    def of(cls, v) -> GaussRat:
        if isinstance(v, GaussRat):
            return v
        return cls(_frac(v))

    def __add__(self, other):
        try:
            o = GaussRat.of(other)
        except TypeError:
            return NotImplemented
        return GaussRat(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussRat(-self.re, -self.im)

    def __sub__(self, other):
        try:
            o = GaussRat.of(other)
        except TypeError:
            return NotImplemented
        return GaussRat(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = GaussRat.of(other)
        except TypeError:
            return NotImplemented
        return GaussRat(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = GaussRat.of(other)
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("division by zero")
        return self * GaussRat(o.re / n, -o.im / n)

    def __rtruediv__(self, other):
        return GaussRat.of(other) / self

    def __pow__(self, k: int):
        if k < 0:
            return GaussRat(1) / self**(-k)
        out, base = GaussRat(1), self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        try:
            o = GaussRat.of(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash(self.re) if not self.im else hash((self.re, self.im))

    @property
    def is_real(self) -> bool:
        return self.im == 0

    def to_acb(self) -> acb:
        return acb(_arb_of(self.re), _arb_of(self.im))

    def __str__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}*i"
        sign = "+" if self.im > 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}*i)"

    __repr__ = __str__


def _arb_of(q: Fraction) -> arb:
    return arb(fmpq(q.numerator, q.denominator))


def _arb_to_fraction(x: arb) -> Fraction:
    man, exp = x.mid().man_exp()
    man, exp = int(man), int(exp)
    return Fraction(man) * (Fraction(2) ** exp)


# ---------------------------------------------------------------------------
# complex balls


def _to_acb(v) -> acb:
    if isinstance(v, Coeff):
        return v._z
    if isinstance(v, acb):
        return v
    if isinstance(v, arb):
        return acb(v)
    if isinstance(v, GaussRat):
        return v.to_acb()
    if isinstance(v, bool):
        raise TypeError("bool is not a coefficient")
    if isinstance(v, int):
        return acb(v)
    if isinstance(v, Fraction):
        return acb(_arb_of(v))
    if isinstance(v, (float, complex)):
        return acb(v)
    raise TypeError(f"cannot convert {type(v).__name__} to Coeff")


_SCALARS = (int, Fraction, float, complex, GaussRat, acb, arb)


class Coeff:
    """Complex ball: midpoint, radius, and the working precision it was made at.

    >>> (Coeff(1j) * Coeff(1j)).is_zero()
    False
    >>> (Coeff(1j) * Coeff(1j) + 1).is_zero()
    True
    """

    __slots__ = ("_z", "precision")

    def __init__(self, value=0):
        self._z = _to_acb(value)
        self.precision = ctx.prec

    @classmethod
    def from_parts(cls, re, im=0) -> Coeff:
        return cls(acb(_arb_of(_frac(re)) if not isinstance(re, arb) else re,
                       _arb_of(_frac(im)) if not isinstance(im, arb) else im))

    @property
    def acb(self) -> acb:
        return self._z

    # arithmetic -------------------------------------------------------------
    def _wrap(self, z) -> Coeff:
        out = Coeff.__new__(Coeff)
        out._z = z
        out.precision = ctx.prec
        return out

    def __add__(self, other):
        if isinstance(other, Coeff):
            return self._wrap(self._z + other._z)
        if isinstance(other, _SCALARS):
            return self._wrap(self._z + _to_acb(other))
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Coeff):
            return self._wrap(self._z - other._z)
        if isinstance(other, _SCALARS):
            return self._wrap(self._z - _to_acb(other))
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, _SCALARS):
            return self._wrap(_to_acb(other) - self._z)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, Coeff):
            return self._wrap(self._z * other._z)
        if isinstance(other, _SCALARS):
            return self._wrap(self._z * _to_acb(other))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (Coeff, *_SCALARS)):
            d = _to_acb(other)
            if d.contains(0):
                raise DivisionByUncertainZero(f"divisor ball {d} contains zero")
            return self._wrap(self._z / d)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, _SCALARS):
            return Coeff(other) / self
        return NotImplemented

    def __neg__(self):
        return self._wrap(-self._z)

    def __pos__(self):
        return self

    def __pow__(self, k):
        if isinstance(k, int):
            if k < 0:
                return Coeff(1) / self ** (-k)
            return self._wrap(self._z ** k)
        if isinstance(k, Fraction):
            return self.pow_frac(k)
        return NotImplemented

    def pow_frac(self, e: Fraction) -> Coeff:
        """Principal power ``self**e`` for rational ``e``."""
        e = Fraction(e)
        if e.denominator == 1:
            return self ** e.numerator
        return principal_root(self, e.denominator) ** e.numerator

    def conjugate(self) -> Coeff:
        return self._wrap(self._z.conjugate())

    # tests ------------------------------------------------------------------
    @property
    def radius(self) -> arb:
        """Upper bound for the distance from the midpoint to any point of the ball."""
        re, im = self._z.real.rad(), self._z.imag.rad()
        return arb((re * re + im * im).sqrt().upper())

    def contains_zero(self) -> bool:
        return bool(self._z.contains(0))

    def is_zero(self, tol: float | None = None) -> bool:
        if not self._z.contains(0):
            return False
        tol = _config.zero_tol if tol is None else tol
        if self.radius < arb(tol):
            return True
        raise PrecisionExhausted(f"cannot decide whether {self} is zero")

    def certainly_nonzero(self) -> bool:
        return not self._z.contains(0)

    def overlaps(self, other) -> bool:
        return bool(self._z.overlaps(_to_acb(other)))

    def contains(self, other) -> bool:
        return bool(self._z.contains(_to_acb(other)))

    def is_exact(self) -> bool:
        return bool(self._z.is_exact())

    # views ------------------------------------------------------------------
    @property
    def mid(self) -> complex:
        return complex(self._z.mid())

    def arg(self) -> float:
        """Argument in [0, 2*pi); balls straddling the real axis snap to 0 or pi."""
        re, im = self._z.real, self._z.imag
        if im.contains(0):
            if re > 0:
                return 0.0
            if re < 0:
                return math.pi
        a = math.atan2(float(im.mid()), float(re.mid()))
        return a + 2 * math.pi if a < 0 else a

    def abs_upper(self) -> arb:
        return self._z.abs_upper()

    def abs_lower(self) -> arb:
        return self._z.abs_lower()

    def recognize(self, max_den: int = 10**6) -> GaussRat | None:
        """The Gaussian rational of small height inside the ball, if any."""
        tol = arb(_config.zero_tol)
        if not self.radius < tol:
            return None
        parts = []
        for part in (self._z.real, self._z.imag):
            q = _arb_to_fraction(part).limit_denominator(max_den)
            # exact membership: |mid - q| <= rad
            if abs(_arb_to_fraction(part) - q) > _arb_to_fraction(part.rad()):
                return None
            parts.append(q)
        return GaussRat(*parts)

    def mid_strings(self, digits: int = 30) -> tuple[str, str]:
        return (_num_str(self._z.real, digits), _num_str(self._z.imag, digits))

    def __repr__(self):
        return f"Coeff({self._z.str(12)})"

    def __str__(self):
        return self._z.str(12)


def _num_str(x: arb, digits: int) -> str:
    m = x.mid()
    if m == 0 or x.contains(0):
        return "0"
    return m.str(digits, radius=False, more=False)


def as_coeff(v) -> Coeff:
    return v if isinstance(v, Coeff) else Coeff(v)


_QUARTER_TURNS = (acb(1), acb(0, 1), acb(-1), acb(0, -1))


def root_of_unity(k: int, n: int) -> Coeff:
    """``exp(2*pi*i*k/n)``, exact when it is one of 1, i, -1, -i."""
    k %= n
    if (4 * k) % n == 0:
        return Coeff(_QUARTER_TURNS[(4 * k) // n])
    return Coeff(acb(fmpq(2 * k, n)).exp_pi_i())


def principal_root(a: Coeff, n: int) -> Coeff:
    """An n-th root of ``a``; stays tight when ``a`` straddles the branch cut."""
    z = as_coeff(a)._z
    if n == 1:
        return Coeff(z)
    if z.imag.contains(0) and z.real < 0:
        r = (-z).root(n) * acb(fmpq(1, n)).exp_pi_i()
    else:
        r = z.root(n)
    return Coeff(r)


def nth_roots(a, n: int) -> list[Coeff]:
    """All ``n`` complex n-th roots of ``a``, as pairwise disjoint balls."""
    if n < 1:
        raise ValueError("n must be positive")
    a = as_coeff(a)
    if a.contains_zero():
        raise DivisionByUncertainZero("nth_roots of a ball containing zero")
    r0 = principal_root(a, n)
    roots = [r0 * root_of_unity(k, n) for k in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if roots[i].overlaps(roots[j]):
                raise PrecisionExhausted("n-th roots not separated")
    return roots


# ---------------------------------------------------------------------------
# univariate polynomials


class UPoly:
    """Polynomial in one auxiliary indeterminate with :class:`Coeff` coefficients.

    Trailing coefficients that test as zero are dropped, so ``degree`` is exact
    whenever the zero tests are decidable.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = [as_coeff(c) for c in coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def var(cls) -> UPoly:
        return cls([0, 1])

    @classmethod
    def const(cls, c) -> UPoly:
        return cls([c])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, k: int) -> Coeff:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Coeff(0)

    def _binary(self, other, op):
        if isinstance(other, UPoly):
            n = max(len(self.coeffs), len(other.coeffs))
            return UPoly([op(self.coeff(k), other.coeff(k)) for k in range(n)])
        if isinstance(other, (Coeff, *_SCALARS)):
            return self._binary(UPoly([other]), op)
        return NotImplemented

    def __add__(self, other):
        return self._binary(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return UPoly([-c for c in self.coeffs])

    def __mul__(self, other):
        if isinstance(other, UPoly):
            if not self.coeffs or not other.coeffs:
                return UPoly()
            out = [Coeff(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
            for i, a in enumerate(self.coeffs):
                for j, b in enumerate(other.coeffs):
                    out[i + j] = out[i + j] + a * b
            return UPoly(out)
        if isinstance(other, (Coeff, *_SCALARS)):
            return UPoly([c * other for c in self.coeffs])
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (Coeff, *_SCALARS)):
            return UPoly([c / other for c in self.coeffs])
        return NotImplemented

    def __pow__(self, k: int):
        out = UPoly([1])
        for _ in range(k):
            out = out * self
        return out

    def __call__(self, z):
        z = as_coeff(z)
        out = Coeff(0)
        for c in reversed(self.coeffs):
            out = out * z + c
        return out

    def derivative(self, order: int = 1) -> UPoly:
        cs = list(self.coeffs)
        for _ in range(order):
            cs = [c * k for k, c in enumerate(cs)][1:]
        return UPoly(cs)

    def __repr__(self):
        return "UPoly(" + ", ".join(str(c) for c in self.coeffs) + ")"


def _acb_eval(cs, z):
    out = acb(0)
    for c in reversed(cs):
        out = out * z + c
    return out


def _initial_guesses(cs: list[acb]) -> list[acb]:
    n = len(cs) - 1
    lead = [complex(c.mid()) for c in reversed(cs)]
    try:
        with np.errstate(all="ignore"):
            approx = np.roots(np.array(lead, dtype=complex))
        if len(approx) == n and np.all(np.isfinite(approx)):
            # break exact coincidences so the simultaneous iteration can move
            return [acb(complex(z) + 1e-9 * complex(math.cos(2.1 * k + 0.4), math.sin(2.1 * k + 0.4)))
                    for k, z in enumerate(approx)]
    except (np.linalg.LinAlgError, ValueError, OverflowError):
        pass
    radius = max(abs(complex(c.mid()) / complex(cs[-1].mid())) ** (1.0 / (n - k))
                 for k, c in enumerate(cs[:-1]) if complex(c.mid()) != 0) if any(
        complex(c.mid()) != 0 for c in cs[:-1]) else 1.0
    return [acb(radius * complex(math.cos(2 * math.pi * k / n + 0.4), math.sin(2 * math.pi * k / n + 0.4)))
            for k in range(n)]


def _aberth(cs: list[acb], zs: list[acb], max_iter: int) -> list[acb]:
    """Aberth-Ehrlich simultaneous iteration on midpoints."""
    n = len(zs)
    dcs = [c * k for k, c in enumerate(cs)][1:]
    eps = arb(2) ** (-(ctx.prec - 8))
    for _ in range(max_iter):
        biggest = arb(0)
        new = list(zs)
        for i in range(n):
            zi = new[i]
            pv = _acb_eval(cs, zi).mid()
            dv = _acb_eval(dcs, zi).mid()
            if pv == 0:
                continue
            if dv == 0:
                new[i] = zi + acb(eps, eps) * 1024
                continue
            ratio = (pv / dv).mid()
            s = acb(0)
            for j in range(n):
                if j != i:
                    diff = zi - new[j]
                    if diff == 0:
                        diff = acb(eps)
                    s += 1 / diff
            denom = (1 - ratio * s).mid()
            corr = ratio if denom == 0 else (ratio / denom).mid()
            new[i] = (zi - corr).mid()
            rel = corr.abs_upper() / (1 + zi.abs_upper())
            if rel > biggest:
                biggest = rel
        zs = new
        if biggest < eps:
            break
    return zs


def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def _inclusion_clusters(cs: list[acb], zs: list[acb]) -> list[list[int]]:
    """Group approximations whose Weierstrass inclusion discs overlap.

    Disc ``i`` is centred at ``zs[i]`` with radius ``n*|W_i|``; a connected
    component made of k discs contains exactly k roots.
    """
    n = len(zs)
    lc = cs[-1]
    radii = []
    for i in range(n):
        prod = lc
        for j in range(n):
            if j != i:
                prod = prod * (zs[i] - zs[j])
        if prod.contains(0):
            radii.append(arb("inf"))
            continue
        w = _acb_eval(cs, zs[i]) / prod
        radii.append(arb((w.abs_upper() * n).upper()))
    parent = list(range(n))
    for i in range(n):
        for j in range(i + 1, n):
            gap = (zs[i] - zs[j]).abs_lower()
            if not gap > radii[i] + radii[j]:
                parent[_find(parent, i)] = _find(parent, j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(_find(parent, i), []).append(i)
    return [sorted(g) for g in groups.values()], radii


def _certify_multiple(cs: list[acb], start: acb, k: int) -> acb | None:
    """Enclose the root of the (k-1)-th derivative near ``start``."""
    q = list(cs)
    for _ in range(k - 1):
        q = [c * j for j, c in enumerate(q)][1:]
    dq = [c * j for j, c in enumerate(q)][1:]
    z = start.mid()
    for _ in range(200):
        num, den = _acb_eval(q, z).mid(), _acb_eval(dq, z).mid()
        if den == 0:
            return None
        step = (num / den).mid()
        z = (z - step).mid()
        if step.abs_upper() < arb(2) ** (-(ctx.prec - 4)) * (1 + z.abs_upper()):
            break
    rho = arb(2) ** (-(ctx.prec - 16)) * (1 + z.abs_upper())
    for _ in range(12):
        box = acb(arb(z.real.mid(), rho), arb(z.imag.mid(), rho))
        dval = _acb_eval(dq, box)
        if not dval.contains(0):
            newton = z - _acb_eval(q, z) / dval
            if box.contains(newton):
                return newton
        rho = rho * 65536
    return None


def upoly_roots(p: UPoly, max_iter: int = 400) -> list[tuple[Coeff, int]]:
    """Roots of ``p`` with multiplicities.

    Simple roots come back as certified inclusion discs.  A cluster of k
    approximations that cannot be separated is treated as one k-fold root and
    enclosed as the simple root of the (k-1)-th derivative; the hypothesis is
    checked by testing that the lower derivatives vanish on the enclosure.
    """
    if p.degree < 1:
        raise ValueError("upoly_roots needs degree >= 1")
    cs = [c.acb for c in p.coeffs]
    out: list[tuple[Coeff, int]] = []
    k0 = 0
    while Coeff(cs[k0]).is_zero():
        k0 += 1
    if k0:
        out.append((Coeff(0), k0))
        cs = cs[k0:]
    n = len(cs) - 1
    if n == 1:
        out.append((Coeff(-cs[0] / cs[1]), 1))
    elif n > 1:
        out.extend(_cluster_roots(cs, max_iter))
    out.sort(key=lambda rm: (round(rm[0].arg(), 9), float(rm[0].abs_upper())))
    return out


def _cluster_roots(cs: list[acb], max_iter: int) -> list[tuple[Coeff, int]]:
    old_prec = ctx.prec
    zs = None
    try:
        for attempt in range(3):
            ctx.prec = old_prec + 32 + 64 * attempt
            zs = _aberth(cs, zs or _initial_guesses(cs), max_iter * (attempt + 1))
            groups, radii = _inclusion_clusters(cs, zs)
            result = []
            ok = True
            for g in groups:
                if len(g) == 1:
                    i = g[0]
                    r = radii[i]
                    z = zs[i]
                    result.append((acb(arb(z.real.mid(), r), arb(z.imag.mid(), r)), 1))
                    continue
                centre = sum((zs[i] for i in g), acb(0)) / len(g)
                enc = _certify_multiple(cs, centre, len(g))
                if enc is None or not _lower_derivatives_vanish(cs, enc, len(g)):
                    ok = False
                    break
                result.append((enc, len(g)))
            if ok:
                break
        else:
            raise PrecisionExhausted("polynomial roots could not be separated or certified")
    finally:
        ctx.prec = old_prec
    return [(Coeff(z), m) for z, m in result]


def _lower_derivatives_vanish(cs, enc, k) -> bool:
    q = list(cs)
    tol = arb(_config.zero_tol)
    for _ in range(k - 1):
        v = _acb_eval(q, enc)
        if not v.contains(0):
            return False
        if not Coeff(v).radius < tol * (1 + sum((c.abs_upper() for c in q), arb(0))):
            return False
        q = [c * j for j, c in enumerate(q)][1:]
    return True
