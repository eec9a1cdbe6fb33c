from fractions import Fraction as Fr

import pytest
import sympy
from hypothesis import assume, given, settings, strategies as st

from canyonlab.errors import TruncationAmbiguous
from canyonlab.numerics import Coeff, GaussRat, UPoly, nth_roots
from canyonlab.parser import parse_poly, render
from canyonlab.puiseux import (
    INF,
    BivarPoly,
    PuiseuxSeries as S,
    compose_rational_power,
    conjugates,
    contact_order,
    newton_puiseux,
    ord,
    series_arith,
    substitute_x,
)

from conftest import CORPUS, germ

X, Y = sympy.symbols("x y")


def mono(c, e, trunc=INF):
    return S.monomial(Coeff(c), Fr(e), trunc)


def rational_terms(s):
    return [(e, c.recognize()) for e, c in s.terms]


def key(terms):
    return tuple((e, str(c)) for e, c in terms)


def test_ord_examples():
    t = Fr(7, 3)
    assert ord(mono(t, 5)) == 5
    assert ord(S.zero()) == INF
    assert ord(mono(1, 12) - mono(Fr(2, 3), 15)) == 12


def test_ord_of_unknown_zero_is_ambiguous():
    with pytest.raises(TruncationAmbiguous):
        S.zero(Fr(5)).ord(exact=True)
    assert S.zero(Fr(5)).ord() == INF


def test_series_arith_examples():
    assert rational_terms(series_arith(mono(1, 5), mono(-1, 5), "sub")) == [(5, 2)]
    sq = series_arith(mono(1, Fr(9, 2)), mono(1, Fr(9, 2)), "mul")
    assert rational_terms(sq) == [(9, 1)]


def test_mul_truncation_propagates():
    a = S([(Fr(1), Coeff(1))], Fr(4))
    b = S([(Fr(2), Coeff(1))], Fr(7))
    assert (a * b).trunc == min(4 + 2, 7 + 1)
    assert (a + b).trunc == 4


def test_zero_coefficient_is_dropped():
    assert not (mono(1, 3) - mono(1, 3)).terms


def test_substitute_F1_along_y5():
    f = parse_poly("1/3*x^3 - x*y^10 + y^12")
    assert rational_terms(substitute_x(f, mono(1, 5))) == [(12, 1), (15, Fr(-2, 3))]


def test_substitute_identity():
    gamma = mono(2, Fr(3, 2)) + mono(-1, 2)
    assert substitute_x(BivarPoly.x(), gamma).agrees_with(gamma)


def test_substitute_G1_along_polar():
    a = nth_roots(Fr(-1, 3), 2)[0]
    f = parse_poly("x^3 + y^12 + x*y^9 + y^13")
    got = substitute_x(f, S([(Fr(9, 2), a)]))
    assert got.exponents() == [12, 13, Fr(27, 2)]
    assert (got.coeff(Fr(27, 2)) - 2 * a / 3).is_zero()


def test_compose_power_of_monomial():
    c = Coeff(GaussRat(1, 2))
    got = compose_rational_power(mono(c, 1), 7)
    assert got.exponents() == [7] and (got.coeff(7) - c**7).is_zero()


def test_compose_power_with_symbolic_tail():
    s = S([(Fr(1), Coeff(1)), (Fr(5), UPoly.var())])
    got = compose_rational_power(s, 12, trunc=20)
    assert got.trunc == 20
    assert got.exponents() == [12, 16]
    assert got.coeff(16).degree == 1 and got.coeff(16).coeffs[1].recognize() == 12


@settings(max_examples=25, deadline=None)
@given(st.fractions(min_value=-3, max_value=3, max_denominator=9))
def test_compose_fractional_power_binomial(eps):
    # oracle: sympy's series of (1 + eps*y)^(27/2)
    assume(eps != 0)
    s = mono(1, 1) + mono(eps, 2)
    got = compose_rational_power(s, Fr(27, 2), trunc=Fr(33, 2))
    t = sympy.Symbol("t")
    ser = sympy.series((1 + sympy.Rational(eps.numerator, eps.denominator) * t) ** sympy.Rational(27, 2), t, 0, 3)
    ser = ser.removeO()
    for k in range(3):
        want = ser.coeff(t, k)
        assert (got.coeff(Fr(27, 2) + k) - Coeff(Fr(int(want.p), int(want.q)))).is_zero()


def test_conjugates_examples():
    assert len(conjugates(mono(1, 5))) == 1
    a = Coeff(3)
    cs = conjugates(mono(a, Fr(9, 2)))
    assert sorted(round(c.coeff(Fr(9, 2)).mid.real) for c in cs) == [-3, 3]
    cs = conjugates(mono(1, Fr(3, 2)) + mono(1, 2))
    got = sorted((round(c.coeff(Fr(3, 2)).mid.real), round(c.coeff(2).mid.real)) for c in cs)
    assert got == [(-1, 1), (1, 1)]


def test_contact_examples():
    assert contact_order(mono(1, 5), mono(-1, 5)) == 5
    a = nth_roots(Fr(-1, 3), 2)[0]
    assert contact_order(mono(a, Fr(9, 2)), mono(-a, Fr(9, 2))) == Fr(9, 2)
    assert contact_order(mono(1, 2), mono(1, 3)) == 2


arcs = st.lists(
    st.tuples(st.sampled_from([Fr(1), Fr(3, 2), Fr(2), Fr(5, 2), Fr(3), Fr(7, 3), Fr(4)]),
              st.integers(-3, 3).filter(bool)),
    min_size=1, max_size=3, unique_by=lambda t: t[0],
).map(lambda ts: S([(e, Coeff(c)) for e, c in sorted(ts)]))


@settings(max_examples=40, deadline=None)
@given(arcs, arcs, st.integers(0, 5))
def test_contact_symmetric_and_conjugation_invariant(a, b, k):
    assume(not (a - b).is_zero())
    assume(all(not (a - cb).is_zero() for cb in conjugates(b)))
    c = contact_order(a, b)
    assert c == contact_order(b, a)
    ca, cb = conjugates(a), conjugates(b)
    assert contact_order(ca[k % len(ca)], cb[k % len(cb)]) == c


def test_newton_puiseux_examples():
    (r, m), = newton_puiseux(parse_poly("x^2 - y^3"), 10)
    assert m == 1 and r.exponents() == [Fr(3, 2)] and len(conjugates(r)) == 2
    roots = newton_puiseux(parse_poly("x^2 - y^10"), 10)
    assert sorted(rational_terms(r)[0][1].re for r, _ in roots) == [-1, 1]
    (r, m), = newton_puiseux(parse_poly("3*x^2 + y^9"), 10)
    assert r.exponents() == [Fr(9, 2)] and (3 * r.coeff(Fr(9, 2)) ** 2 + 1).is_zero()


def test_newton_puiseux_multiplicities():
    roots = newton_puiseux(parse_poly("(x - y)^2*(x + y^2)"), 10)
    assert [(rational_terms(r), m) for r, m in roots] == [([(1, 1)], 2), ([(2, -1)], 1)]
    assert [(list(r.terms), m) for r, m in newton_puiseux(parse_poly("x^2*y"), 5)] == [([], 2)]


def _planted(roots):
    f = BivarPoly.const(1)
    for terms in roots:
        z = BivarPoly.const(0)
        for e, c in terms:
            z = z + BivarPoly.const(c) * BivarPoly.y() ** e
        f = f * (BivarPoly.x() - z)
    return f


planted_roots = st.lists(
    st.lists(st.tuples(st.integers(1, 4), st.integers(-2, 2).filter(bool)), min_size=1, max_size=3,
             unique_by=lambda t: t[0]).map(sorted),
    min_size=1, max_size=3, unique_by=lambda r: tuple(r),
)


@settings(max_examples=30, deadline=None)
@given(planted_roots)
def test_newton_puiseux_recovers_planted_roots(roots):
    # oracle: F is built as a product of known polynomial roots
    F = _planted(roots)
    got = newton_puiseux(F, 12)
    assert sum(m for _, m in got) == len(roots)
    have = sorted(key((e, c.recognize()) for e, c in r.terms) for r, m in got)
    want = sorted(key((Fr(e), GaussRat(c)) for e, c in r) for r in roots)
    assert have == want
    for r, _ in got:
        assert r.is_exact()


@pytest.mark.parametrize("name", CORPUS)
def test_newton_puiseux_residual_count_and_closure(name):
    F = germ(name)
    tau = Fr(40)
    got = newton_puiseux(F, tau)
    n = 0
    for r, m in got:
        cs = conjugates(r)
        n += m * len(cs)
        # residual: every known term of F(r) lies at or beyond the propagated truncation
        res = substitute_x(F, r)
        assert not res.terms or (r.is_exact() is False and res.ord() >= res.trunc)
        # conjugate closure: each conjugate is itself a root
        for c in cs:
            assert not substitute_x(F, c).terms
    ydiv = min(j for (i, j) in F.monomials if i == 0) if any(i == 0 for i, _ in F.monomials) else 0
    assert n == F.deg_x  # no y-divisible factors in the corpus
    del ydiv


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4), st.integers(-5, 5).filter(bool)),
                min_size=1, max_size=6),
       st.integers(-2, 2), st.integers(-2, 2), st.integers(1, 3))
def test_linear_substitution_matches_sympy(monos, a, b, d):
    text = " + ".join(f"({c})*x^{i}*y^{j}" for i, j, c in monos)
    f = parse_poly(text)
    got = f.substitute_linear(1, a, 0, d)
    expr = sympy.sympify(text.replace("^", "**"))
    want = sympy.expand(expr.subs({X: X + a * Y, Y: d * Y}, simultaneous=True))
    assert render(got) == render(parse_poly(str(want).replace("**", "^"))) if want != 0 else got.is_zero()


def test_bivar_diff():
    f = parse_poly("1/3*x^3 - x*y^10 + y^12")
    assert render(f.diff_x()) == render(parse_poly("x^2 - y^10"))
    assert render(f.diff_y()) == render(parse_poly("-10*x*y^9 + 12*y^11"))
