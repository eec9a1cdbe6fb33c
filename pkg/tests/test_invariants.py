import random
from dataclasses import replace
from fractions import Fraction as Fr

import pytest

from canyonlab.errors import InconsistentDevelopment
from canyonlab.invariants import (
    Branch,
    develop_phi2,
    first_level,
    identity_card,
    second_level,
    third_level,
)
from canyonlab.numerics import Coeff
from canyonlab.parser import parse_poly
from canyonlab.puiseux import PuiseuxSeries as S

from conftest import CORPUS, card, germ
from oracles import planted_pair, synthetic_expr, synthetic_polars, third_level_oracle


def test_first_level_examples():
    for name in ("F1", "G1"):
        for c in card(name).canyons.values():
            h, a = first_level(c)
            assert h == 12 and a.recognize() == 1
    doubled = identity_card(germ("F1") * parse_poly("2"))
    assert {a.recognize() for _, a in doubled.first.values()} == {2}


def test_second_level_F1():
    rec = card("F1").second[(0, 1)]
    assert (rec.h, rec.delta, rec.H) == (12, 5, 15)
    assert [a.recognize() for a in rec.a_tilde] == [Fr(-2, 3), Fr(2, 3)]
    assert rec.diff.recognize() == Fr(-4, 3)
    assert rec.applicable


def test_second_level_G1():
    cd = card("G1")
    rec = cd.second[(0, 1)]
    a = cd.canyons[0].arc.coeff(Fr(9, 2))
    assert (rec.h, rec.delta, rec.H, rec.bound) == (12, Fr(9, 2), Fr(27, 2), Fr(31, 2))
    assert (rec.diff - 4 * a / 3).is_zero()
    assert rec.applicable


def test_second_level_rejects_same_canyon():
    c = card("F1").canyons[0]
    with pytest.raises(ValueError):
        second_level(c, c)


def test_third_level_against_polynomial_oracle():
    # polars of the synthetic germ are the planted polynomial arcs
    cd = card("S3")
    arcs = synthetic_polars()
    expr = synthetic_expr()
    # match canyons to planted arcs by their y^5 coefficient
    order = {round(c.arc.coeff(5).mid.real): i for i, c in cd.canyons.items()}
    planted = {1: arcs[0], -1: arcs[1], 2: arcs[2]}
    for (i, j, k), rec in cd.third.items():
        ids = {v: key for key, v in order.items()}
        pol = [planted[ids[n]] for n in (i, j, k)]
        h, H, Hp, A12, A31 = third_level_oracle(expr, pol, rec.delta, rec.delta_prime)
        assert (rec.h, rec.H, rec.H_prime) == (h, H, Hp)
        assert rec.applicable
        assert rec.A[0].recognize() == A12 and rec.A[1].recognize() == A31


def test_third_level_order_mismatch():
    cs = card("S3").canyons
    rec = third_level(cs[0], replace(cs[1], h=Fr(19)), cs[2])
    assert not rec.applicable and rec.reason == "orders differ"


def test_third_level_needs_three_canyons():
    cs = card("F1").canyons
    with pytest.raises(ValueError):
        third_level(cs[0], cs[1], cs[0])
    assert card("F1").third == {}


@pytest.mark.parametrize("name", CORPUS)
def test_self_development_is_identity(name):
    for c in card(name).canyons.values():
        dev = develop_phi2((c.h, c.value), (c.h, c.value), 1, c.degree)
        assert len(dev.terms) == 1 and dev.terms[0][1].recognize() == 1


def test_development_G1_G2():
    f, g = card("G1"), card("G2")
    cf, cg = f.canyons[0], g.canyons[0]
    dev = develop_phi2((cf.h, cf.value), (cg.h, cg.value), 1, cf.degree)
    assert dev.terms[1][0] == 2 and dev.terms[1][1].recognize() == Fr(-1, 12)
    assert dev.cutoff == Fr(11, 2)
    assert all(b < dev.cutoff for b, _ in dev.terms)


def test_development_breaks_when_scale_is_wrong():
    # c**h != a_f / a_g leaves a residual at y**h that no correction can absorb
    sf = S([(Fr(12), Coeff(1))], Fr(30))
    sg = S([(Fr(12), Coeff(2))], Fr(30))
    with pytest.raises(InconsistentDevelopment) as err:
        develop_phi2((12, sf), (12, sg), 1, 6)
    assert err.value.exponent == 12


@pytest.mark.parametrize("seed", range(6))
def test_development_recovers_planted(seed):
    rng = random.Random(100 + seed)
    P = planted_pair(rng, seed % 3 + 1)
    sf = P["series_f"]
    if P["case"] == 1:
        assert sf.terms[1][0] < P["h"] + P["q_prime"]
    elif P["case"] == 3:
        assert sf.coeff(P["h"] + P["q_prime"]) == 0 or sf.coeff(P["h"] + P["q_prime"]).is_zero()
    dev = develop_phi2((P["h"], sf), (P["h"], P["series_g"]), P["c"], P["d"],
                       Branch(P["c"], P["N"], P["chat"]))
    assert [b for b, _ in dev.terms] == [b for b, _ in P["planted"]]
    for (_, r), (_, want) in zip(dev.terms, P["planted"]):
        assert (r - Coeff(want)).is_zero()


def test_card_examples():
    for name, H in (("F1", 15), ("G1", Fr(27, 2))):
        cd = card(name)
        assert len(cd.clusters.groups) == 1 and len(cd.canyons) == 2
        assert [r.H for k, r in cd.second.items() if k[0] < k[1]] == [H]


def test_card_without_tangential_polars():
    # the only polar x = 0 of x^3 + y^3 is not tangent to the cone
    cd = identity_card(parse_poly("x^3 + y^3"))
    assert cd.clusters.groups == {} and cd.canyons == {}
    assert len(cd.skeleton.polars) == 1 and not cd.skeleton.polars[0].tangential


@pytest.mark.parametrize("name", CORPUS)
def test_second_level_antisymmetric_and_bounded(name):
    cd = card(name)
    for (i, j), rec in cd.second.items():
        back = cd.second[(j, i)]
        assert back.H == rec.H
        if rec.applicable:
            assert (back.diff + rec.diff).is_zero()
            assert rec.h < rec.H < rec.h + rec.delta - 1
            assert rec.diff.certainly_nonzero()


@pytest.mark.parametrize("name", ["F1", "G1", "H", "S3"])
@pytest.mark.parametrize("c", [Fr(2), Fr(3), Fr(1, 2)])
def test_scaling_action(name, c):
    # f(x, c y): polars become gamma(c y), so f(gamma) picks up y -> c y
    base, scaled = card(name), identity_card(germ(name).scale_y(c))
    assert sorted(base.canyons) == sorted(scaled.canyons)
    for i, (h, a) in base.first.items():
        h2, a2 = scaled.first[i]
        assert h2 == h and (a2 - a * Coeff(c).pow_frac(h)).is_zero()
        assert scaled.canyons[i].degree == base.canyons[i].degree
    for k, rec in base.second.items():
        rec2 = scaled.second[k]
        assert (rec2.H, rec2.delta, rec2.h) == (rec.H, rec.delta, rec.h)
        if rec.applicable:
            # normalization by a removes c^h: the difference scales by c^(H-h)
            assert (rec2.diff - rec.diff * Coeff(c).pow_frac(rec.H - rec.h)).is_zero()
