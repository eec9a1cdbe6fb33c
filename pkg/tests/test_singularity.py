import random
from dataclasses import replace
from fractions import Fraction as Fr

import pytest

from canyonlab.numerics import Coeff, UPoly
from canyonlab.parser import parse_poly
from canyonlab.puiseux import INF, PuiseuxSeries as S, conjugates, series_contact, substitute_x
from canyonlab.singularity import (
    bar_of,
    cluster,
    gradient_degree,
    gradient_degree_formula,
    group_canyons,
    is_mini_regular,
    kuo_lu_tree,
    mini_regularize,
    polar_arcs,
    skeleton,
    tangent_cone,
)

from conftest import CORPUS, card, germ

F1 = "1/3*x^3 - x*y^10 + y^12"
G1 = "x^3 + y^12 + x*y^9 + y^13"


def test_mini_regularize_examples():
    f = parse_poly(F1)
    g, lam = mini_regularize(f)
    assert lam == 0 and g == f
    g, lam = mini_regularize(parse_poly("x^2*y"))
    assert lam == 1 and is_mini_regular(g)
    g, lam = mini_regularize(parse_poly("y^3"))
    assert lam == 1 and g.coeff(3, 0).recognize() == 1


def test_tangent_cone_examples():
    assert [c.recognize() for c in tangent_cone(parse_poly(F1))] == [0]
    assert sorted(c.recognize().re for c in tangent_cone(parse_poly("x^2 - y^2"))) == [-1, 1]
    assert [c.recognize() for c in tangent_cone(parse_poly(G1))] == [0]


def test_polar_arcs_F1():
    f = parse_poly(F1)
    ps = polar_arcs(f, 20, tangent_cone(f))
    assert sorted(p.arc.coeff(5).recognize().re for p in ps) == [-1, 1]
    for p in ps:
        assert p.h == 12 and p.a.recognize() == 1 and p.tangential


def test_polar_arcs_G1_orbit():
    f = parse_poly(G1)
    ps = polar_arcs(f, 20, tangent_cone(f))
    assert len(ps) == 2 and ps[0].orbit == ps[1].orbit
    for p in ps:
        c = p.arc.coeff(Fr(9, 2))
        assert (3 * c * c + 1).is_zero()
        assert p.h == 12 and p.a.recognize() == 1


def test_polar_of_multiple_factor_removed():
    f = parse_poly("x^2")
    assert polar_arcs(f, 10, tangent_cone(f)) == []


def test_kuo_lu_tree_F1():
    # all three roots of F1 have order 4 (single Newton edge from (0,12) to (3,0))
    f = parse_poly(F1)
    tree = kuo_lu_tree(f, 16)
    assert len(tree.roots) == 3
    assert all(r.ord() == 4 for r, _ in tree.roots)
    assert [b.height for b in tree.bars if b.parent is None] == [4]


def test_kuo_lu_tree_two_roots():
    tree = kuo_lu_tree(parse_poly("(x - y^2)*(x - y^3)"), 10)
    top, = [b for b in tree.bars if b.parent is None]
    assert top.height == 2 and len(top.members) == 2


def test_bar_of_F1_and_G1():
    for text in (F1, G1):
        sk = skeleton(parse_poly(text))
        for p in sk.polars:
            assert sk.tree.bar(p.bar_id).height == 4
            assert bar_of(sk.tree, p) == p.bar_id


def test_bar_of_single_root():
    sk = skeleton(parse_poly("x^2 - y^3"))
    for p in sk.polars:
        assert sk.tree.bar(p.bar_id).parent is None


def test_gradient_degree_examples():
    sk = skeleton(parse_poly(F1))
    assert [p.d for p in sk.polars] == [6, 6]
    sk = skeleton(parse_poly(G1))
    assert [p.d for p in sk.polars] == [Fr(13, 2)] * 2


def test_gradient_degree_rejects_non_polar():
    with pytest.raises(ValueError):
        gradient_degree(parse_poly("x^2 + y^2"), S.monomial(Coeff(1), Fr(1)))


def _lambda_at(f, arc, q, u):
    moved = arc + S([(Fr(q), Coeff(u))])
    return min(substitute_x(f.diff_x(), moved).ord(), substitute_x(f.diff_y(), moved).ord())


@pytest.mark.parametrize("name", CORPUS)
def test_gradient_degree_against_closed_form_and_random_u(name):
    sk = card(name).skeleton
    rng = random.Random(name)
    for p in sk.polars:
        assert p.d == gradient_degree_formula(sk.f, p.arc)
        lam_inf = substitute_x(sk.f.diff_y(), p.arc).ord()
        N = p.arc.denominator() * 2
        for _ in range(3):
            u = Fr(rng.randint(1, 40), rng.randint(1, 40)) * rng.choice([1, -1])
            assert _lambda_at(sk.f, p.arc, p.d, u) == lam_inf
            assert _lambda_at(sk.f, p.arc, p.d + 1, u) == lam_inf
            if p.d > 1:
                assert _lambda_at(sk.f, p.arc, p.d - Fr(1, N), u) < lam_inf


@pytest.mark.parametrize("name", CORPUS)
def test_lambda_nondecreasing(name):
    sk = card(name).skeleton
    for p in sk.polars:
        qs = [Fr(k, 4) for k in range(4, int(4 * (p.d + 2)))]
        lam = [_lambda_at(sk.f, p.arc, q, 7) for q in qs]
        assert lam == sorted(lam)


def test_group_canyons_examples():
    for text in (F1, G1):
        sk = skeleton(parse_poly(text))
        assert len(sk.canyons) == 2
    sk = skeleton(parse_poly("x^2 - y^3"))
    assert len(sk.canyons) == len(group_canyons(sk.polars[:1])) == 1


def test_cluster_F1_and_G1():
    for text, k in ((F1, 5), (G1, Fr(9, 2))):
        cl = skeleton(parse_poly(text)).clusters
        (key, ids), = cl.groups.items()
        assert key.tangent == 0 and key.h == 12 and len(ids) == 2
        assert cl.contacts[(0, 1)] == k
        assert cl.K == {0: (k,), 1: (k,)}
        assert cl.omega[key] == [(0, 1)]


def test_two_degrees_two_clusters():
    sk = skeleton(parse_poly(F1))
    c0, c1 = sk.canyons
    cl = cluster([c0, replace(c1, degree=Fr(7))])
    assert len(cl.groups) == 2
    assert cl.K == {0: (), 1: ()}
    assert all(len(v) == 1 for v in cl.omega.values())


@pytest.mark.parametrize("name", CORPUS)
def test_factorization_identity(name):
    sk = card(name).skeleton
    expanded = [(z, m) for r, m in sk.tree.roots for z in [r]]
    for p in sk.polars:
        total = sum(m * (p.arc - z).ord() for z, m in expanded)
        assert total == p.h


@pytest.mark.parametrize("name", CORPUS)
def test_canyon_constancy_and_contact_bound(name):
    sk = card(name).skeleton
    for c in sk.canyons:
        for i in c.members:
            p = sk.polars[i]
            assert (p.d, p.h, p.tangent) == (c.degree, c.h, c.tangent) and p.a.overlaps(c.a)
            for j in c.members:
                assert sk.polars[j].arc is p.arc or series_contact(p.arc, sk.polars[j].arc) >= c.degree
    for (i, j), k in sk.clusters.contacts.items():
        a, b = sk.canyons[i], sk.canyons[j]
        assert k < min(a.degree, b.degree)
        # representative independence
        for mi in a.members:
            for mj in b.members:
                assert series_contact(sk.polars[mi].arc, sk.polars[mj].arc) == k


def _discrete(sk):
    sizes = sorted(len(v) for v in sk.clusters.groups.values())
    per = sorted((str(c.degree), str(c.h), str(sk.clusters.K.get(c.id))) for c in sk.canyons
                 if c.tangent is not None and c.degree > 1)
    return sizes, per


@pytest.mark.parametrize("name", ["F1", "G1", "H", "E6"])
def test_shear_robustness(name):
    rng = random.Random(name)
    f = germ(name)
    lam = Fr(rng.randint(1, 5), rng.randint(1, 3))
    g = f.substitute_linear(1, lam, 0, 1)
    assert _discrete(card(name).skeleton) == _discrete(skeleton(g))
