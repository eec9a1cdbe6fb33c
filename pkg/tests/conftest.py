"""Shared germ corpus and cached identity cards."""
from __future__ import annotations

from functools import lru_cache

import pytest
import sympy

from canyonlab.invariants import identity_card
from canyonlab.parser import parse_poly

F_T = "1/3*x^3 - t^2*x*y^10 + y^12"
G_T = "x^3 + y^12 + x*y^9 + t*y^13"


def synthetic(k=5, m=18, r=(1, -1, 2), s=(0, 1, 1)):
    """``integral_0^x prod (t - r_j y^k - s_j y^(k+1)) dt + y^m``: polars are the planted arcs."""
    x, y, t = sympy.symbols("x y t")
    P = sympy.Integer(1)
    for rj, sj in zip(r, s):
        P *= t - (rj * y**k + sj * y ** (k + 1))
    f = sympy.integrate(sympy.expand(P), (t, 0, x)) + y**m
    return parse_poly(str(sympy.expand(f)).replace("**", "^"))


CORPUS_SOURCES = {
    "F1": (F_T, {"t": 1}),
    "F2": (F_T, {"t": 2}),
    "G1": (G_T, {"t": 1}),
    "G2": (G_T, {"t": 2}),
    "H": ("x^3 - 3*x*y^10 + 3*y^12", {}),
    "cusp": ("x^2 - y^3", {}),
    "E6": ("x^3 + y^4", {}),
}


@lru_cache(maxsize=None)
def germ(name: str):
    if name == "S3":
        return synthetic()
    text, binds = CORPUS_SOURCES[name]
    return parse_poly(text, binds)


@lru_cache(maxsize=None)
def card(name: str):
    return identity_card(germ(name))


CORPUS = list(CORPUS_SOURCES) + ["S3"]


@pytest.fixture(scope="session")
def cards():
    return card
