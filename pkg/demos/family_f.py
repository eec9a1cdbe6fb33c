"""Walk through the family F_t = x^3/3 - t^2 x y^10 + y^12.

Two polar arcs, two canyons of degree 6 and a second-level difference that
scales like t^3.  The leading coefficients force c^12 = 1, the second level
forces c^3 = +-t^3/s^3, and for t != s the two cannot hold together.
"""
from canyonlab.equivalence import decide
from canyonlab.invariants import identity_card
from canyonlab.parser import parse_poly

TEMPLATE = "1/3*x^3 - t^2*x*y^10 + y^12"


def show_card(t):
    card = identity_card(parse_poly(TEMPLATE, {"t": t}))
    print(f"F_{t}:")
    for p in card.skeleton.polars:
        print(f"  polar {p.arc}   h={p.h}  a={p.a.recognize()}  d={p.d}")
    for (i, j), rec in card.second.items():
        if i < j:
            print(f"  canyons {i},{j}: delta={rec.delta}  H={rec.H}  diff={rec.diff.recognize()}")
    return card


def main():
    cards = {t: show_card(t) for t in (1, 2)}
    verdict = decide(cards[1], cards[2])
    print(f"\nF_1 vs F_2: {verdict.kind}")
    for rec in verdict.records:
        sol = rec.detail["solution"]
        cons = ", ".join(f"c^{c.exponent} = {c.value.recognize()}" for c in rec.detail["constraints"])
        print(f"  matching {rec.matching.canyons}: {cons}")
        print(f"    forced c^{sol.g} = {sol.z.recognize()}, but then c^12 = {sol.lhs.recognize()}")


if __name__ == "__main__":
    main()
