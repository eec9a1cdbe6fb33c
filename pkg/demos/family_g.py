"""Walk through G_t = x^3 + y^12 + x y^9 + t y^13.

Here the scale constraints leave three candidates for c.  The second
coordinate of the bi-Lipschitz map is then developed along the polars,
Y = c y + r_1 y^2 + ..., and substituting it into the second-level relation
leaves a term no free parameter can absorb.
"""
from canyonlab.equivalence import decide
from canyonlab.invariants import identity_card
from canyonlab.parser import parse_poly

TEMPLATE = "x^3 + y^12 + x*y^9 + t*y^13"


def main():
    f = identity_card(parse_poly(TEMPLATE, {"t": 1}))
    g = identity_card(parse_poly(TEMPLATE, {"t": 2}))
    for p in f.skeleton.polars:
        print(f"polar {p.arc}  h={p.h}  d={p.d}")
    rec = f.second[(0, 1)]
    print(f"H={rec.H}  bound h+delta-1={rec.bound}  diff={rec.diff}")

    verdict = decide(f, g)
    print(f"\nG_1 vs G_2: {verdict.kind} via {verdict.route}")
    for r in verdict.records:
        print(f"matching {r.matching.canyons}: {len(r.detail['solution'].values)} candidates for c")
        for c, ref in r.detail["refutations"]:
            dev = " + ".join(f"({v})y^{b}" for b, v in ref.development[:2])
            print(f"  c={c}\n    Y = {dev} + ...\n    stuck at y^{ref.exponent}: {ref.reason}")


if __name__ == "__main__":
    main()
