"""Sweep both families over a few parameter values and print the classes never told apart."""
from canyonlab.cli import cmd_sweep
from canyonlab.serialize import dumps

for template, values in (("1/3*x^3 - t^2*x*y^10 + y^12", ["1", "2", "3", "-1"]),
                         ("x^3 + y^12 + x*y^9 + t*y^13", ["0", "1", "2"])):
    report = cmd_sweep(template, "t", values)
    print(template)
    for pair in report["pairs"]:
        print(f"  t={pair['a']} vs t={pair['b']}: {pair['verdict']} ({pair['route']})")
    print("  classes:", dumps(report["classes"]))
