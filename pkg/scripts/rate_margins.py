#!/usr/bin/env python3
"""Deterministic contiguity diagnostics along geometric n grids.

Prints, for the supercritical homogeneous perturbation and the critical
schedule, the rate margins log a_n + R_n with their trend class and the
exact affinity against its leading-order approximation.
"""

from __future__ import annotations

import math

from rcgraph.contiguity import ModelPair, contiguity_report, critical_affinity_approx, fmt, rate_margin_curve
from rcgraph.regimes import supercritical_schedule

GRID = [10**3, 10**4, 10**5, 10**6]


def main() -> None:
    lam, delta = 2.0, 0.1

    def family(n):
        return ModelPair.homogeneous(n, lam, supercritical_schedule(lam, delta, n))

    print("# supercritical perturbation, lambda=2, delta=0.1")
    print("n,kl,s2,r,R,affinity")
    for n in GRID:
        print(",".join(contiguity_report(family(n)).csv_row()))
    for e in (0.05, 0.1, 0.2, 0.3):
        curve = rate_margin_curve(family, lambda n, e=e: n**-e, GRID)
        margins = " ".join(fmt(m) for m in curve.margins)
        print(f"a_n=n^-{e}: margins {margins} -> {curve.classification.value}")

    print("\n# critical affinity, lambda_n = 1 + t n^(-1/2)")
    for t in (0.5, 1.0, 2.0):
        for n in GRID:
            exact, approx = critical_affinity_approx(lambda m, t=t: 1 + t / math.sqrt(m), n)
            print(f"t={t} n={n}: exact={fmt(exact)} approx={fmt(approx)}")


if __name__ == "__main__":
    main()
