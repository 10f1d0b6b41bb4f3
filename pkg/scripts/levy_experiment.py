#!/usr/bin/env python3
"""Levy-Laplace experiment: sweep the exponent identity
M exp(-rho * trace(t)) = exp(-t psi(rho)) over a (t, rho) grid and report
Monte Carlo deviations in sigma units.

Usage: python scripts/levy_experiment.py [samples] [seed]
"""

import sys
from fractions import Fraction

import numpy as np

from padicstoch.levy import Ball, IntensitySpec, JumpFunctionalSpec, levy_laplace_check
from padicstoch.padic import PAdicNumber


def paving():
    centers = [Fraction(1, 2), Fraction(3, 2), Fraction(1, 4)]
    cells = [Ball(PAdicNumber.from_fraction(c, 2), -2) for c in centers]
    return IntensitySpec(tuple(cells), np.array([0.7, 0.5, 0.9]))


def main(samples: str = "50000", seed: str = "7") -> None:
    spec = JumpFunctionalSpec(0.3, paving(), a=2.0)
    rng = np.random.default_rng(int(seed))
    print(f"{'t':>5} {'rho':>5} {'empirical':>12} {'exact':>12} {'sigmas':>8}")
    for t in (0.5, 1.0, 2.0):
        for row in levy_laplace_check(spec, t, [0.5, 1.0, 2.0], int(samples), rng):
            print(
                f"{t:5.2f} {row.rho:5.2f} {row.empirical:12.6f} "
                f"{row.exact:12.6f} {row.sigmas:8.2f}"
            )


if __name__ == "__main__":
    main(*sys.argv[1:])
