"""L2 convergence of the stationary solver on the two model structures.

cross_segments: f = s on component 1, 0 on component 2, exact solution
u1 = -s^3/6 + s/2, u2 = 0. cross_discs: manufactured U = cos(pi r^2) on both
discs with f = -Laplace U.
"""
import argparse

import numpy as np

from lowdim.elliptic import EllipticProblem, convergence_study
from lowdim.structure import builtin


def r2(xi):
    return xi[:, 0] ** 2 + xi[:, 1] ** 2


CASES = {
    "cross_segments": (
        {1: lambda xi: xi[:, 0], 2: 0.0},
        {1: lambda xi: -xi[:, 0] ** 3 / 6 + xi[:, 0] / 2, 2: 0.0},
    ),
    "cross_discs": (
        lambda xi: 4 * np.pi * np.sin(np.pi * r2(xi)) + 4 * np.pi**2 * r2(xi) * np.cos(np.pi * r2(xi)),
        lambda xi: np.cos(np.pi * r2(xi)),
    ),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h", type=float, nargs="+", default=[0.2, 0.1, 0.05, 0.025])
    ap.add_argument("--case", choices=sorted(CASES), nargs="+", default=sorted(CASES))
    args = ap.parse_args()
    for name in args.case:
        f, exact = CASES[name]
        tab = convergence_study(EllipticProblem(builtin(name), f, args.h[0]), args.h, exact)
        print(f"# {name}")
        print(f"{'h':>8} {'L2 error':>12} {'rate':>6}")
        for h, e, r in tab.rows():
            print(f"{h:8.4f} {e:12.4e} {r:6.3f}")


if __name__ == "__main__":
    main()
