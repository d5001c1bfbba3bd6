"""Backward Euler heat flow on cross_segments approaching the stationary solution."""
import argparse
import csv
import sys

from lowdim.assembly import build_system
from lowdim.elliptic import EllipticProblem, solve_elliptic
from lowdim.parabolic import ParabolicProblem, asymptotic_check, constant_load, solve_parabolic
from lowdim.structure import builtin

import numpy as np


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--h", type=float, default=0.05)
    ap.add_argument("--T", type=float, default=20.0)
    ap.add_argument("--dt", type=float, default=0.05)
    ap.add_argument("--theta", type=float, default=1.0)
    ap.add_argument("--every", type=int, default=40, help="print every n-th step")
    ap.add_argument("--csv", help="write the full trajectory table here")
    args = ap.parse_args()

    s = builtin("cross_segments")
    f = {1: lambda xi: xi[:, 0], 2: 0.0}
    sysm = build_system(s, args.h)
    ustar = solve_elliptic(EllipticProblem(s, f, args.h), sysm).u
    traj = solve_parabolic(ParabolicProblem(sysm, np.zeros(sysm.n_dofs), args.T, args.dt, args.theta,
                                            constant_load(sysm, f)))
    rep = asymptotic_check(traj, ustar, sysm)
    lam1 = 1.0 / 0.405284735  # first nonzero eigenvalue pi^2/4 of the cross
    print(f"{'t':>7} {'||u-u*||_M':>12} {'E(u-u*)':>12} {'exp(-lam1 t)':>13}")
    for k in range(0, len(traj), args.every):
        t = traj.times[k]
        print(f"{t:7.2f} {rep.distances[k]:12.4e} {rep.energies[k]:12.4e} {rep.distances[0] * np.exp(-lam1 * t):13.4e}")
    print(f"monotone: {rep.monotone}  final energy: {rep.final_energy:.3e}")
    if args.csv:
        out = open(args.csv, "w", newline="") if args.csv != "-" else sys.stdout
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["t", "dist", "energy"])
        for row in zip(traj.times, rep.distances, rep.energies):
            w.writerow([repr(float(v)) for v in row])


if __name__ == "__main__":
    main()
