"""Weak Poincare constants per kernel group for the builtin structures.

Reference values: 4/pi^2 for the segment [-1, 1] (and for the cross, whose
slowest mode is the odd segment mode) and 1/j'_{1,1}^2 for the unit disc.
"""
import argparse

import numpy as np

from lowdim.assembly import build_system
from lowdim.elliptic import group_poincare_constants
from lowdim.structure import BUILTINS, builtin

J1P = 1.8411837813406593  # first zero of J_1'
REFERENCE = {
    "segment": {(1,): 4 / np.pi**2},
    "cross_segments": {(1, 2): 4 / np.pi**2},
    "disc": {(1,): 1 / J1P**2},
    "disc_plus_segment": {(1,): 4 / np.pi**2, (2,): 1 / J1P**2},
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h", type=float, nargs="+", default=[0.2, 0.1, 0.05])
    args = ap.parse_args()
    print(f"{'structure':>18} {'h':>6} {'group':>8} {'C_k':>10} {'reference':>10}")
    for name in BUILTINS:
        for h in args.h:
            sysm = build_system(builtin(name), h)
            for grp, c in zip(sysm.dofmap.kernel_groups, group_poincare_constants(sysm)):
                ref = REFERENCE.get(name, {}).get(tuple(grp))
                ref_s = f"{ref:10.5f}" if ref is not None else f"{'-':>10}"
                print(f"{name:>18} {h:6.3f} {str(list(grp)):>8} {c:10.5f} {ref_s}")


if __name__ == "__main__":
    main()
