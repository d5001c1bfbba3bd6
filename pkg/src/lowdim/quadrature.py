"""Fixed quadrature rules on reference elements.

Segment rules live on [0, 1]; triangle rules on the unit reference triangle with
vertices (0,0), (1,0), (0,1). Weights are normalised to sum to one, so integrals
are ``measure * sum(w * f(x))``.
"""
import numpy as np


def gauss_segment(n=3):
    """n-point Gauss-Legendre rule on [0, 1]; exact to degree 2n - 1."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _sym3(a, b, w):
    pts = [(a, a), (a, b), (b, a)]
    return pts, [w] * 3


def triangle_degree4():
    """Six-point symmetric rule, exact to degree 4 (Dunavant)."""
    p1, w1 = _sym3(0.445948490915965, 0.108103018168070, 0.223381589678011)
    p2, w2 = _sym3(0.091576213509771, 0.816847572980459, 0.109951743655322)
    # barycentric (l1, l2, l3) -> reference (l2, l3)
    pts = []
    for (l1, l2) in p1 + p2:
        l3 = 1.0 - l1 - l2
        pts.append((l2, l3))
    return np.array(pts), np.array(w1 + w2)


SEGMENT_RULE = gauss_segment(3)
TRIANGLE_RULE = triangle_degree4()
