"""Gauss rules on the reference triangle and the reference segment.

Triangle rules are conical products: a Gauss-Jacobi rule with weight
(1 - x) in the first direction times a Gauss-Legendre rule in the second,
collapsed onto {x, y >= 0, x + y <= 1}.  This yields positive weights and
exactness for every total degree the module advertises, which is the
contract the rest of the code relies on; the point count (m^2 for degree
2m-1) is irrelevant at these sizes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

TRIANGLE_MAX_DEGREE = 12
SEGMENT_MAX_DEGREE = 21


@dataclass(frozen=True)
class QuadRule:
    """Immutable quadrature rule on a reference domain.

    points has shape (nq, 2) for the triangle (affine coordinates (x, y),
    barycentric (1-x-y, x, y)) and (nq,) for the segment on [0, 1].
    Weights are positive and sum to the reference measure: 1/2 for the
    triangle, 1 for the segment.
    """

    points: np.ndarray
    weights: np.ndarray
    degree: int

    def __post_init__(self) -> None:
        self.points.setflags(write=False)
        self.weights.setflags(write=False)


@lru_cache(maxsize=None)
def segment_rule(degree: int) -> QuadRule:
    """Gauss-Legendre on [0, 1], exact for polynomials up to `degree`.

    Carries two points beyond the minimal count: edge data oscillates
    with omega, and the extra points buy about four orders of accuracy on
    those non-polynomial integrands at negligible cost.
    """
    if not 0 <= degree <= SEGMENT_MAX_DEGREE:
        raise ValueError(f"segment rule degree must be in 0..{SEGMENT_MAX_DEGREE}, got {degree}")
    m = max(1, (degree + 2) // 2) + 2
    x, w = np.polynomial.legendre.leggauss(m)
    return QuadRule(points=(x + 1.0) / 2.0, weights=w / 2.0, degree=degree)


@lru_cache(maxsize=None)
def triangle_rule(degree: int) -> QuadRule:
    """Conical-product rule on the reference triangle, exact up to `degree`."""
    if not 0 <= degree <= TRIANGLE_MAX_DEGREE:
        raise ValueError(f"triangle rule degree must be in 0..{TRIANGLE_MAX_DEGREE}, got {degree}")
    m = max(1, (degree + 2) // 2)
    # Direction a: weight (1 - a) on [0, 1] via Jacobi(alpha=1, beta=0) on [-1, 1].
    xa, wa = roots_jacobi(m, 1.0, 0.0)
    a = (xa + 1.0) / 2.0
    wa = wa / 4.0
    # Direction b: plain Gauss-Legendre on [0, 1].
    xb, wb = np.polynomial.legendre.leggauss(m)
    b = (xb + 1.0) / 2.0
    wb = wb / 2.0
    # Collapse the square onto the triangle: (a, b) -> (a, b (1 - a)).
    A, B = np.meshgrid(a, b, indexing="ij")
    WA, WB = np.meshgrid(wa, wb, indexing="ij")
    pts = np.column_stack([A.ravel(), (B * (1.0 - A)).ravel()])
    wts = (WA * WB).ravel()
    return QuadRule(points=pts, weights=wts, degree=degree)


def triangle_bary(rule: QuadRule) -> np.ndarray:
    """Barycentric coordinates (nq, 3) of a triangle rule's points."""
    x, y = rule.points[:, 0], rule.points[:, 1]
    return np.column_stack([1.0 - x - y, x, y])
