"""Flat 2-torus toolkit: lattice reduction, systole, diameter, moduli.

A flat torus R^2 / L is described by the Gram matrix of a lattice basis.
Everything here is exact linear algebra on 2x2 symmetric matrices plus
integer enumeration; no randomness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "Gram2",
    "ModuliPoint",
    "slice_gram",
    "lagrange_reduce",
    "shortest_vector",
    "class_length",
    "torus_diameter",
    "moduli_point",
    "loewner_ratio",
    "LOEWNER_BOUND",
]

# sup of sys_1^2 / sqrt(det) over all flat 2-tori, attained hexagonally
LOEWNER_BOUND = 2.0 / math.sqrt(3.0)


@dataclass(frozen=True)
class Gram2:
    """Gram matrix [[a, b], [b, d]] of a 2D lattice basis."""

    a: float
    b: float
    d: float

    def __post_init__(self) -> None:
        if not (self.a > 0.0 and self.det > 0.0):
            raise ValueError(f"Gram matrix not positive definite: {self}")

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.b

    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.b, self.d]], dtype=float)

    def length(self, v: tuple[int, int] | np.ndarray) -> float:
        p, q = v
        return math.sqrt(self.a * p * p + 2.0 * self.b * p * q + self.d * q * q)


class ModuliPoint(NamedTuple):
    """Point s + it of the standard fundamental domain of the modular group."""

    s: float
    t: float


def slice_gram(xhat: float) -> Gram2:
    """Gram matrix [[1 + xhat^2, -xhat], [-xhat, 1]] of a cylinder cross-section.

    Its determinant is exactly 1 for every xhat, so each cross-section
    torus has unit area.
    """
    return Gram2(1.0 + xhat * xhat, -xhat, 1.0)


def lagrange_reduce(g: Gram2) -> tuple[Gram2, np.ndarray]:
    """Lagrange-Gauss reduction of a 2D lattice basis.

    Returns the reduced Gram matrix and the unimodular matrix U with
    columns giving the reduced basis in terms of the original one, so
    reduced = U^T G U.  The reduced basis satisfies
    |e1| <= |e2| and 2|<e1,e2>| <= |e1|^2.
    """
    G = g.matrix()
    U = np.eye(2, dtype=np.int64)
    for _ in range(256):
        if G[0, 0] > G[1, 1]:
            G = G[::-1, ::-1].copy()
            U = U[:, ::-1].copy()
        mu = round(G[0, 1] / G[0, 0])
        if mu != 0:
            # e2 -> e2 - mu * e1
            T = np.array([[1, -mu], [0, 1]], dtype=np.int64)
            U = U @ T
            G = T.T.astype(float) @ G @ T.astype(float)
        if G[1, 1] >= G[0, 0] - 1e-300 and mu == 0:
            break
    else:  # pragma: no cover
        raise RuntimeError("lattice reduction failed to terminate")
    return Gram2(G[0, 0], G[0, 1], G[1, 1]), U


def _canonical_coeffs(v: np.ndarray) -> tuple[int, int]:
    p, q = int(v[0]), int(v[1])
    if p < 0 or (p == 0 and q < 0):
        p, q = -p, -q
    return p, q


def shortest_vector(g: Gram2) -> tuple[float, tuple[int, int]]:
    """Shortest nonzero lattice vector: (length, integer coefficients).

    Reduction brings the search down to the window |p|, |q| <= 2 around
    the reduced basis; the window is exhaustive for reduced bases and the
    slack guards borderline rounding.  Ties are broken deterministically
    by canonical sign then lexicographic order.
    """
    red, U = lagrange_reduce(g)
    best_len = math.inf
    best: tuple[int, int] | None = None
    for p in range(-2, 3):
        for q in range(-2, 3):
            if p == 0 and q == 0:
                continue
            ell = red.length((p, q))
            cand = _canonical_coeffs(U @ np.array([p, q], dtype=np.int64))
            if ell < best_len - 1e-12:
                best_len = ell
                best = cand
            elif abs(ell - best_len) <= 1e-12 and best is not None and cand < best:
                best_len = min(best_len, ell)
                best = cand
    assert best is not None
    return best_len, best


def class_length(g: Gram2, v: tuple[int, int]) -> float:
    """Length of the shortest geodesic in the homotopy class v = (p, q)."""
    return g.length(v)


def torus_diameter(g: Gram2) -> float:
    """Diameter of the flat torus = covering radius of the lattice.

    With a reduced basis (u, v) signed so that <u, v> <= 0, the Delaunay
    triangles are the two congruent halves of the fundamental
    parallelogram cut along the short diagonal u + v; the covering radius
    is their common circumradius.  The rectangular case degenerates to
    half the diagonal and needs no special handling.
    """
    red, _ = lagrange_reduce(g)
    b = -abs(red.b)  # obtuse convention
    s1 = math.sqrt(red.a)
    s2 = math.sqrt(red.d)
    s3 = math.sqrt(red.a + red.d + 2.0 * b)
    # circumradius = product of sides / (4 * triangle area), area = sqrt(det)/2
    return s1 * s2 * s3 / (2.0 * math.sqrt(red.det))


def moduli_point(g: Gram2) -> ModuliPoint:
    """Reduce the torus shape to the fundamental domain |s| <= 1/2, s^2 + t^2 >= 1.

    The shape parameter is tau = (b + i sqrt(det)) / a, acted on by the
    modular group; translations and inversions are applied until tau lies
    in the standard fundamental domain.
    """
    s = g.b / g.a
    t = math.sqrt(g.det) / g.a
    for _ in range(256):
        s -= round(s)
        n2 = s * s + t * t
        if n2 >= 1.0 - 1e-15:
            break
        s, t = -s / n2, t / n2
    else:  # pragma: no cover
        raise RuntimeError("moduli reduction failed to terminate")
    # canonicalize the two boundary identifications so equivalent tori
    # (e.g. rescalings of one another) always map to the same point
    if abs(s - 0.5) <= 1e-12:
        s = -0.5
    if abs(s * s + t * t - 1.0) <= 1e-12 and s > 0.0:
        s = -s
    return ModuliPoint(s + 0.0, t)  # drop negative zero


def loewner_ratio(g: Gram2) -> float:
    """sys_1^2 / area for the flat torus; at most 2/sqrt(3)."""
    ell, _ = shortest_vector(g)
    return ell * ell / math.sqrt(g.det)
