"""The stretched-cylinder metric family on T^2 x [0, 2j].

The metric is dx^2 + (1 + u^2) dy^2 + dz^2 - 2u dy dz with u = xhat(x) =
j - |x - j|, equivalently dx^2 + dy^2 + (dz - u dy)^2.  The (y, z) fibers
are unit-area flat tori; the boundary fibers are unit squares.  The fiber
shear grows linearly up to the fold at x = j and comes back down, which
is what makes the y-circle long in the middle while the volume stays
linear in j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .flat_torus import Gram2, slice_gram, torus_diameter

__all__ = [
    "QuadratureError",
    "CylinderMetric",
    "UnipotentMatrix",
    "GEN_X",
    "GEN_Y",
    "GEN_Z",
    "heisenberg_relation_check",
    "area_m_closed_form",
]


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved error estimate {achieved:.3e})")
        self.achieved = achieved


def area_m_closed_form(j: float) -> float:
    """Closed form of 2 * integral_0^j sqrt(1+x^2) dx."""
    return j * math.sqrt(1.0 + j * j) + math.asinh(j)


def gram_from_parameter(u: float) -> np.ndarray:
    """3x3 Gram matrix of dx^2 + (1+u^2)dy^2 + dz^2 - 2u dy dz."""
    return np.array(
        [
            [1.0, 0.0, 0.0],
            [0.0, 1.0 + u * u, -u],
            [0.0, -u, 1.0],
        ]
    )


@dataclass(frozen=True)
class CylinderMetric:
    """Metric family member with interval [0, 2j]; j counts periods per half."""

    j: int

    def __post_init__(self) -> None:
        if self.j < 1 or int(self.j) != self.j:
            raise ValueError(f"j must be a positive integer, got {self.j}")

    # -- pointwise data ------------------------------------------------

    def xhat(self, x):
        """Fold coordinate min(x, 2j - x) = j - |x - j|; vectorized."""
        return self.j - np.abs(np.asarray(x, dtype=float) - self.j)

    def xhat_slope(self, x):
        """d(xhat)/dx, +1 before the fold, -1 after (0 exactly at it)."""
        return np.sign(self.j - np.asarray(x, dtype=float))

    def _check_point(self, p) -> tuple[float, float, float]:
        x, y, z = float(p[0]), float(p[1]), float(p[2])
        if not 0.0 <= x <= 2.0 * self.j:
            raise ValueError(f"x = {x} outside [0, {2 * self.j}]")
        return x, y, z

    def metric_at(self, p) -> np.ndarray:
        """Gram matrix of the metric at p = (x, y, z)."""
        x, _, _ = self._check_point(p)
        return gram_from_parameter(float(self.xhat(x)))

    def coframe_at(self, p) -> np.ndarray:
        """Orthonormal coframe rows (dx, dy, dz - xhat dy) in the dx,dy,dz basis."""
        x, _, _ = self._check_point(p)
        u = float(self.xhat(x))
        return np.array(
            [
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, -u, 1.0],
            ]
        )

    def slice_gram_at(self, x: float) -> Gram2:
        """Cross-section torus Gram at the given x."""
        return slice_gram(float(self.xhat(x)))

    def curve_t1_length(self, x: float) -> float:
        """Length sqrt(1 + xhat^2) of the y-coordinate circle at x."""
        u = float(self.xhat(x))
        return math.sqrt(1.0 + u * u)

    # -- integral quantities -------------------------------------------

    def volume(self, quadrature_tol: float = 1e-9, fiber_order: int = 4) -> float:
        """Total volume by quadrature of sqrt(det g) over the domain.

        The fiber integral uses a fixed Gauss-Legendre rule of the given
        order on the unit (y, z) square; the x-integral is adaptive and
        split at the fold.  The result is grid-independent because the
        volume density is identically 1.
        """
        if quadrature_tol <= 0.0:
            raise ValueError("quadrature tolerance must be positive")
        nodes, weights = np.polynomial.legendre.leggauss(fiber_order)
        ys = 0.5 * (nodes + 1.0)
        wts = 0.5 * weights

        def fiber_area(x: float) -> float:
            total = 0.0
            for yi, wy in zip(ys, wts):
                for zi, wz in zip(ys, wts):
                    total += wy * wz * math.sqrt(np.linalg.det(self.metric_at((x, yi, zi))))
            return total

        value = 0.0
        err = 0.0
        for a, b in ((0.0, float(self.j)), (float(self.j), 2.0 * self.j)):
            v, e = quad(fiber_area, a, b, epsabs=quadrature_tol / 4.0, epsrel=1e-12, limit=200)
            value += v
            err += e
        if err > quadrature_tol:
            raise QuadratureError("volume quadrature did not converge", err)
        return value

    def area_m(self) -> float:
        """Area of the long cylinder M = T^1 x [0, 2j], 2 * int_0^j sqrt(1+x^2) dx.

        Computed adaptively and cross-checked against the closed form; a
        disagreement beyond 1e-9 means the quadrature went wrong.
        """
        value, err = quad(
            lambda x: math.sqrt(1.0 + x * x), 0.0, float(self.j), epsabs=1e-12, epsrel=1e-13
        )
        value *= 2.0
        closed = area_m_closed_form(float(self.j))
        if abs(value - closed) > 1e-9:
            raise QuadratureError("area quadrature disagrees with closed form", abs(value - closed))
        return value

    # -- structure checks ----------------------------------------------

    def psi(self, p) -> tuple[float, float, float]:
        """Period map: unit step in x composed with the fiber shear z -> z + y.

        This is left translation by the x-generator of the discrete
        Heisenberg group in the coordinates where the metric reads
        dx^2 + dy^2 + (dz - x dy)^2.
        """
        x, y, z = float(p[0]), float(p[1]), float(p[2])
        return (x + 1.0, y, z + y)

    PSI_JACOBIAN = np.array(
        [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 1.0, 1.0],
        ]
    )

    def isometry_check_psi(self, samples: int = 1000, seed: int = 0, region: str = "periodic") -> float:
        """Max entrywise pullback residual of the period map over random points.

        region="periodic" samples x in [0, j-1], where the map is an
        isometry and the residual must vanish; region="fold" samples
        x in [j-1, j], the expected failure strip where the image crosses
        the fold and the shear slope flips sign.
        """
        if samples < 1:
            raise ValueError("samples must be >= 1")
        if region not in ("periodic", "fold"):
            raise ValueError(f"unknown region {region!r}")
        rng = np.random.default_rng(seed)
        lo, hi = (0.0, float(self.j - 1)) if region == "periodic" else (float(self.j - 1), float(self.j))
        J = self.PSI_JACOBIAN
        worst = 0.0
        for _ in range(samples):
            p = (rng.uniform(lo, hi), rng.uniform(), rng.uniform())
            pulled = J.T @ self.metric_at(self.psi(p)) @ J
            worst = max(worst, float(np.abs(pulled - self.metric_at(p)).max()))
        return worst

    def mass1_slide_bound(self) -> float:
        """Stable-mass bound mass_1[C] <= 1/j from the unit-length mixed class.

        The class (1, j) on the middle fiber has length exactly 1, and j
        copies of the fiber circle C differ from it by the y-circle, so
        averaging gives the 1/j bound.  The unit length is exact integer
        arithmetic in doubles and is asserted here.
        """
        length = self.slice_gram_at(float(self.j)).length((1, self.j))
        if length != 1.0:
            raise AssertionError(f"mixed class length expected exactly 1.0, got {length!r}")
        return 1.0 / self.j

    def diam1_estimate(self, n_grid: int = 512) -> float:
        """Upper bound for the 1-diameter via fiber diameters along x.

        Projecting to the x-coordinate shows every point is within a fiber
        diameter of the corresponding interval fiber; the max over a grid
        of fiber diameters bounds the 1-diameter.  Always < 1.
        """
        xs = np.linspace(0.0, 2.0 * self.j, max(1, n_grid))
        return max(torus_diameter(self.slice_gram_at(float(x))) for x in xs)


# -- discrete Heisenberg group ------------------------------------------


@dataclass(frozen=True)
class UnipotentMatrix:
    """3x3 integer upper-triangular matrix with unit diagonal."""

    m: tuple[tuple[int, ...], ...]

    @staticmethod
    def from_entries(a: int, b: int, c: int) -> "UnipotentMatrix":
        """[[1, a, c], [0, 1, b], [0, 0, 1]]."""
        return UnipotentMatrix(((1, a, c), (0, 1, b), (0, 0, 1)))

    def __post_init__(self) -> None:
        m = self.m
        ok = (
            len(m) == 3
            and all(len(r) == 3 for r in m)
            and all(isinstance(e, int) for r in m for e in r)
            and m[0][0] == m[1][1] == m[2][2] == 1
            and m[1][0] == m[2][0] == m[2][1] == 0
        )
        if not ok:
            raise ValueError(f"not a unipotent upper-triangular integer matrix: {m}")

    @property
    def a(self) -> int:
        return self.m[0][1]

    @property
    def b(self) -> int:
        return self.m[1][2]

    @property
    def c(self) -> int:
        return self.m[0][2]

    def __matmul__(self, other: "UnipotentMatrix") -> "UnipotentMatrix":
        # (a1,b1,c1)(a2,b2,c2) = (a1+a2, b1+b2, c1+c2+a1*b2)
        return UnipotentMatrix.from_entries(
            self.a + other.a, self.b + other.b, self.c + other.c + self.a * other.b
        )

    def inverse(self) -> "UnipotentMatrix":
        return UnipotentMatrix.from_entries(-self.a, -self.b, self.a * self.b - self.c)

    def __pow__(self, n: int) -> "UnipotentMatrix":
        if n < 0:
            return self.inverse() ** (-n)
        out = UnipotentMatrix.from_entries(0, 0, 0)
        base = self
        while n:
            if n & 1:
                out = out @ base
            base = base @ base
            n >>= 1
        return out

    def conjugate_by(self, g: "UnipotentMatrix") -> "UnipotentMatrix":
        return g @ self @ g.inverse()

    def commutator(self, other: "UnipotentMatrix") -> "UnipotentMatrix":
        return self @ other @ self.inverse() @ other.inverse()


GEN_X = UnipotentMatrix.from_entries(1, 0, 0)
GEN_Y = UnipotentMatrix.from_entries(0, 1, 0)
GEN_Z = UnipotentMatrix.from_entries(0, 0, 1)


def heisenberg_relation_check(jmax: int) -> bool:
    """Exact integer check of the lattice relations up to power jmax.

    Verifies [x, y] = z, centrality of z, and the defining power relation
    z^j = (x^j y x^-j) y^-1 for j = 1..jmax.
    """
    if jmax < 1:
        raise ValueError("jmax must be >= 1")
    if GEN_X.commutator(GEN_Y) != GEN_Z:
        return False
    if GEN_Z @ GEN_X != GEN_X @ GEN_Z or GEN_Z @ GEN_Y != GEN_Y @ GEN_Z:
        return False
    for j in range(1, jmax + 1):
        lhs = GEN_Z**j
        rhs = GEN_Y.conjugate_by(GEN_X**j) @ GEN_Y.inverse()
        if lhs != rhs:
            return False
    return True
