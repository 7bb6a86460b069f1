"""Calibration machinery: the area-calibrating 2-form, cutoffs, pairings.

The central object is the closed 2-form sqrt(1+x^2) dx ^ d(lambda) with
lambda = y - x z / (1 + x^2).  It has unit comass, restricts to the area
form on the long cylinder M = {z = const} for x <= j, and after a cutoff
supported in ]0, j[ it pairs with M to give the quadratic-in-j lower
bound for the stable 2-mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import quad

from .cylinder import CylinderMetric, QuadratureError

__all__ = [
    "CutoffProfile",
    "TwoForm",
    "alpha",
    "alpha_at",
    "cutoff_alpha",
    "closedness_check",
    "d_residual_at",
    "comass_at",
    "comass_residual",
    "hodge_residual",
    "integrate_form_over_M",
    "phi_independent_bound",
    "PairingMatrix",
    "beta_pairing_matrix",
]


def _smoothstep(t: float) -> float:
    if t <= 0.0:
        return 0.0
    if t >= 1.0:
        return 1.0
    return t * t * (3.0 - 2.0 * t)


@dataclass(frozen=True)
class CutoffProfile:
    """C^1 plateau profile: 0 outside ]0, j[, 1 on [width, j - width].

    The ramps are cubic smoothsteps, so the derivative vanishes at every
    knot and finite-difference closedness checks see a C^1 function.
    """

    j: int
    transition_width: float = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.j < 1:
            raise ValueError("j must be >= 1")
        if self.transition_width is None:
            object.__setattr__(self, "transition_width", min(1.0, self.j / 2.0))
        w = self.transition_width
        if not (0.0 < w <= 1.0) or w > self.j / 2.0:
            raise ValueError(f"transition width {w} must lie in (0, 1] and at most j/2")

    def __call__(self, x: float) -> float:
        w = self.transition_width
        if x <= 0.0 or x >= self.j:
            return 0.0
        if x < w:
            return _smoothstep(x / w)
        if x > self.j - w:
            return _smoothstep((self.j - x) / w)
        return 1.0


@dataclass(frozen=True)
class TwoForm:
    """2-form on the cylinder: coefficients of dx^dy, dx^dz, dy^dz."""

    c_xy: Callable[[float, float, float], float]
    c_xz: Callable[[float, float, float], float]
    c_yz: Callable[[float, float, float], float]

    def components_at(self, p) -> tuple[float, float, float]:
        x, y, z = float(p[0]), float(p[1]), float(p[2])
        return (self.c_xy(x, y, z), self.c_xz(x, y, z), self.c_yz(x, y, z))


def alpha() -> TwoForm:
    """The calibrating form sqrt(1+x^2) dx ^ d(lambda).

    Expanding d(lambda) with lambda = y - x z / (1+x^2) kills the dx^dx
    term, leaving sqrt(1+x^2) dx^dy - (x / sqrt(1+x^2)) dx^dz; the dy^dz
    component is identically zero.
    """
    return TwoForm(
        c_xy=lambda x, y, z: math.sqrt(1.0 + x * x),
        c_xz=lambda x, y, z: -x / math.sqrt(1.0 + x * x),
        c_yz=lambda x, y, z: 0.0,
    )


def alpha_at(p) -> tuple[float, float, float]:
    """Components of the calibrating form at a point."""
    return alpha().components_at(p)


def cutoff_alpha(phi: CutoffProfile) -> TwoForm:
    """The cutoff form phi(x) * alpha; closed because phi depends on x only."""
    base = alpha()
    return TwoForm(
        c_xy=lambda x, y, z: phi(x) * base.c_xy(x, y, z),
        c_xz=lambda x, y, z: phi(x) * base.c_xz(x, y, z),
        c_yz=lambda x, y, z: 0.0,
    )


def d_residual_at(form: TwoForm, p, h: float) -> float:
    """Central-difference estimate of the d-coefficient of a 2-form.

    In three variables the exterior derivative of a 2-form has the single
    component d_x c_yz - d_y c_xz + d_z c_xy on dx^dy^dz.
    """
    x, y, z = float(p[0]), float(p[1]), float(p[2])
    ddx = (form.c_yz(x + h, y, z) - form.c_yz(x - h, y, z)) / (2.0 * h)
    ddy = (form.c_xz(x, y + h, z) - form.c_xz(x, y - h, z)) / (2.0 * h)
    ddz = (form.c_xy(x, y, z + h) - form.c_xy(x, y, z - h)) / (2.0 * h)
    return ddx - ddy + ddz


def closedness_check(form: TwoForm, h: float, x_max: float = 4.0) -> float:
    """Max |d(form)| by central differences over a fixed sample grid."""
    if h <= 0.0:
        raise ValueError("finite-difference step must be positive")
    worst = 0.0
    for x in np.linspace(h, x_max - h, 9):
        for y in (0.15, 0.5, 0.85):
            for z in (0.2, 0.55, 0.9):
                worst = max(worst, abs(d_residual_at(form, (x, y, z), h)))
    return worst


def _coframe_components(u: float, comps: tuple[float, float, float]) -> tuple[float, float, float]:
    # substitute dy = theta2, dz = theta3 + u theta2 into the coordinate expansion
    cxy, cxz, cyz = comps
    return (cxy + u * cxz, cxz, cyz)


def comass_at(m: CylinderMetric, form: TwoForm, p) -> float:
    """Pointwise comass of a 2-form under the cylinder metric.

    Expressed in the orthonormal coframe, a 2-form in three dimensions is
    simple and its operator norm equals the Euclidean norm of its three
    components.
    """
    u = float(m.xhat(float(p[0])))
    f12, f13, f23 = _coframe_components(u, form.components_at(p))
    return math.sqrt(f12 * f12 + f13 * f13 + f23 * f23)


def comass_residual(m: CylinderMetric, samples: int = 10_000, seed: int = 0) -> float:
    """Max |comass - 1| of the calibrating form over random points, x in [0, j]."""
    rng = np.random.default_rng(seed)
    a = alpha()
    worst = 0.0
    for _ in range(samples):
        p = (rng.uniform(0.0, float(m.j)), rng.uniform(), rng.uniform())
        worst = max(worst, abs(comass_at(m, a, p) - 1.0))
    return worst


def hodge_residual(m: CylinderMetric, samples: int = 1000, seed: int = 0) -> float:
    """Max componentwise residual of sqrt(1+x^2) * alpha = star(dz), x in [0, j].

    The Hodge star is taken in the cylinder metric; in coordinates
    star(dz) = (1 + u^2) dx^dy - u dx^dz with u the fold coordinate, and
    on the half-cylinder u = x, which is the identity behind the unit
    comass of the calibrating form.
    """
    rng = np.random.default_rng(seed)
    a = alpha()
    worst = 0.0
    for _ in range(samples):
        x = rng.uniform(0.0, float(m.j))
        p = (x, rng.uniform(), rng.uniform())
        u = float(m.xhat(x))
        scaled = math.sqrt(1.0 + x * x) * np.array(a.components_at(p))
        star_dz = np.array([1.0 + u * u, -u, 0.0])
        worst = max(worst, float(np.abs(scaled - star_dz).max()))
    return worst


def integrate_form_over_M(
    m: CylinderMetric, phi: CutoffProfile, quadrature_tol: float = 1e-9
) -> float:
    """Pairing of the cutoff calibrating form with the long cylinder M.

    Equals int_0^j phi(x) sqrt(1+x^2) dx because the form restricts to
    the area form of M on the support of phi.  This is a lower bound for
    the stable 2-mass of the class of M relative to the boundary.
    """
    if m.j < 2:
        raise ValueError("the mass bound needs j >= 2 so the plateau [1, j-1] is nonempty")
    if phi.j != m.j:
        raise ValueError(f"cutoff built for j={phi.j}, metric has j={m.j}")
    w = phi.transition_width
    pieces = [(0.0, w), (w, m.j - w), (m.j - w, float(m.j))]
    value = 0.0
    err = 0.0
    for a, b in pieces:
        v, e = quad(
            lambda x: phi(x) * math.sqrt(1.0 + x * x),
            a,
            b,
            epsabs=quadrature_tol / 4.0,
            epsrel=1e-12,
            limit=200,
        )
        value += v
        err += e
    if err > quadrature_tol:
        raise QuadratureError("mass bound quadrature did not converge", err)
    return value


def phi_independent_bound(j: int) -> float:
    """The cutoff-free lower bound int_1^{j-1} x dx = ((j-1)^2 - 1) / 2."""
    if j < 2:
        raise ValueError("bound defined for j >= 2")
    return ((j - 1.0) ** 2 - 1.0) / 2.0


@dataclass(frozen=True)
class PairingMatrix:
    """Pairings P[i][k] of the disjointly supported calibrating forms.

    Row i is the surface, column k the form; disjoint supports make the
    matrix exactly diagonal, which is what turns one cylinder bound into
    a bound for every integer combination of the surfaces.
    """

    entries: np.ndarray = field(repr=False)
    vol_L: float = 1.0

    @property
    def b(self) -> int:
        return self.entries.shape[0]

    def class_lower_bound(self, eps: Sequence[int], d: Sequence[int]) -> float:
        """Mass lower bound for the class sum_i eps_i d_i [M_i].

        The signs are absorbed into the forms (each beta_k is flipped to
        match eps_k), so the bound is sum_i d_i * P[1][1].
        """
        if len(eps) != self.b or len(d) != self.b:
            raise ValueError("sign and multiplicity vectors must have one entry per class")
        if any(e not in (-1, 1) for e in eps):
            raise ValueError("signs must be +1 or -1")
        if any(di < 0 for di in d):
            raise ValueError("multiplicities must be nonnegative")
        if all(di == 0 for di in d):
            raise ValueError("at least one multiplicity must be positive")
        return float(sum(d) * self.entries[0, 0])


def beta_pairing_matrix(b: int, m: CylinderMetric, vol_L: float = 1.0) -> PairingMatrix:
    """Pairing matrix of b cutoff forms with disjoint x-interval supports.

    Each inserted cylinder carries its own copy of the cutoff form wedged
    with the volume form of the frozen factor L, modeled by the scalar
    vol_L.  Off-diagonal pairings vanish identically because form k is
    supported inside insert k only.
    """
    if b < 1:
        raise ValueError("need at least one class")
    if vol_L <= 0.0:
        raise ValueError("vol_L must be positive")
    v = vol_L * integrate_form_over_M(m, CutoffProfile(m.j))
    return PairingMatrix(entries=np.diag(np.full(b, v)), vol_L=vol_L)
