"""Geodesic flow and loop shortening for the cylinder and nilmanifold metrics.

Both metrics have the shared form dx^2 + (1+u^2)dy^2 + dz^2 - 2u dy dz
with u = u(x): the fold coordinate on the cylinder, plain x on the
universal cover of the compact quotient.  Systole estimates come from
discrete curve shortening and are upper bounds only; they are reported
as non-certified estimates everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cylinder import CylinderMetric, gram_from_parameter

__all__ = [
    "GeodesicState",
    "Trajectory",
    "LoopClass",
    "ShorteningResult",
    "Sys1Scan",
    "christoffel_symbols",
    "christoffel_at",
    "integrate_geodesic",
    "shorten_loop",
    "sys1_scan",
    "sys1_estimate",
    "nilmanifold_sys1_scan",
    "nilmanifold_sys1_estimate",
    "CylinderLoopSpace",
    "NilmanifoldLoopSpace",
]


@dataclass(frozen=True)
class GeodesicState:
    position: tuple[float, float, float]
    velocity: tuple[float, float, float]

    def speed(self, gram: np.ndarray) -> float:
        v = np.asarray(self.velocity)
        return math.sqrt(float(v @ gram @ v))


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # rows (x, y, z, vx, vy, vz)
    speed_drift: float  # max relative deviation from the initial speed
    stopped_at_boundary: bool


def christoffel_symbols(u: float, slope: float) -> np.ndarray:
    """Closed-form Christoffel symbols of the shared metric family.

    Index order gamma[k][i][j]; only x-derivatives of the metric are
    nonzero, and they enter through d(u)/dx = slope.
    """
    g = np.zeros((3, 3, 3))
    g[0, 1, 1] = -u * slope
    g[0, 1, 2] = g[0, 2, 1] = slope / 2.0
    g[1, 0, 1] = g[1, 1, 0] = u * slope / 2.0
    g[1, 0, 2] = g[1, 2, 0] = -slope / 2.0
    g[2, 0, 1] = g[2, 1, 0] = (u * u - 1.0) * slope / 2.0
    g[2, 0, 2] = g[2, 2, 0] = -u * slope / 2.0
    return g


def christoffel_at(m: CylinderMetric, p, side: int = 1) -> np.ndarray:
    """Christoffel symbols at a cylinder point, piecewise across the fold.

    At x = j the symbols are one-sided; `side` = +1 requests the limit
    from x < j, -1 from x > j.
    """
    x = float(p[0])
    if not 0.0 <= x <= 2.0 * m.j:
        raise ValueError(f"x = {x} outside the cylinder")
    if x < m.j:
        slope = 1.0
    elif x > m.j:
        slope = -1.0
    else:
        slope = float(side)
    return christoffel_symbols(float(m.xhat(x)), slope)


def _accel(u: float, s: float, v) -> tuple[float, float, float]:
    vx, vy, vz = v
    ax = s * vy * (u * vy - vz)
    ay = s * vx * (vz - u * vy)
    az = s * vx * (u * vz - (u * u - 1.0) * vy)
    return ax, ay, az


def _rk4_step(m, state, h: float, side: float):
    """One RK4 step with the fold slope frozen to `side` for all stages."""

    def rhs(s6):
        x = s6[0]
        u = float(m.xhat(x))
        ax, ay, az = _accel(u, side, s6[3:])
        return np.array([s6[3], s6[4], s6[5], ax, ay, az])

    k1 = rhs(state)
    k2 = rhs(state + 0.5 * h * k1)
    k3 = rhs(state + 0.5 * h * k2)
    k4 = rhs(state + h * k3)
    return state + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _locate_crossing(m, state, h: float, side: float, target: float) -> tuple[np.ndarray, float]:
    """Bisect the step size so the step lands on x = target (machine accurate)."""
    lo, hi = 0.0, h
    s_hi = _rk4_step(m, state, h, side)
    mid = h
    s_mid = s_hi
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        s_mid = _rk4_step(m, state, mid, side)
        if abs(s_mid[0] - target) < 1e-13:
            break
        if (s_mid[0] - target) * (s_hi[0] - target) > 0.0:
            hi = mid
            s_hi = s_mid
        else:
            lo = mid
    # land exactly on the plane so the next step cannot re-trigger the event
    s_mid[0] = target
    return s_mid, mid


def integrate_geodesic(m, s0: GeodesicState, T: float, step: float) -> Trajectory:
    """Fixed-step RK4 geodesic integration with event handling.

    The slope of the fold coordinate is frozen per step and steps are
    split exactly at the fold x = j, where the acceleration jumps but the
    state passes through unchanged.  Integration stops at the x-boundary.
    The returned speed drift measures conservation quality; a drift above
    the caller's tolerance means the step was too large.
    """
    if step <= 0.0 or T <= 0.0:
        raise ValueError("T and step must be positive")
    state = np.array([*s0.position, *s0.velocity], dtype=float)
    fold = float(m.j)
    x_hi = 2.0 * float(m.j)

    def side_of(x: float, vx: float) -> float:
        s = float(m.xhat_slope(x))
        if s == 0.0 and x == fold:
            # exactly on the fold: take the slope of the side being entered
            return 1.0 if vx <= 0.0 else -1.0
        return s

    def speed(s6) -> float:
        G = gram_from_parameter(float(m.xhat(s6[0])))
        v = s6[3:]
        return math.sqrt(float(v @ G @ v))

    n_steps = int(round(T / step))
    times = [0.0]
    states = [state.copy()]
    s_ref = speed(state)
    drift = 0.0
    stopped = False
    t = 0.0
    for _ in range(n_steps):
        remaining = step
        while remaining > 1e-15:
            side = side_of(state[0], state[3])
            trial = _rk4_step(m, state, remaining, side)
            crossed_fold = (state[0] - fold) * (trial[0] - fold) < 0.0
            if crossed_fold:
                state, used = _locate_crossing(m, state, remaining, side, fold)
                remaining -= used
                continue
            if trial[0] < 0.0 or trial[0] > x_hi:
                target = 0.0 if trial[0] < 0.0 else x_hi
                state, used = _locate_crossing(m, state, remaining, side, target)
                t += used
                remaining = 0.0
                stopped = True
                break
            state = trial
            t += remaining
            remaining = 0.0
        times.append(t)
        states.append(state.copy())
        drift = max(drift, abs(speed(state) - s_ref) / s_ref)
        if stopped:
            break
    return Trajectory(
        times=np.array(times),
        states=np.array(states),
        speed_drift=drift,
        stopped_at_boundary=stopped,
    )


# -- discrete loop shortening ---------------------------------------------


@dataclass(frozen=True)
class LoopClass:
    """Homotopy datum of a closed loop: windings and contractibility flag.

    On the cylinder the datum is the winding pair (y, z); loops cannot
    wind in x, so the flag just records whether the pair is zero.
    """

    wy: int
    wz: int

    @property
    def contractible(self) -> bool:
        return self.wy == 0 and self.wz == 0


@dataclass
class ShorteningResult:
    length: float
    vertices: np.ndarray
    loop_class: object
    converged: bool
    iterations: int


class CylinderLoopSpace:
    """Loop space of the cylinder: closure by (y, z) winding, x clamped."""

    def __init__(self, m: CylinderMetric, loop_class: LoopClass):
        if loop_class.contractible:
            raise ValueError("systole search needs a noncontractible class")
        self.m = m
        self.loop_class = loop_class

    def u_of(self, x: np.ndarray) -> np.ndarray:
        return self.m.xhat(x)

    def slope_of(self, x: np.ndarray) -> np.ndarray:
        return self.m.xhat_slope(x)

    def closure_point(self, p0: np.ndarray) -> np.ndarray:
        return p0 + np.array([0.0, float(self.loop_class.wy), float(self.loop_class.wz)])

    def closure_jacobian(self, p0: np.ndarray) -> np.ndarray:
        return np.eye(3)

    def clamp(self, pts: np.ndarray) -> np.ndarray:
        pts[:, 0] = np.clip(pts[:, 0], 0.0, 2.0 * self.m.j)
        return pts

    def coordinate_bounds(self, n: int) -> list[tuple[float | None, float | None]]:
        return [(0.0, 2.0 * self.m.j), (None, None), (None, None)] * n

    def initial_loop(self, rng: np.random.Generator, n: int) -> np.ndarray:
        p0 = np.array([rng.uniform(0.0, 2.0 * self.m.j), rng.uniform(), rng.uniform()])
        t = np.linspace(0.0, 1.0, n, endpoint=False)[:, None]
        line = p0 + t * (self.closure_point(p0) - p0)
        jitter = 0.05 * rng.standard_normal((n, 3))
        jitter[0] = 0.0
        return self.clamp(line + jitter)

    def windings(self, vertices: np.ndarray) -> tuple[int, int]:
        end = self.closure_point(vertices[0])
        return (int(round(end[1] - vertices[0][1])), int(round(end[2] - vertices[0][2])))


class NilmanifoldLoopSpace:
    """Loop space of the compact quotient of the 3D nilpotent group.

    Elements of the deck group act by (x, y, z) -> (x+a, y+b, z+c+a*y);
    a loop in the class of gamma is a path from p to gamma . p.
    """

    def __init__(self, gamma: tuple[int, int, int]):
        if gamma == (0, 0, 0):
            raise ValueError("identity class is contractible")
        self.gamma = gamma

    def u_of(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float)

    def slope_of(self, x: np.ndarray) -> np.ndarray:
        return np.ones_like(np.asarray(x, dtype=float))

    def closure_point(self, p0: np.ndarray) -> np.ndarray:
        a, b, c = self.gamma
        return np.array([p0[0] + a, p0[1] + b, p0[2] + c + a * p0[1]])

    def closure_jacobian(self, p0: np.ndarray) -> np.ndarray:
        a = self.gamma[0]
        J = np.eye(3)
        J[2, 1] = float(a)
        return J

    def clamp(self, pts: np.ndarray) -> np.ndarray:
        return pts

    def coordinate_bounds(self, n: int) -> None:
        return None

    def initial_loop(self, rng: np.random.Generator, n: int) -> np.ndarray:
        p0 = rng.uniform(0.0, 1.0, size=3)
        t = np.linspace(0.0, 1.0, n, endpoint=False)[:, None]
        line = p0 + t * (self.closure_point(p0) - p0)
        jitter = 0.05 * rng.standard_normal((n, 3))
        jitter[0] = 0.0
        return line + jitter

    def witness_loop(self, n: int = 64) -> np.ndarray | None:
        """A straight representative of exact length, where one exists.

        Basing the loop where the shear term cancels makes the coordinate
        segment isometric to a flat line: y = -c/a for horizontal classes,
        x = c/b for vertical ones.  Mixed classes (both a and b nonzero)
        have no constant-direction representative and return None.
        """
        a, b, c = self.gamma
        if a != 0 and b != 0:
            return None
        if a != 0:
            p0 = np.array([0.0, -c / a, 0.0])
        elif b != 0:
            p0 = np.array([c / b, 0.0, 0.0])
        else:
            p0 = np.zeros(3)
        t = np.linspace(0.0, 1.0, n, endpoint=False)[:, None]
        return p0 + t * (self.closure_point(p0) - p0)

    def windings(self, vertices: np.ndarray) -> tuple[int, int, int]:
        return self.gamma


def _loop_length_and_grad(space, V: np.ndarray) -> tuple[float, np.ndarray]:
    if hasattr(space, "length_and_grad"):
        return space.length_and_grad(V)
    pts = np.vstack([V, space.closure_point(V[0])])
    d = pts[1:] - pts[:-1]
    mid = 0.5 * (pts[1:] + pts[:-1])
    u = np.asarray(space.u_of(mid[:, 0]), dtype=float)
    s = np.asarray(space.slope_of(mid[:, 0]), dtype=float)
    dx, dy, dz = d[:, 0], d[:, 1], d[:, 2]
    q = dx * dx + (1.0 + u * u) * dy * dy + dz * dz - 2.0 * u * dy * dz
    ell = np.sqrt(np.maximum(q, 1e-300))
    length = float(ell.sum())
    # dL/dd and the metric-variation term through the midpoint x-coordinate
    w = np.empty_like(d)
    w[:, 0] = dx / ell
    w[:, 1] = ((1.0 + u * u) * dy - u * dz) / ell
    w[:, 2] = (dz - u * dy) / ell
    du_term = (u * dy * dy - dy * dz) * s / ell  # d(ell)/d(u) * du/dx at midpoint
    A = -w.copy()
    B = w.copy()
    A[:, 0] += 0.5 * du_term
    B[:, 0] += 0.5 * du_term
    grad = A
    grad[1:] += B[:-1]
    grad[0] += space.closure_jacobian(V[0]).T @ B[-1]
    return length, grad


def _loop_length(space, V: np.ndarray) -> float:
    if hasattr(space, "length_of"):
        return space.length_of(V)
    pts = np.vstack([V, space.closure_point(V[0])])
    d = pts[1:] - pts[:-1]
    mid = 0.5 * (pts[1:] + pts[:-1])
    u = np.asarray(space.u_of(mid[:, 0]), dtype=float)
    dx, dy, dz = d[:, 0], d[:, 1], d[:, 2]
    q = dx * dx + (1.0 + u * u) * dy * dy + dz * dz - 2.0 * u * dy * dz
    return float(np.sqrt(np.maximum(q, 0.0)).sum())


def shorten_loop(
    space,
    vertices: np.ndarray,
    max_iterations: int = 2000,
    tol: float = 1e-12,
) -> ShorteningResult:
    """Minimize polyline length over vertex positions with box constraints.

    Runs bounded quasi-Newton descent with the analytic gradient; the
    result is guaranteed no longer than the input (the input is returned
    on the rare line-search failure), and windings are pinned by the
    closure map.
    """
    from scipy.optimize import minimize

    V0 = space.clamp(np.array(vertices, dtype=float))
    n = len(V0)
    wind_before = space.windings(V0)
    start_length = _loop_length(space, V0)

    def objective(flat: np.ndarray):
        length, grad = _loop_length_and_grad(space, flat.reshape(n, 3))
        return length, grad.ravel()

    res = minimize(
        objective,
        V0.ravel(),
        jac=True,
        method="L-BFGS-B",
        bounds=space.coordinate_bounds(n),
        options={"maxiter": max_iterations, "ftol": tol, "gtol": 1e-12},
    )
    V = res.x.reshape(n, 3)
    length = _loop_length(space, V)
    if length > start_length:
        V, length = V0, start_length
    if space.windings(V) != wind_before:
        raise AssertionError("curve shortening changed the homotopy class")
    return ShorteningResult(
        length=length,
        vertices=V,
        loop_class=wind_before,
        converged=bool(res.success),
        iterations=int(res.nit),
    )


def _refine(space, V: np.ndarray) -> np.ndarray:
    pts = np.vstack([V, space.closure_point(V[0])])
    mids = 0.5 * (pts[1:] + pts[:-1])
    out = np.empty((2 * len(V), 3))
    out[0::2] = V
    out[1::2] = mids
    return out


@dataclass
class Sys1Scan:
    """Minimum shortened length over a set of classes, with diagnostics."""

    value: float
    converged: bool
    per_class: dict = field(default_factory=dict)


def _estimate_for_space(space, restarts: int, seed: int, max_iterations: int) -> tuple[float, bool]:
    starts = []
    witness = getattr(space, "witness_loop", None)
    if witness is not None:
        W = witness()
        if W is not None:
            starts.append(np.asarray(W, dtype=float))
    for r in range(restarts):
        rng = np.random.default_rng(seed + 7919 * r)
        starts.append(space.initial_loop(rng, 64))
    if not starts:
        raise ValueError("need a witness loop or at least one restart")
    runs = []
    for V in starts:
        result = shorten_loop(space, V, max_iterations=max_iterations)
        # refinement passes: insert midpoints, polish at doubled resolution
        target_n = 64 * max(1, math.ceil(result.length))
        V = result.vertices
        while len(V) < target_n:
            V = _refine(space, V)
        runs.append(shorten_loop(space, V, max_iterations=max_iterations))
    best = min(r.length for r in runs)
    # the estimate is trustworthy when the run that reached it terminated
    # properly; a stalled restart that ended higher does not taint it
    converged = any(r.converged and r.length <= best + 1e-9 for r in runs)
    return best, converged


def sys1_scan(
    m: CylinderMetric,
    classes: list[LoopClass] | None = None,
    restarts: int = 3,
    seed: int = 0,
    max_iterations: int = 2000,
) -> Sys1Scan:
    """Empirical 1-systole of the cylinder: min shortened length over classes.

    The value is an upper bound for the systole (every loop witnesses
    one) and only an estimate of it; reports must flag it as
    non-certified, and a False `converged` means some descent hit its
    iteration cap.
    """
    if classes is None:
        classes = [LoopClass(0, 1), LoopClass(1, 0)]
    if not classes:
        raise ValueError("need at least one homotopy class")
    best = math.inf
    all_converged = True
    per_class: dict = {}
    for cls in classes:
        space = CylinderLoopSpace(m, cls)
        value, ok = _estimate_for_space(space, restarts, seed, max_iterations)
        per_class[(cls.wy, cls.wz)] = value
        best = min(best, value)
        all_converged = all_converged and ok
    return Sys1Scan(value=best, converged=all_converged, per_class=per_class)


def sys1_estimate(
    m: CylinderMetric,
    classes: list[LoopClass] | None = None,
    restarts: int = 3,
    seed: int = 0,
    max_iterations: int = 2000,
) -> float:
    return sys1_scan(m, classes, restarts, seed, max_iterations).value


_GENERATOR_WORDS: tuple[tuple[int, int, int], ...] = (
    (1, 0, 0),
    (0, 1, 0),
    (0, 0, 1),
    (1, 1, 1),  # product of the two horizontal generators
    (1, 1, 0),  # the same pair multiplied in the other order
    (1, 0, 1),
    (0, 1, 1),
)


def nilmanifold_sys1_scan(
    restarts: int = 8, seed: int = 0, max_iterations: int = 2000
) -> Sys1Scan:
    """Empirical shortest noncontractible loop of the compact nilmanifold.

    Scans the three lattice generators and their short products; the
    value feeds the freedom reports as a non-certified constant.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    best = math.inf
    all_converged = True
    per_class: dict = {}
    for gamma in _GENERATOR_WORDS:
        space = NilmanifoldLoopSpace(gamma)
        value, ok = _estimate_for_space(space, restarts, seed, max_iterations)
        per_class[gamma] = value
        best = min(best, value)
        all_converged = all_converged and ok
    return Sys1Scan(value=best, converged=all_converged, per_class=per_class)


def nilmanifold_sys1_estimate(
    restarts: int = 8, seed: int = 0, max_iterations: int = 2000
) -> float:
    return nilmanifold_sys1_scan(restarts, seed, max_iterations).value
