"""Independent brute-force oracles used to freeze expected values.

Each oracle deliberately avoids the algorithm used by the package
(reduction, closed forms, adaptive quadrature) so that agreement is
evidence of correctness rather than of shared bugs.
"""

from __future__ import annotations

import math

import numpy as np


def brute_shortest(matrix: np.ndarray, window: int) -> tuple[float, tuple[int, int]]:
    """Shortest nonzero vector by exhaustive enumeration over |p|,|q| <= window."""
    best = math.inf
    arg = (0, 0)
    for p in range(-window, window + 1):
        for q in range(-window, window + 1):
            if p == 0 and q == 0:
                continue
            v = np.array([p, q], dtype=float)
            ell = math.sqrt(float(v @ matrix @ v))
            if ell < best:
                best = ell
                arg = (p, q)
    return best, arg


def brute_covering_radius(matrix: np.ndarray, n: int = 240, window: int = 14) -> float:
    """Covering radius by dense sampling of the fundamental cell.

    Accuracy is O(1/n) from below; callers must compare with a matching
    tolerance.  The lattice window must be wide enough that every sample's
    nearest lattice point is inside it; 14 covers all test inputs, which
    keep sigma_min bounded away from zero.
    """
    from scipy.spatial import cKDTree

    # embed the Gram matrix as actual basis vectors via Cholesky:
    # A = L L^T, so the rows of L realize the basis in R^2
    basis = np.linalg.cholesky(matrix)
    ts = (np.arange(n) + 0.5) / n
    pts = ts[:, None, None] * basis[0] + ts[None, :, None] * basis[1]
    pts = pts.reshape(-1, 2)
    rng = np.arange(-window, window + 1)
    aa, bb = np.meshgrid(rng, rng, indexing="ij")
    lattice = aa.reshape(-1, 1) * basis[0] + bb.reshape(-1, 1) * basis[1]
    dist, _ = cKDTree(lattice).query(pts)
    return float(dist.max())


def simpson_dense(f, a: float, b: float, n: int = 200_001) -> float:
    """Composite Simpson rule with a dense fixed grid (n odd)."""
    if n % 2 == 0:
        n += 1
    xs = np.linspace(a, b, n)
    ys = np.asarray(f(xs), dtype=float)
    h = (b - a) / (n - 1)
    return float(h / 3.0 * (ys[0] + ys[-1] + 4.0 * ys[1:-1:2].sum() + 2.0 * ys[2:-1:2].sum()))


def fd_christoffel(metric_fn, p, h: float = 1e-5) -> np.ndarray:
    """Christoffel symbols from central differences of an arbitrary metric."""
    p = np.asarray(p, dtype=float)
    dg = np.zeros((3, 3, 3))  # dg[l] = d(g)/d(coord l)
    for l in range(3):
        e = np.zeros(3)
        e[l] = h
        dg[l] = (np.asarray(metric_fn(p + e)) - np.asarray(metric_fn(p - e))) / (2.0 * h)
    ginv = np.linalg.inv(np.asarray(metric_fn(p)))
    gamma = np.zeros((3, 3, 3))
    for k in range(3):
        for i in range(3):
            for j in range(3):
                acc = 0.0
                for l in range(3):
                    acc += ginv[k, l] * (dg[i][j, l] + dg[j][i, l] - dg[l][i, j])
                gamma[k, i, j] = 0.5 * acc
    return gamma


def sympy_christoffel(u_value: float, slope: float) -> np.ndarray:
    """Christoffel symbols of dx^2 + (1+u^2)dy^2 + dz^2 - 2u dy dz, u = u(x).

    Computed fully symbolically; u(x) is a formal linear function with the
    given slope so d(u)/dx = slope at the evaluation point.
    """
    import sympy as sp

    x, y, z, s, u0 = sp.symbols("x y z s u0", real=True)
    u = u0 + s * x  # local model of xhat around the sample point
    g = sp.Matrix([[1, 0, 0], [0, 1 + u**2, -u], [0, -u, 1]])
    ginv = g.inv()
    coords = [x, y, z]
    gamma = np.zeros((3, 3, 3))
    for k in range(3):
        for i in range(3):
            for j in range(3):
                expr = 0
                for ell in range(3):
                    expr += ginv[k, ell] * (
                        sp.diff(g[j, ell], coords[i])
                        + sp.diff(g[i, ell], coords[j])
                        - sp.diff(g[i, j], coords[ell])
                    )
                expr = sp.simplify(expr / 2)
                gamma[k, i, j] = float(expr.subs({x: 0, u0: u_value, s: slope}))
    return gamma
