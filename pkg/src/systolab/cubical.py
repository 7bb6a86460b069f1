"""Cubical chain complex and linear-programming mass oracle.

The cylinder is discretized into axis-aligned boxes (periodic in y and
z, walls at x = 0 and x = 2j).  Minimal weighted area over all real
2-chains in the relative homology class of the z = 0 slab is a linear
program; its dual yields a machine-checkable lower-bound certificate
that is independent of the smooth calibration route.

Face weights are the Riemannian areas of coordinate faces under the
cylinder metric: yz and xz faces have unit area density, xy faces carry
sqrt(1 + xhat^2) sampled at the face midpoint.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse

from .cylinder import CylinderMetric

__all__ = [
    "GridSpec",
    "CubicalComplex",
    "MassCertificate",
    "CertificateReport",
    "minimize_mass",
    "certificate_check",
    "sample_calibration_dual",
    "write_chain",
    "read_chain",
]


@dataclass(frozen=True)
class GridSpec:
    """Grid resolution for the cylinder of half-length j.

    nx counts cells along [0, 2j] and must resolve the fold reasonably:
    at least 2 cells per unit of x.  ny and nz count the periodic cells.
    """

    j: int
    nx: int
    ny: int
    nz: int

    def __post_init__(self):
        if self.j < 1:
            raise ValueError("j must be a positive integer")
        if self.nx < 4 * self.j:
            raise ValueError(f"nx = {self.nx} too coarse; need at least {4 * self.j}")
        if self.ny < 2 or self.nz < 2:
            raise ValueError("ny and nz must be at least 2")

    @property
    def dx(self) -> float:
        return 2.0 * self.j / self.nx

    @property
    def dy(self) -> float:
        return 1.0 / self.ny

    @property
    def dz(self) -> float:
        return 1.0 / self.nz


class CubicalComplex:
    """Oriented cubical complex of the discretized cylinder.

    Face index layout: x-normal faces first ((nx+1)*ny*nz of them, the
    first and last x-planes being the walls), then y-normal, then
    z-normal (nx*ny*nz each).  Edges follow the same scheme by
    direction.  All boundary matrices have integer entries.
    """

    def __init__(self, spec: GridSpec):
        self.spec = spec
        self.metric = CylinderMetric(j=spec.j)
        s = spec
        self.n_cells = s.nx * s.ny * s.nz
        self.n_faces_x = (s.nx + 1) * s.ny * s.nz
        self.n_faces_y = s.nx * s.ny * s.nz
        self.n_faces_z = s.nx * s.ny * s.nz
        self.n_faces = self.n_faces_x + self.n_faces_y + self.n_faces_z
        self.n_edges_x = s.nx * s.ny * s.nz
        self.n_edges_y = (s.nx + 1) * s.ny * s.nz
        self.n_edges_z = (s.nx + 1) * s.ny * s.nz
        self.n_edges = self.n_edges_x + self.n_edges_y + self.n_edges_z

    # flattened index helpers; i is the x index, l the y index, k the z index
    def _fx(self, i, l, k):
        s = self.spec
        return (i * s.ny + l) * s.nz + k

    def _fy(self, i, l, k):
        s = self.spec
        return self.n_faces_x + (i * s.ny + l) * s.nz + k

    def _fz(self, i, l, k):
        s = self.spec
        return self.n_faces_x + self.n_faces_y + (i * s.ny + l) * s.nz + k

    def _ex(self, i, l, k):
        s = self.spec
        return (i * s.ny + l) * s.nz + k

    def _ey(self, i, l, k):
        s = self.spec
        return self.n_edges_x + (i * s.ny + l) * s.nz + k

    def _ez(self, i, l, k):
        s = self.spec
        return self.n_edges_x + self.n_edges_y + (i * s.ny + l) * s.nz + k

    def _cell(self, i, l, k):
        s = self.spec
        return (i * s.ny + l) * s.nz + k

    def _cell_grid(self):
        s = self.spec
        ii, ll, kk = np.meshgrid(
            np.arange(s.nx), np.arange(s.ny), np.arange(s.nz), indexing="ij"
        )
        return ii.ravel(), ll.ravel(), kk.ravel()

    @cached_property
    def boundary3(self) -> sparse.csr_matrix:
        """Face-by-cell boundary matrix of the 3-cells."""
        s = self.spec
        ii, ll, kk = self._cell_grid()
        cell = self._cell(ii, ll, kk)
        rows = np.concatenate(
            [
                self._fx(ii + 1, ll, kk),
                self._fx(ii, ll, kk),
                self._fy(ii, (ll + 1) % s.ny, kk),
                self._fy(ii, ll, kk),
                self._fz(ii, ll, (kk + 1) % s.nz),
                self._fz(ii, ll, kk),
            ]
        )
        cols = np.tile(cell, 6)
        ones = np.ones(self.n_cells, dtype=np.int64)
        data = np.concatenate([ones, -ones, -ones, ones, ones, -ones])
        return sparse.coo_matrix(
            (data, (rows, cols)), shape=(self.n_faces, self.n_cells)
        ).tocsr()

    @cached_property
    def boundary2(self) -> sparse.csr_matrix:
        """Edge-by-face boundary matrix of the 2-cells."""
        s = self.spec
        rows = []
        cols = []
        data = []

        def add(r, c, v):
            rows.append(r)
            cols.append(c)
            data.append(np.full(len(r), v, dtype=np.int64))

        # x-normal faces, spanned by (y, z)
        ii, ll, kk = np.meshgrid(
            np.arange(s.nx + 1), np.arange(s.ny), np.arange(s.nz), indexing="ij"
        )
        ii, ll, kk = ii.ravel(), ll.ravel(), kk.ravel()
        c = self._fx(ii, ll, kk)
        add(self._ez(ii, (ll + 1) % s.ny, kk), c, 1)
        add(self._ez(ii, ll, kk), c, -1)
        add(self._ey(ii, ll, (kk + 1) % s.nz), c, -1)
        add(self._ey(ii, ll, kk), c, 1)

        # y-normal faces, spanned by (x, z)
        ii, ll, kk = self._cell_grid()
        c = self._fy(ii, ll, kk)
        add(self._ez(ii + 1, ll, kk), c, 1)
        add(self._ez(ii, ll, kk), c, -1)
        add(self._ex(ii, ll, (kk + 1) % s.nz), c, -1)
        add(self._ex(ii, ll, kk), c, 1)

        # z-normal faces, spanned by (x, y)
        c = self._fz(ii, ll, kk)
        add(self._ey(ii + 1, ll, kk), c, 1)
        add(self._ey(ii, ll, kk), c, -1)
        add(self._ex(ii, (ll + 1) % s.ny, kk), c, -1)
        add(self._ex(ii, ll, kk), c, 1)

        return sparse.coo_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.n_edges, self.n_faces),
        ).tocsr()

    @cached_property
    def face_weights(self) -> np.ndarray:
        """Riemannian area of every face (midpoint rule in x for xy faces)."""
        s = self.spec
        w = np.empty(self.n_faces)
        w[: self.n_faces_x] = s.dy * s.dz
        w[self.n_faces_x : self.n_faces_x + self.n_faces_y] = s.dx * s.dz
        x_mid = (np.arange(s.nx) + 0.5) * s.dx
        dens = np.sqrt(1.0 + self.metric.xhat(x_mid) ** 2)
        wz = np.repeat(dens, s.ny * s.nz) * (s.dx * s.dy)
        w[self.n_faces_x + self.n_faces_y :] = wz
        return w

    @cached_property
    def wall_face_mask(self) -> np.ndarray:
        """True for faces lying in the walls x = 0 and x = 2j."""
        s = self.spec
        mask = np.zeros(self.n_faces, dtype=bool)
        ll, kk = np.meshgrid(np.arange(s.ny), np.arange(s.nz), indexing="ij")
        ll, kk = ll.ravel(), kk.ravel()
        mask[self._fx(np.zeros_like(ll), ll, kk)] = True
        mask[self._fx(np.full_like(ll, s.nx), ll, kk)] = True
        return mask

    @cached_property
    def wall_edge_mask(self) -> np.ndarray:
        s = self.spec
        mask = np.zeros(self.n_edges, dtype=bool)
        ll, kk = np.meshgrid(np.arange(s.ny), np.arange(s.nz), indexing="ij")
        ll, kk = ll.ravel(), kk.ravel()
        for i in (0, s.nx):
            mask[self._ey(np.full_like(ll, i), ll, kk)] = True
            mask[self._ez(np.full_like(ll, i), ll, kk)] = True
        return mask

    def reference_cycle(self, z_plane: int = 0) -> np.ndarray:
        """The z = const slab as an integer 2-chain (one xy face per column)."""
        s = self.spec
        if not 0 <= z_plane < s.nz:
            raise ValueError(f"z_plane must be in [0, {s.nz})")
        c = np.zeros(self.n_faces, dtype=np.int64)
        ii, ll = np.meshgrid(np.arange(s.nx), np.arange(s.ny), indexing="ij")
        idx = self._fz(ii.ravel(), ll.ravel(), np.full(ii.size, z_plane))
        c[idx] = 1
        return c

    def face_table(self) -> list[tuple[str, int, int, int]]:
        """(type, i, l, k) for every face index, in index order."""
        s = self.spec
        out: list[tuple[str, int, int, int]] = []
        for i in range(s.nx + 1):
            for l in range(s.ny):
                for k in range(s.nz):
                    out.append(("x", i, l, k))
        for t in ("y", "z"):
            for i in range(s.nx):
                for l in range(s.ny):
                    for k in range(s.nz):
                        out.append((t, i, l, k))
        return out


@dataclass
class MassCertificate:
    """Primal-dual output of the mass LP.

    `chain` and `dual` live on the full face index set with zeros on the
    walls; `lower_bound` is the dual objective, valid independently of
    solver internals once `certificate_check` passes.
    """

    spec: GridSpec
    mass: float
    lower_bound: float
    gap: float
    chain: np.ndarray
    cell_potential: np.ndarray
    dual: np.ndarray
    converged: bool


@dataclass
class CertificateReport:
    ok: bool
    primal_residual: float
    dual_feasibility: float
    dual_stationarity: float
    duality_gap: float


def minimize_mass(
    complex_or_spec, z_plane: int = 0, tol: float = 1e-9
) -> MassCertificate:
    """Minimal weighted area in the relative class of the z = const slab.

    Solves min w . |c| over 2-chains c with c = ref + boundary(d), the
    wall faces being free (relative homology).  Split c = c+ - c- for a
    standard-form LP; the equality-constraint duals certify optimality.
    """
    from scipy.optimize import linprog

    cx = complex_or_spec if isinstance(complex_or_spec, CubicalComplex) else CubicalComplex(complex_or_spec)
    keep = ~cx.wall_face_mask
    B = cx.boundary3[keep]
    ref = cx.reference_cycle(z_plane)[keep].astype(float)
    w = cx.face_weights[keep]
    n_f = int(keep.sum())
    n_c = cx.n_cells
    eye = sparse.identity(n_f, format="csc")
    A_eq = sparse.hstack([eye, -eye, -B.tocsc()], format="csc")
    cost = np.concatenate([w, w, np.zeros(n_c)])
    bounds = [(0.0, None)] * (2 * n_f) + [(None, None)] * n_c
    res = linprog(cost, A_eq=A_eq, b_eq=ref, bounds=bounds, method="highs")
    if res.x is None:
        raise RuntimeError(f"mass LP failed: {res.message}")
    c_int = res.x[:n_f] - res.x[n_f : 2 * n_f]
    d = res.x[2 * n_f :]
    y_int = np.asarray(res.eqlin.marginals)
    chain = np.zeros(cx.n_faces)
    chain[keep] = c_int
    dual = np.zeros(cx.n_faces)
    dual[keep] = y_int
    mass = float(res.fun)
    lower = float(y_int @ ref)
    return MassCertificate(
        spec=cx.spec,
        mass=mass,
        lower_bound=lower,
        gap=mass - lower,
        chain=chain,
        cell_potential=d,
        dual=dual,
        converged=bool(res.status == 0 and abs(mass - lower) <= tol * max(1.0, mass)),
    )


def certificate_check(
    cx: CubicalComplex, cert: MassCertificate, tol: float = 1e-7, z_plane: int = 0
) -> CertificateReport:
    """Independent verification of a mass certificate.

    Recomputes every claim from the boundary matrices: the primal chain
    is in the right class, the dual respects the weight bounds and is
    stationary, and the certified gap is small.  Never trusts solver
    status fields.
    """
    keep = ~cx.wall_face_mask
    B = cx.boundary3[keep]
    ref = cx.reference_cycle(z_plane)[keep].astype(float)
    w = cx.face_weights[keep]
    c = cert.chain[keep]
    y = cert.dual[keep]
    primal = float(np.max(np.abs(c - ref - B @ cert.cell_potential)))
    mass_re = float(w @ np.abs(c))
    feas = float(np.max(np.abs(y) - w))
    stat = float(np.max(np.abs(B.T @ y))) if cx.n_cells else 0.0
    gap = abs(mass_re - float(y @ ref))
    ok = (
        primal <= tol
        and feas <= tol
        and stat <= tol
        and gap <= tol * max(1.0, mass_re)
    )
    return CertificateReport(
        ok=bool(ok),
        primal_residual=primal,
        dual_feasibility=feas,
        dual_stationarity=stat,
        duality_gap=gap,
    )


def sample_calibration_dual(cx: CubicalComplex, phi) -> np.ndarray:
    """Face-sampled calibrating form as a dual vector.

    Pairs each face with the cutoff calibration at the face midpoint.
    The components depend on x alone, so the discrete stationarity
    equations hold exactly and the pairing with the reference slab is a
    certified lower bound for the LP mass.
    """
    from .forms import cutoff_alpha

    s = cx.spec
    form = cutoff_alpha(phi)
    y = np.zeros(cx.n_faces)
    # yz faces carry the zero component; xz and xy sample at cell-center x
    x_mid = (np.arange(s.nx) + 0.5) * s.dx
    c_xy = np.array([form.c_xy(x, 0.0, 0.0) for x in x_mid])
    c_xz = np.array([form.c_xz(x, 0.0, 0.0) for x in x_mid])
    per_plane = s.ny * s.nz
    y[cx.n_faces_x : cx.n_faces_x + cx.n_faces_y] = np.repeat(c_xz, per_plane) * (
        s.dx * s.dz
    )
    y[cx.n_faces_x + cx.n_faces_y :] = np.repeat(c_xy, per_plane) * (s.dx * s.dy)
    y[cx.wall_face_mask] = 0.0
    return y


# -- sparse chain serialization ---------------------------------------------

_HEADER = "cubical-chain v1"


def write_chain(cx: CubicalComplex, chain: np.ndarray, threshold: float = 1e-12) -> str:
    """Serialize a face chain as text: a header line, then one line per
    nonzero entry with the face type, its (i, l, k) address, and the value."""
    s = cx.spec
    if len(chain) != cx.n_faces:
        raise ValueError("chain length does not match the complex")
    buf = io.StringIO()
    buf.write(f"{_HEADER} j={s.j} nx={s.nx} ny={s.ny} nz={s.nz}\n")
    table = cx.face_table()
    for idx in np.nonzero(np.abs(chain) > threshold)[0]:
        t, i, l, k = table[idx]
        buf.write(f"{t} {i} {l} {k} {float(chain[idx])!r}\n")
    return buf.getvalue()


def read_chain(text: str) -> tuple[GridSpec, np.ndarray]:
    lines = text.strip().splitlines()
    if not lines or not lines[0].startswith(_HEADER):
        raise ValueError("not a cubical-chain document")
    fields = dict(part.split("=") for part in lines[0][len(_HEADER) :].split())
    spec = GridSpec(
        j=int(fields["j"]), nx=int(fields["nx"]), ny=int(fields["ny"]), nz=int(fields["nz"])
    )
    cx = CubicalComplex(spec)
    chain = np.zeros(cx.n_faces)
    lookup = {"x": cx._fx, "y": cx._fy, "z": cx._fz}
    for line in lines[1:]:
        t, i, l, k, value = line.split()
        chain[lookup[t](int(i), int(l), int(k))] = float(value)
    return spec, chain
