import numpy as np
import pytest

from systolab.cubical import (
    CubicalComplex,
    GridSpec,
    certificate_check,
    minimize_mass,
    read_chain,
    sample_calibration_dual,
    write_chain,
)
from systolab.cylinder import area_m_closed_form
from systolab.forms import CutoffProfile, alpha, integrate_form_over_M
from systolab.cylinder import CylinderMetric

SMALL = GridSpec(j=1, nx=4, ny=2, nz=2)
MEDIUM = GridSpec(j=2, nx=16, ny=4, nz=4)


def midpoint_slab_area(spec: GridSpec) -> float:
    # independent recomputation of the minimum: every (i, l) column of
    # xy faces must carry net coefficient 1, at cost w_z(i) each
    x_mid = (np.arange(spec.nx) + 0.5) * spec.dx
    xhat = spec.j - np.abs(x_mid - spec.j)
    return float(np.sum(np.sqrt(1.0 + xhat**2) * spec.dx))


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(j=2, nx=7, ny=4, nz=4)  # under 4 cells per unit
    with pytest.raises(ValueError):
        GridSpec(j=1, nx=4, ny=1, nz=4)
    with pytest.raises(ValueError):
        GridSpec(j=0, nx=4, ny=4, nz=4)


def test_cell_and_face_counts():
    cx = CubicalComplex(SMALL)
    assert cx.n_cells == 4 * 2 * 2
    assert cx.n_faces_x == 5 * 2 * 2
    assert cx.n_faces_y == cx.n_faces_z == 16
    assert cx.n_faces == 20 + 16 + 16
    assert cx.n_edges == 16 + 20 + 20


@pytest.mark.parametrize("spec", [SMALL, GridSpec(j=2, nx=8, ny=3, nz=5)])
def test_boundary_of_boundary_vanishes(spec):
    cx = CubicalComplex(spec)
    prod = cx.boundary2 @ cx.boundary3
    assert prod.nnz == 0  # integer matrices, exact


def test_reference_cycle_is_relative_cycle():
    cx = CubicalComplex(MEDIUM)
    rim = cx.boundary2 @ cx.reference_cycle(z_plane=1)
    on_walls = cx.wall_edge_mask
    assert np.all(rim[~on_walls] == 0)
    assert np.any(rim[on_walls] != 0)  # it really ends on the walls


def test_reference_cycle_validation():
    cx = CubicalComplex(SMALL)
    with pytest.raises(ValueError):
        cx.reference_cycle(z_plane=2)


def test_face_weights():
    cx = CubicalComplex(MEDIUM)
    s = MEDIUM
    w = cx.face_weights
    assert np.allclose(w[: cx.n_faces_x], s.dy * s.dz)
    assert np.allclose(w[cx.n_faces_x : cx.n_faces_x + cx.n_faces_y], s.dx * s.dz)
    wz = w[cx.n_faces_x + cx.n_faces_y :].reshape(s.nx, s.ny * s.nz)
    metric = CylinderMetric(j=s.j)
    for i in [0, 3, 8, 15]:
        x_mid = (i + 0.5) * s.dx
        expected = np.sqrt(1.0 + metric.xhat(x_mid) ** 2) * s.dx * s.dy
        assert np.allclose(wz[i], expected)
    # fold symmetry x -> 2j - x
    assert np.allclose(wz, wz[::-1])


def test_wall_masks():
    cx = CubicalComplex(SMALL)
    assert int(cx.wall_face_mask.sum()) == 2 * 2 * 2
    assert int(cx.wall_edge_mask.sum()) == 2 * 2 * (2 * 2)
    # wall faces are all x-normal
    assert not cx.wall_face_mask[cx.n_faces_x :].any()


def test_lp_minimum_is_the_slab_area():
    cert = minimize_mass(SMALL)
    assert cert.converged
    assert abs(cert.mass - midpoint_slab_area(SMALL)) < 1e-9


def test_lp_certificate_verifies():
    cert = minimize_mass(MEDIUM)
    assert cert.converged
    assert cert.gap < 1e-9 * cert.mass
    report = certificate_check(CubicalComplex(MEDIUM), cert)
    assert report.ok
    assert report.primal_residual < 1e-7
    assert report.dual_feasibility < 1e-7
    assert report.dual_stationarity < 1e-7


def test_certificate_check_rejects_tampered_dual():
    cx = CubicalComplex(SMALL)
    cert = minimize_mass(SMALL)
    cert.dual = cert.dual * 1.5  # violates |y| <= w somewhere
    report = certificate_check(cx, cert)
    assert not report.ok


def test_lp_against_closed_form_area():
    cert = minimize_mass(MEDIUM)
    exact = area_m_closed_form(2)
    assert abs(cert.mass - exact) / exact < 0.01


def test_refinement_tightens_the_area():
    exact = area_m_closed_form(2)
    coarse = minimize_mass(GridSpec(j=2, nx=8, ny=2, nz=2))
    fine = minimize_mass(GridSpec(j=2, nx=16, ny=2, nz=2))
    err_c = abs(coarse.mass - exact)
    err_f = abs(fine.mass - exact)
    assert err_f < err_c
    assert err_c / exact < 0.05
    assert err_f / exact < 0.05


def test_mass_scales_superlinearly_in_j():
    m2 = minimize_mass(GridSpec(j=2, nx=16, ny=2, nz=2)).mass
    m4 = minimize_mass(GridSpec(j=4, nx=32, ny=2, nz=2)).mass
    assert m4 / m2 > 2.0


def test_chain_column_conservation():
    # any chain in the class keeps unit net z-flux through every column
    spec = MEDIUM
    cx = CubicalComplex(spec)
    cert = minimize_mass(spec)
    z_part = cert.chain[cx.n_faces_x + cx.n_faces_y :].reshape(
        spec.nx, spec.ny, spec.nz
    )
    assert np.allclose(z_part.sum(axis=2), 1.0, atol=1e-7)


def test_sampled_calibration_dual_is_exactly_feasible():
    spec = MEDIUM
    cx = CubicalComplex(spec)
    phi = CutoffProfile(j=spec.j)
    y = sample_calibration_dual(cx, phi)
    assert float(np.max(np.abs(y) - cx.face_weights)) <= 1e-12
    keep = ~cx.wall_face_mask
    stationarity = np.abs(cx.boundary3[keep].T @ y[keep])
    assert float(stationarity.max()) == 0.0


def test_sandwich_pairing_lp_reference():
    spec = MEDIUM
    cx = CubicalComplex(spec)
    phi = CutoffProfile(j=spec.j)
    y = sample_calibration_dual(cx, phi)
    pairing = float(y @ cx.reference_cycle())
    cert = minimize_mass(spec)
    ref_mass = float(cx.face_weights @ np.abs(cx.reference_cycle()))
    assert pairing <= cert.mass + 1e-9
    assert cert.mass <= ref_mass + 1e-9
    # the pairing approximates the smooth integral of the cutoff form
    m = CylinderMetric(j=spec.j)
    smooth = integrate_form_over_M(m, phi)
    assert abs(pairing - smooth) / smooth < 0.01


def test_chain_serialization_roundtrip():
    spec = SMALL
    cx = CubicalComplex(spec)
    cert = minimize_mass(spec)
    text = write_chain(cx, cert.chain)
    assert text.startswith("cubical-chain v1 j=1 nx=4 ny=2 nz=2")
    spec2, chain2 = read_chain(text)
    assert spec2 == spec
    assert np.allclose(chain2, cert.chain, atol=1e-12)


def test_chain_serialization_errors():
    cx = CubicalComplex(SMALL)
    with pytest.raises(ValueError):
        write_chain(cx, np.zeros(3))
    with pytest.raises(ValueError):
        read_chain("not a chain header\n")


def test_sparse_text_skips_zeros():
    cx = CubicalComplex(SMALL)
    chain = np.zeros(cx.n_faces)
    chain[cx.n_faces - 1] = 0.25
    text = write_chain(cx, chain)
    lines = text.strip().splitlines()
    assert len(lines) == 2
    assert lines[1] == "z 3 1 1 0.25"
