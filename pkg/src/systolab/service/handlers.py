"""Plain-function implementations behind the service endpoints.

The CLI calls these directly when no server is configured and the
FastAPI app wraps them one-to-one, so the HTTP layer stays a transport
detail rather than a dependency of the computations.
"""

from __future__ import annotations

import numpy as np

from .. import verify
from ..assembly import _small_j_pairing, default_config, freedom_report, t4_product_report
from ..cubical import (
    CubicalComplex,
    GridSpec,
    certificate_check,
    minimize_mass,
    sample_calibration_dual,
    write_chain,
)
from ..cylinder import CylinderMetric
from ..flat_torus import (
    loewner_ratio,
    moduli_point,
    shortest_vector,
    slice_gram,
    torus_diameter,
)
from ..forms import (
    CutoffProfile,
    closedness_check,
    comass_residual,
    cutoff_alpha,
    integrate_form_over_M,
)
from ..geodesics import sys1_scan
from ..reports import freedom_record, t4_record
from .models import (
    CylinderRecord,
    CylinderRequest,
    CylinderResponse,
    FreedomRecord,
    LpRecord,
    LpRequest,
    LpResponse,
    SliceRequest,
    SliceResponse,
    SliceRow,
    SweepRequest,
    SweepResponse,
    T4Record,
    Torus3Request,
    Torus3Response,
    VerifyRecord,
    VerifyRequest,
    VerifyResponse,
)

NONCONVERGENCE_FLAG = "shortening-not-converged"


def handle_slice(req: SliceRequest) -> SliceResponse:
    rows = []
    k = 0
    while True:
        u = req.start + k * req.step
        if u > req.stop + 1e-12:
            break
        g = slice_gram(u)
        ell, _ = shortest_vector(g)
        s, t = moduli_point(g)
        rows.append(
            SliceRow(
                xhat=u,
                det=g.det,
                sys1=ell,
                diameter=torus_diameter(g),
                s=s,
                t=t,
                loewner=loewner_ratio(g),
            )
        )
        k += 1
    return SliceResponse(records=rows)


def handle_cylinder(req: CylinderRequest) -> CylinderResponse:
    m = CylinderMetric(req.j)
    phi = CutoffProfile(req.j)
    flags = ["sys1-estimate-not-certified"]
    if req.j >= 2:
        mass2 = integrate_form_over_M(m, phi, quadrature_tol=req.tol)
    else:
        mass2 = _small_j_pairing(m, req.tol)
        flags.append("small-j-pairing-uncertified")
    scan = sys1_scan(m, restarts=req.restarts, seed=req.seed)
    if not scan.converged:
        flags.append(NONCONVERGENCE_FLAG)
    record = CylinderRecord(
        j=req.j,
        volume=m.volume(req.tol),
        area_m=m.area_m(),
        mass2_lower=mass2,
        sys1_estimate=scan.value,
        diam1_bound=m.diam1_estimate(),
        psi_residual=m.isometry_check_psi(samples=512, seed=req.seed),
        closedness_residual=closedness_check(cutoff_alpha(phi), h=1e-4, x_max=2.0 * req.j),
        comass_residual=comass_residual(m, samples=2048, seed=req.seed),
        flags=flags,
    )
    return CylinderResponse(records=[record])


def handle_sweep(req: SweepRequest) -> SweepResponse:
    records = [
        FreedomRecord(
            **freedom_record(
                freedom_report(
                    default_config(j),
                    restarts=req.restarts,
                    seed=req.seed,
                    quadrature_tol=req.tol,
                )
            )
        )
        for j in range(req.j_min, req.j_max + 1)
    ]
    return SweepResponse(records=records)


def handle_torus3(req: Torus3Request) -> Torus3Response:
    records = []
    t4s = []
    for j in req.j_list:
        cfg = default_config(j)
        records.append(
            FreedomRecord(
                **freedom_record(
                    freedom_report(cfg, restarts=req.restarts, seed=req.seed, quadrature_tol=req.tol)
                )
            )
        )
        if req.include_t4:
            t4s.append(
                T4Record(
                    **t4_record(
                        t4_product_report(
                            cfg, restarts=req.restarts, seed=req.seed, quadrature_tol=req.tol
                        )
                    )
                )
            )
    return Torus3Response(records=records, t4_records=t4s)


def handle_lp(req: LpRequest) -> LpResponse:
    nx = req.nx if req.nx is not None else 8 * req.j
    cx = CubicalComplex(GridSpec(j=req.j, nx=nx, ny=req.ny, nz=req.nz))
    cert = minimize_mass(cx, z_plane=req.z_plane, tol=req.tol)
    report = certificate_check(cx, cert, z_plane=req.z_plane)
    ref = cx.reference_cycle(req.z_plane)
    pairing = float(sample_calibration_dual(cx, CutoffProfile(req.j)) @ ref)
    record = LpRecord(
        j=req.j,
        nx=nx,
        ny=req.ny,
        nz=req.nz,
        z_plane=req.z_plane,
        mass=cert.mass,
        lower_bound=cert.lower_bound,
        gap=cert.gap,
        pairing_lower=pairing,
        reference_mass=float(cx.face_weights @ np.abs(ref)),
        converged=cert.converged,
        certificate_ok=report.ok,
    )
    chain = write_chain(cx, cert.chain) if req.include_chain else None
    return LpResponse(records=[record], chain=chain)


def handle_verify(req: VerifyRequest) -> VerifyResponse:
    results = verify.run_all(req.criteria)
    records = [VerifyRecord(**r.record()) for r in results]
    return VerifyResponse(records=records, all_passed=all(r.passed for r in records))
