"""The acceptance suite: every quantitative claim as a named check.

Each criterion returns pass/fail plus a one-line detail string with the
measured quantities. The same checks back the ``verify`` CLI verb, the
service endpoint, and the acceptance tests, so there is exactly one
definition of "the artifact works".
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .assembly import default_config, freedom_report, t4_product_report
from .cubical import (
    CubicalComplex,
    GridSpec,
    certificate_check,
    minimize_mass,
    sample_calibration_dual,
)
from .cylinder import CylinderMetric, area_m_closed_form, heisenberg_relation_check
from .flat_torus import (
    LOEWNER_BOUND,
    Gram2,
    class_length,
    loewner_ratio,
    moduli_point,
    shortest_vector,
    slice_gram,
    torus_diameter,
)
from .forms import (
    CutoffProfile,
    TwoForm,
    closedness_check,
    comass_residual,
    cutoff_alpha,
    d_residual_at,
    hodge_residual,
    integrate_form_over_M,
    phi_independent_bound,
)


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    elapsed_s: float

    @property
    def line(self) -> str:
        word = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number:2d} {word} {self.name}: {self.detail}"

    def record(self) -> dict:
        return {
            "number": self.number,
            "name": self.name,
            "passed": self.passed,
            "detail": self.detail,
        }


def _cylinder_volume_linear() -> tuple[bool, str]:
    start = time.perf_counter()
    worst = 0.0
    for j in (1, 2, 4, 8, 16):
        worst = max(worst, abs(CylinderMetric(j).volume() - 2.0 * j))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-6 and elapsed < 10.0
    return ok, f"max |volume - 2j| = {worst:.3g} over j in {{1,2,4,8,16}}"


def _slab_area_closed_form() -> tuple[bool, str]:
    worst = 0.0
    for j in range(1, 65):
        worst = max(worst, abs(CylinderMetric(j).area_m() - area_m_closed_form(j)))
    ratio = CylinderMetric(64).area_m() / 64.0**2
    ok = worst <= 1e-9 and 0.95 <= ratio <= 1.10
    return ok, f"max closed-form deviation {worst:.3g}; area/j^2 at j=64 is {ratio:.4f}"


def _calibration_pairing_bound() -> tuple[bool, str]:
    margin = math.inf
    for j in range(2, 33):
        m = CylinderMetric(j)
        pairing = integrate_form_over_M(m, CutoffProfile(j))
        margin = min(margin, pairing - phi_independent_bound(j))
    ratio = integrate_form_over_M(CylinderMetric(32), CutoffProfile(32)) / (32.0**2 / 2.0)
    ok = margin >= 0.0 and 0.85 <= ratio <= 1.15
    return ok, f"min pairing margin {margin:.4f}; pairing/(j^2/2) at j=32 is {ratio:.4f}"


def _comass_and_hodge() -> tuple[bool, str]:
    m = CylinderMetric(4)
    c = comass_residual(m, samples=10_000, seed=0)
    h = hodge_residual(m, samples=10_000, seed=0)
    ok = c < 1e-10 and h < 1e-10
    return ok, f"comass residual {c:.3g}, Hodge residual {h:.3g} over 10^4 points"


def _closedness_fd() -> tuple[bool, str]:
    form = cutoff_alpha(CutoffProfile(4))
    residual = closedness_check(form, h=1e-4, x_max=8.0)
    # the family form is closed to machine precision at any step, so the
    # second-order behaviour of the stencil is measured on a control form
    # with a known nonzero derivative
    control = TwoForm(
        c_xy=lambda x, y, z: 0.0,
        c_xz=lambda x, y, z: math.sin(3.0 * y),
        c_yz=lambda x, y, z: 0.0,
    )
    p = (1.0, 0.3, 0.5)
    exact = -3.0 * math.cos(3.0 * p[1])
    err_h = abs(d_residual_at(control, p, 1e-2) - exact)
    err_h2 = abs(d_residual_at(control, p, 5e-3) - exact)
    ratio = err_h / err_h2
    ok = residual < 1e-6 and 3.5 <= ratio <= 4.5
    return ok, f"residual {residual:.3g} at h=1e-4; halving-step error ratio {ratio:.3f}"


def _shift_isometry() -> tuple[bool, str]:
    r = CylinderMetric(4).isometry_check_psi(samples=1000, seed=0, region="periodic")
    return r < 1e-12, f"pullback residual {r:.3g} on the periodic strip"


def _slide_instability() -> tuple[bool, str]:
    for j in range(1, 65):
        if class_length(slice_gram(float(j)), (1, j)) != 1.0:
            return False, f"mixed class length not exactly 1.0 at j={j}"
        if CylinderMetric(j).mass1_slide_bound() != 1.0 / j:
            return False, f"slide bound differs from 1/j at j={j}"
    return True, "mixed-class length exactly 1.0 and slide bound exactly 1/j for j <= 64"


def _moduli_and_diameter() -> tuple[bool, str]:
    dev_det = dev_sys = dev_t = 0.0
    max_s = 0.0
    max_diam = 0.0
    for u in np.linspace(0.0, 10.0, 201):
        g = slice_gram(float(u))
        dev_det = max(dev_det, abs(g.det - 1.0))
        dev_sys = max(dev_sys, abs(shortest_vector(g)[0] - 1.0))
        s, t = moduli_point(g)
        dev_t = max(dev_t, abs(t - 1.0))
        max_s = max(max_s, abs(s))
        max_diam = max(max_diam, torus_diameter(g))
    ok = (
        dev_det <= 1e-12
        and dev_sys <= 1e-12
        and dev_t <= 1e-12
        and max_s <= 0.5 + 1e-12
        and max_diam < 1.0
    )
    return ok, (
        f"max |det-1| {dev_det:.2g}, |sys1-1| {dev_sys:.2g}, |t-1| {dev_t:.2g}, "
        f"|s| {max_s:.3f}, diameter {max_diam:.4f}"
    )


def _lattice_relation() -> tuple[bool, str]:
    ok = heisenberg_relation_check(50)
    return ok, "commutation relation exact in integer arithmetic for j = 1..50"


def _lp_mass_sandwich() -> tuple[bool, str]:
    start = time.perf_counter()
    masses = {}
    worst_gap = 0.0
    sandwich_ok = True
    cert_ok = True
    for j in (2, 3, 4):
        cx = CubicalComplex(GridSpec(j=j, nx=8 * j, ny=8, nz=8))
        cert = minimize_mass(cx)
        cert_ok = cert_ok and certificate_check(cx, cert).ok and cert.converged
        pairing = float(sample_calibration_dual(cx, CutoffProfile(j)) @ cx.reference_cycle())
        ref_mass = float(cx.face_weights @ np.abs(cx.reference_cycle()))
        sandwich_ok = sandwich_ok and pairing <= cert.mass + 1e-12 and cert.mass <= ref_mass + 1e-12
        worst_gap = max(worst_gap, cert.gap / max(1.0, cert.mass))
        masses[j] = cert.mass
    elapsed = time.perf_counter() - start
    growth = masses[4] / masses[2]
    ok = sandwich_ok and cert_ok and worst_gap < 1e-6 and growth > 2.0 and elapsed < 600.0
    return ok, (
        f"mass {masses[2]:.4f}/{masses[3]:.4f}/{masses[4]:.4f}, relative gap {worst_gap:.2g}, "
        f"mass(4)/mass(2) = {growth:.3f}"
    )


_REPORT_JS = (4, 8, 16, 32)


def _freedom_ratio_decay() -> tuple[bool, str]:
    ratios = [freedom_report(default_config(j), restarts=1).ratio for j in _REPORT_JS]
    decreasing = all(a > b for a, b in zip(ratios, ratios[1:]))
    tail = ratios[-1] / ratios[0]
    ok = decreasing and tail < 0.25
    shown = " > ".join(f"{r:.3f}" for r in ratios)
    return ok, f"ratios {shown}; ratio(32)/ratio(4) = {tail:.3f}"


def _product_ratio_growth() -> tuple[bool, str]:
    ratios = [t4_product_report(default_config(j), restarts=1).ratio4 for j in _REPORT_JS]
    ok = all(a < b for a, b in zip(ratios, ratios[1:]))
    shown = " < ".join(f"{r:.3f}" for r in ratios)
    return ok, f"four-dimensional ratios {shown}"


def _loewner_bound() -> tuple[bool, str]:
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(1000):
        a = rng.normal(size=(2, 2))
        while abs(np.linalg.det(a)) < 1e-6:
            a = rng.normal(size=(2, 2))
        g = a.T @ a
        worst = max(worst, loewner_ratio(Gram2(g[0, 0], g[0, 1], g[1, 1])))
    hex_dev = abs(loewner_ratio(Gram2(1.0, 0.5, 1.0)) - LOEWNER_BOUND)
    ok = worst <= LOEWNER_BOUND + 1e-12 and hex_dev <= 1e-12
    return ok, f"max ratio {worst:.6f} vs bound {LOEWNER_BOUND:.6f}; hexagonal gap {hex_dev:.2g}"


CRITERIA: tuple[tuple[int, str], ...] = (
    (1, "cylinder-volume-linear"),
    (2, "slab-area-closed-form"),
    (3, "calibration-pairing-bound"),
    (4, "comass-and-hodge"),
    (5, "closedness-fd"),
    (6, "shift-isometry"),
    (7, "slide-instability"),
    (8, "moduli-and-diameter"),
    (9, "lattice-relation"),
    (10, "lp-mass-sandwich"),
    (11, "freedom-ratio-decay"),
    (12, "product-ratio-growth"),
    (13, "loewner-bound"),
)

_CHECKS = {
    1: _cylinder_volume_linear,
    2: _slab_area_closed_form,
    3: _calibration_pairing_bound,
    4: _comass_and_hodge,
    5: _closedness_fd,
    6: _shift_isometry,
    7: _slide_instability,
    8: _moduli_and_diameter,
    9: _lattice_relation,
    10: _lp_mass_sandwich,
    11: _freedom_ratio_decay,
    12: _product_ratio_growth,
    13: _loewner_bound,
}

NAMES = dict(CRITERIA)


def run_criterion(number: int) -> CriterionResult:
    if number not in _CHECKS:
        raise ValueError(f"no criterion numbered {number}")
    start = time.perf_counter()
    try:
        passed, detail = _CHECKS[number]()
    except Exception as exc:  # a crash is a failure, not a test error
        passed, detail = False, f"raised {type(exc).__name__}: {exc}"
    return CriterionResult(
        number=number,
        name=NAMES[number],
        passed=bool(passed),
        detail=detail,
        elapsed_s=time.perf_counter() - start,
    )


def run_all(numbers=None) -> tuple[CriterionResult, ...]:
    if numbers is None:
        numbers = [n for n, _ in CRITERIA]
    return tuple(run_criterion(n) for n in numbers)
