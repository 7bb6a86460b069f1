"""Request and response shapes for the laboratory service.

Every response carries flat record objects whose fields match the fixed
report columns, so the CLI can hand them straight to the serializers.
"""

from __future__ import annotations

from pydantic import BaseModel, Field, model_validator


class SliceRequest(BaseModel):
    start: float = Field(default=0.0, ge=0.0)
    stop: float = Field(default=5.0, ge=0.0)
    step: float = Field(default=0.5, gt=0.0)

    @model_validator(mode="after")
    def _nonempty_range(self):
        if self.stop < self.start:
            raise ValueError("empty range: stop is below start")
        return self


class SliceRow(BaseModel):
    xhat: float
    det: float
    sys1: float
    diameter: float
    s: float
    t: float
    loewner: float


class SliceResponse(BaseModel):
    records: list[SliceRow]


class CylinderRequest(BaseModel):
    j: int = Field(ge=1)
    tol: float = Field(default=1e-9, gt=0.0)
    restarts: int = Field(default=1, ge=1)
    seed: int = 0


class CylinderRecord(BaseModel):
    j: int
    volume: float
    area_m: float
    mass2_lower: float
    sys1_estimate: float
    diam1_bound: float
    psi_residual: float
    closedness_residual: float
    comass_residual: float
    flags: list[str]


class CylinderResponse(BaseModel):
    records: list[CylinderRecord]


class SweepRequest(BaseModel):
    j_min: int = Field(default=1, ge=1)
    j_max: int = Field(ge=1)
    tol: float = Field(default=1e-9, gt=0.0)
    restarts: int = Field(default=1, ge=1)
    seed: int = 0

    @model_validator(mode="after")
    def _ordered(self):
        if self.j_max < self.j_min:
            raise ValueError("empty range: j_max is below j_min")
        return self


class FreedomRecord(BaseModel):
    j: int
    volume: float
    sys1_estimate: float
    sys2_lower: float
    ratio: float
    flags: list[str]


class SweepResponse(BaseModel):
    records: list[FreedomRecord]


class Torus3Request(BaseModel):
    j_list: list[int] = Field(min_length=1)
    tol: float = Field(default=1e-9, gt=0.0)
    restarts: int = Field(default=1, ge=1)
    seed: int = 0
    include_t4: bool = False

    @model_validator(mode="after")
    def _positive(self):
        if any(j < 1 for j in self.j_list):
            raise ValueError("every j must be >= 1")
        return self


class T4Record(BaseModel):
    j: int
    volume4: float
    sys2_lower4: float
    ratio4: float
    flags: list[str]


class Torus3Response(BaseModel):
    records: list[FreedomRecord]
    t4_records: list[T4Record] = []


class LpRequest(BaseModel):
    j: int = Field(ge=1)
    nx: int | None = Field(default=None, ge=1)
    ny: int = Field(default=8, ge=2)
    nz: int = Field(default=8, ge=2)
    z_plane: int = Field(default=0, ge=0)
    tol: float = Field(default=1e-9, gt=0.0)
    include_chain: bool = False


class LpRecord(BaseModel):
    j: int
    nx: int
    ny: int
    nz: int
    z_plane: int
    mass: float
    lower_bound: float
    gap: float
    pairing_lower: float
    reference_mass: float
    converged: bool
    certificate_ok: bool


class LpResponse(BaseModel):
    records: list[LpRecord]
    chain: str | None = None


class VerifyRequest(BaseModel):
    criteria: list[int] | None = None

    @model_validator(mode="after")
    def _known(self):
        if self.criteria is not None:
            if not self.criteria:
                raise ValueError("criteria list must not be empty")
            bad = [n for n in self.criteria if not 1 <= n <= 13]
            if bad:
                raise ValueError(f"unknown criteria {bad}; valid numbers are 1..13")
        return self


class VerifyRecord(BaseModel):
    number: int
    name: str
    passed: bool
    detail: str


class VerifyResponse(BaseModel):
    records: list[VerifyRecord]
    all_passed: bool


class HealthResponse(BaseModel):
    status: str
    package: str
    version: str
