import math
from datetime import datetime
from fractions import Fraction
from typing import Annotated, List, Literal, Optional, Tuple, Union

import sympy
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .utils.rational import as_fraction, decimal, to_pair

# [numerator, denominator]
RationalPair = Annotated[List[int], Field(min_length=2, max_length=2)]
RationalValue = Union[RationalPair, int, str]


def encode_number(value):
    """Exact numbers become [num, den] pairs; surds and floats pass through as text/float."""
    if isinstance(value, bool):
        return value
    if isinstance(value, (int, Fraction)):
        return to_pair(value)
    if isinstance(value, sympy.Basic):
        if value.is_Rational:
            return [int(value.p), int(value.q)]
        return str(value)
    return value


def render_number(value) -> Optional[str]:
    if isinstance(value, bool):
        return None
    if isinstance(value, (int, Fraction)):
        return decimal(value)
    if isinstance(value, sympy.Basic):
        return str(sympy.N(value, 20))
    if isinstance(value, float):
        return repr(value)
    return None


def encode_point(point) -> List[RationalPair]:
    return [to_pair(c) for c in point]


# ============= INPUT FILES =============

class PolytopeFile(BaseModel):
    dim: int = Field(ge=1, le=6)
    vertices: List[List[RationalValue]] = Field(min_length=1)

    @model_validator(mode="after")
    def check_lengths(self):
        for k, v in enumerate(self.vertices):
            if len(v) != self.dim:
                raise ValueError(f"vertex {k} has {len(v)} coordinates, expected {self.dim}")
        return self

    def coordinates(self) -> List[Tuple[Fraction, ...]]:
        return [tuple(as_fraction(c) for c in v) for v in self.vertices]


class LatticeFile(BaseModel):
    basis: List[List[RationalValue]] = Field(min_length=1)
    dim: Optional[int] = None

    @model_validator(mode="after")
    def check_square(self):
        n = len(self.basis)
        if self.dim is not None and self.dim != n:
            raise ValueError(f"dim {self.dim} but {n} basis rows")
        for k, row in enumerate(self.basis):
            if len(row) != n:
                raise ValueError(f"basis row {k} has {len(row)} entries, expected {n}")
        return self

    def rows(self) -> List[Tuple[Fraction, ...]]:
        return [tuple(as_fraction(c) for c in row) for row in self.basis]


class SearchConfig(BaseModel):
    dim: int = Field(default=2, ge=2, le=4)
    restarts: int = Field(default=4, gt=0)
    iterations: int = Field(default=60, gt=0)
    seed: int = 0
    depth: int = Field(default=8, gt=0)
    scale_tol: str = "1/1000"
    # coarser tolerance used inside the float search
    search_tol: str = "1/50"
    method: Literal["nelder-mead", "anneal"] = "nelder-mead"
    step: float = Field(default=0.15, gt=0)
    shrink: float = Field(default=0.5, gt=0, le=1)
    temperature: float = Field(default=0.05, gt=0)
    cooling: float = Field(default=0.95, gt=0, lt=1)
    use_seeds: bool = True
    max_word: Optional[int] = Field(default=None, gt=0)
    workers: int = Field(default=1, gt=0)
    denominator_cap: int = Field(default=10**6, gt=1)

    @field_validator("scale_tol", "search_tol")
    @classmethod
    def positive_rational(cls, v: str) -> str:
        try:
            value = Fraction(v)
        except ZeroDivisionError as exc:
            raise ValueError("zero denominator") from exc
        if value <= 0:
            raise ValueError("tolerance must be positive")
        return v

    @property
    def tol(self) -> Fraction:
        return Fraction(self.scale_tol)

    @property
    def coarse_tol(self) -> Fraction:
        return Fraction(self.search_tol)


# ============= REPORT SCHEMAS =============

class AuditRowOut(BaseModel):
    check: str
    lhs: Union[RationalPair, float, str]
    relation: str
    rhs: Union[RationalPair, float, str]
    satisfied: bool
    kind: str
    context: str = ""
    lhs_decimal: Optional[str] = None
    rhs_decimal: Optional[str] = None

    @classmethod
    def from_row(cls, row) -> "AuditRowOut":
        return cls(
            check=row.check,
            lhs=encode_number(row.lhs),
            relation=row.relation,
            rhs=encode_number(row.rhs),
            satisfied=row.satisfied,
            kind=row.kind,
            context=row.context,
            lhs_decimal=render_number(row.lhs),
            rhs_decimal=render_number(row.rhs),
        )


class ReportOut(BaseModel):
    title: str
    ok: bool
    rows: List[AuditRowOut]

    @classmethod
    def from_report(cls, report) -> "ReportOut":
        return cls(title=report.title, ok=report.ok, rows=[AuditRowOut.from_row(r) for r in report.rows])


class CertificateOut(BaseModel):
    verdict: str
    witness: Optional[List[RationalPair]] = None
    depth_used: int
    candidates: List[List[RationalPair]]
    open_boxes: int = 0
    corner_leaves: int = 0
    union_leaves: int = 0

    @classmethod
    def from_certificate(cls, cert) -> "CertificateOut":
        return cls(
            verdict=cert.verdict.value,
            witness=encode_point(cert.witness) if cert.witness is not None else None,
            depth_used=cert.depth_used,
            candidates=[encode_point(u) for u in cert.candidate_translates],
            open_boxes=len(cert.open_boxes),
            corner_leaves=cert.corner_leaves,
            union_leaves=cert.union_leaves,
        )


class MultiplicityOut(BaseModel):
    mean_inverse_multiplicity: float
    std_error: float
    samples: int
    estimated_det: float
    exact_det: RationalPair
    histogram: List[Tuple[int, int]]
    within_4_sigma: bool

    @classmethod
    def from_estimate(cls, est, det: Fraction) -> "MultiplicityOut":
        return cls(
            mean_inverse_multiplicity=est.mean_inverse_multiplicity,
            std_error=est.std_error,
            samples=est.samples,
            estimated_det=est.estimated_det,
            exact_det=to_pair(det),
            histogram=list(est.histogram),
            within_4_sigma=abs(est.estimated_det - float(det)) <= 4 * est.det_std_error,
        )


class SearchResultOut(BaseModel):
    best_basis: List[List[RationalPair]]
    best_density: RationalPair
    best_density_decimal: str
    target: Optional[RationalPair] = None
    target_gap: Optional[float] = None
    seed_label: str
    certificate: CertificateOut
    history: List[Tuple[int, Optional[float]]]
    audits: List[ReportOut]

    @classmethod
    def from_result(cls, result) -> "SearchResultOut":
        return cls(
            best_basis=[encode_point(row) for row in result.best_basis],
            best_density=to_pair(result.best_density),
            best_density_decimal=decimal(result.best_density),
            target=to_pair(result.target) if result.target is not None else None,
            target_gap=float(result.best_density - result.target) if result.target is not None else None,
            seed_label=result.label,
            certificate=CertificateOut.from_certificate(result.certificate),
            history=[(k, v if math.isfinite(v) else None) for k, v in result.history],
            audits=[ReportOut.from_report(r) for r in result.audits],
        )


# ============= ARCHIVE SCHEMAS =============

class AuditRecordResponse(BaseModel):
    id: int
    report: str
    check: str
    relation: str
    lhs: str
    rhs: str
    satisfied: bool
    kind: str

    model_config = ConfigDict(from_attributes=True)


class SearchRunResponse(BaseModel):
    id: int
    dim: int
    seed: int
    method: str
    best_density: str
    best_density_decimal: str
    density_value: float
    basis: str
    label: str
    created_at: datetime
    records: List[AuditRecordResponse] = []

    model_config = ConfigDict(from_attributes=True)
