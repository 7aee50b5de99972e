"""Pydantic request/response schemas for the ethlab service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

EnsembleKind = Literal["uniform", "canonical", "microcanonical", "pure"]
CenterMode = Literal["zero", "beta-energy"]
WidthMode = Literal["per_site", "absolute"]
RankPolicy = Literal["strict", "pseudo"]

SweepEnsemble = Literal[
    "uniform",
    "canonical",
    "microcanonical:zero",
    "microcanonical:beta-energy",
    "pure",
]


class ChainParams(BaseModel):
    n: int = Field(ge=2, le=14)
    g: float = 1.05
    h: float = 0.1


class EnsembleParams(BaseModel):
    kind: EnsembleKind = "canonical"
    beta: Optional[float] = 0.1
    center: CenterMode = "beta-energy"
    width_factor: float = Field(default=0.2, gt=0)
    width_mode: WidthMode = "per_site"
    state_index: Optional[int] = None


class SpectrumRequest(ChainParams):
    include_table: bool = False


class SpectrumResponse(BaseModel):
    n: int
    dim: int
    e_min: float
    e_max: float
    energy_sum: float
    table_csv: Optional[str] = None


class PairRequest(ChainParams):
    ensemble: EnsembleParams = EnsembleParams()
    i: int = Field(ge=0)
    j: int = Field(ge=0)
    n_b1: int = Field(default=1, ge=1)
    rank_policy: RankPolicy = "strict"


class PairResponse(BaseModel):
    v: float
    d2: float
    d3: float
    diagonal: bool


class TradeoffRequest(ChainParams):
    ensemble: EnsembleParams = EnsembleParams()
    i: int = Field(ge=0)
    n_b1: int = Field(default=1, ge=1)
    rank_policy: RankPolicy = "strict"
    averaged: bool = False


class TradeoffResponse(BaseModel):
    lhs: float
    rhs: float
    residual: float
    rhs_local: Optional[float] = None
    rhs_corr: Optional[float] = None


class BetaSolveRequest(ChainParams):
    e_target: float


class BetaSolveResponse(BaseModel):
    beta: float
    energy: float


class SweepRequest(BaseModel):
    n_list: list[int]
    g: float = 1.05
    h: float = 0.1
    beta: float = 0.1
    n_b1: int = Field(default=1, ge=1)
    ensembles: list[SweepEnsemble] = ["canonical", "microcanonical:beta-energy", "microcanonical:zero"]
    shell_center: CenterMode = "beta-energy"
    shell_width_factor: float = Field(default=0.2, gt=0)
    width_mode: WidthMode = "per_site"
    rank_policy: RankPolicy = "strict"
    workers: int = Field(default=1, ge=1)
    allow_residual: bool = False


class SweepResponse(BaseModel):
    records_csv: str
    summary_csv: str


class IdentitiesRequest(BaseModel):
    n: int = Field(default=6, ge=2, le=14)
    g: float = 1.05
    h: float = 0.1
    beta: float = 0.1
    n_b1: int = Field(default=1, ge=1)
    rank_policy: RankPolicy = "strict"
    seed: int = 1234


class IdentityCheckModel(BaseModel):
    name: str
    max_residual: float
    threshold: float
    passed: bool
    cases: int
    detail: str = ""


class IdentitiesResponse(BaseModel):
    passed: bool
    checks: list[IdentityCheckModel]
    expected_errors: list[str]


class FitRequest(BaseModel):
    points: Optional[list[tuple[float, float]]] = None
    summary_csv: Optional[str] = None
    column: Optional[str] = None
    ensemble: Optional[str] = None


class FitResponse(BaseModel):
    slope: float
    intercept: float
    r_squared: float
    points: list[tuple[float, float]]


class DiagnosticsRequest(ChainParams):
    beta: float = 0.1
    bins: int = Field(default=60, ge=1)


class DiagnosticsResponse(BaseModel):
    dos_csv: str
    canonical_csv: str
    e_beta_csv: str
    mi_csv: str


class HealthResponse(BaseModel):
    status: str
    version: str
