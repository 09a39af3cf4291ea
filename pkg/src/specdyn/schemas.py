"""Pydantic request/response models for the HTTP service.

Exact reals travel as expression strings ("3/2", "sqrt(2)", "(1+sqrt(5))/2",
decimal literals); window sets travel as element lists plus an explicit
horizon.  Scores and densities are emitted as "p/q" strings so nothing is
ever rounded on the wire.
"""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class WindowModel(BaseModel):
    elements: list[int] = Field(default_factory=list)
    horizon: int = Field(ge=0)


class BallModel(BaseModel):
    center: str
    radius: str


class CylinderModel(BaseModel):
    word: str
    offset: int = 0


class SpectrumGenRequest(BaseModel):
    alpha: str
    gamma: str = "0"
    horizon: int = Field(ge=1)
    elements: Optional[list[int]] = None  # omitted: the full window [1, horizon]


class SpectrumGenResponse(BaseModel):
    values: list[int]
    horizon: int


class BeattyRequest(BaseModel):
    alpha: str
    beta: str
    horizon: int = Field(ge=1)


class BeattyResponse(BaseModel):
    partition: bool
    first_violation: Optional[int]
    covered_twice: list[int]
    uncovered: list[int]
    ambiguous: list[int]
    horizon: int
    rational_alpha: bool
    rational_beta: bool


class FamilyDetectRequest(BaseModel):
    family: str
    elements: list[int]
    horizon: Optional[int] = None
    params: dict[str, Any] = Field(default_factory=dict)


class FamilyReportModel(BaseModel):
    family: str
    verdict: str
    score: str
    witnesses: list[Any]
    horizon: int


class RamseySplitRequest(BaseModel):
    family: str
    elements: list[int]
    horizon: Optional[int] = None
    parts: int = Field(default=2, ge=2)
    trials: int = Field(default=20, ge=1)
    seed: int = 0
    params: dict[str, Any] = Field(default_factory=dict)


class FsChainRequest(BaseModel):
    base: WindowModel
    chains: list[WindowModel]


class CheckReportModel(BaseModel):
    name: str
    passed: bool
    violations: list[Any]
    details: dict[str, Any]
    horizon: int


class ReturnTimesRequest(BaseModel):
    system: str
    x: str
    ball: Optional[BallModel] = None
    cylinder: Optional[CylinderModel] = None
    horizon: int = Field(ge=1)


class PairReturnTimesRequest(ReturnTimesRequest):
    y: str = "0"


class ReturnTimesResponse(BaseModel):
    elements: list[int]
    horizon: int
    ambiguous: list[int]


class ProximalRequest(BaseModel):
    system: str
    x: str
    y: str
    eps_ladder: list[str] = Field(default_factory=list)  # empty: 1/2 .. 2^-10
    horizon: int = Field(ge=1)
    families: Optional[list[str]] = None


class ProximalResponse(BaseModel):
    entries: list[dict[str, Any]]
    per_family: dict[str, str]
    horizon: int
    neighborhood_proxy: str


class SuspReturnTimesRequest(BaseModel):
    system: str
    alpha: str  # base slope: the flow advances by 1/alpha per step
    x: str
    y: str
    gamma0: str
    band_lo: str
    band_hi: str
    ball: BallModel
    horizon: int = Field(ge=1)


class LiftSearchRequest(BaseModel):
    system: str
    alpha: str
    x: str
    y: str
    ball: BallModel
    eps: str
    gamma_grid: Optional[list[str]] = None  # omitted: the 99-point k/100 grid
    horizon: int = Field(ge=1)


class LiftSearchResponse(BaseModel):
    entries: list[dict[str, Any]]
    horizon: int
    base_horizon: int
    flow_increment: str


class TheoremsRunRequest(BaseModel):
    experiment: str
    config: dict[str, str]


class ExperimentReportModel(BaseModel):
    name: str
    config: dict[str, Any]
    passed: bool
    assertions: list[dict[str, Any]]
    artifacts: dict[str, Any]
    horizons: dict[str, Any]
    hypothesis_failed: Optional[str]
    wall_time_ms: float


class TheoremsRunResponse(BaseModel):
    reports: list[ExperimentReportModel]
    passed: bool
    hypothesis_failures: int
