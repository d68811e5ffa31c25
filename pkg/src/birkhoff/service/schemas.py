"""Request/response models for the service wire formats.

Exact values always travel as {"a": "p/q", "b": "p/q", "float": x}: the
coefficients of a + b*rho as fraction strings plus a certified double.
"""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, ConfigDict, Field


class LinearFormOut(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    a: str
    b: str
    float_value: float = Field(alias="float")


class VersionResponse(BaseModel):
    package: str
    schema_version: int


class ConvergentRow(BaseModel):
    n: int
    a: Optional[int]  # the digit a_n; none for n = 0
    p: int
    q: int
    d: LinearFormOut


class CfResponse(BaseModel):
    schema_version: int
    rho: str
    rows: list[ConvergentRow]


class SumResponse(BaseModel):
    schema_version: int
    rho: str
    n: int
    x0: str
    method: str
    value: LinearFormOut


class OrbitRow(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    i: int
    a: Optional[str]
    b: Optional[str]
    float_value: float = Field(alias="float")
    is_running_max: bool
    is_running_min: bool


class OrbitResponse(BaseModel):
    schema_version: int
    rho: str
    x0: str
    approx: bool
    rows: list[OrbitRow]


class DensityResponse(BaseModel):
    schema_version: int
    rho: str
    n: int
    breakpoints: list[LinearFormOut]
    values: list[str]


class DiscrepancyItem(BaseModel):
    method: str
    value: LinearFormOut


class DiscrepancyResponse(BaseModel):
    schema_version: int
    rho: str
    n: int
    results: list[DiscrepancyItem]
    all_equal: Optional[bool]  # only set for method=all


class TrapezoidResponse(BaseModel):
    schema_version: int
    rho: str
    k: int
    q: int
    is_step_trapezoid: bool
    step_count: int
    isosceles: bool
    plateau_width: LinearFormOut
    plateau_width_formula: LinearFormOut
    support_length: LinearFormOut
    support_length_formula: LinearFormOut
    widths_match: bool
    failures: list[str]


class AsymptoticRowOut(BaseModel):
    index: int
    value: float
    ratio: float


class AsymptoticResponse(BaseModel):
    schema_version: int
    a: int
    c_value: float
    four_c: float
    s_rows: list[AsymptoticRowOut]
    d_rows: list[AsymptoticRowOut]


class FigureResponse(BaseModel):
    schema_version: int
    which: str
    files: dict[str, str]
    metadata: dict
