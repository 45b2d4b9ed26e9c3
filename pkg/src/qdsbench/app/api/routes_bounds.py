from typing import Literal, Optional

from fastapi import APIRouter, HTTPException, Query
from pydantic import BaseModel, Field

from qdsbench.app.core.analysis import bound_report, min_length, optimize_thresholds
from qdsbench.app.core.models import Protocol
from qdsbench.app.core.params import ProtocolParams
from qdsbench.app.infra.reports import report_record

router = APIRouter()

BoundProtocol = Literal["p1", "p1prime", "p2"]


class SolveRequestDTO(BaseModel):
    protocol: BoundProtocol
    epsilon: float = Field(gt=0, le=1)
    s_a: float = Field(default=0.0, ge=0, lt=1)
    s_v: float = Field(gt=0, lt=1)
    r: float = Field(default=0.0, ge=0, lt=0.5)


class SolveResponseDTO(BaseModel):
    protocol: str
    epsilon: float
    length: int


class OptimizeRequestDTO(BaseModel):
    protocol: BoundProtocol
    length: int = Field(ge=1)
    r: float = Field(default=0.0, ge=0, lt=0.5)
    s_a: Optional[float] = Field(default=None, ge=0, lt=1)


class OptimizeResponseDTO(BaseModel):
    protocol: str
    length: int
    s_a: float
    s_v: float
    value: float
    repudiation_bound: float
    forging_bound: float


@router.get("/v1/bounds")
async def get_bounds(
    protocol: BoundProtocol,
    length: int = Query(ge=1),
    s_v: float = Query(gt=0, lt=1),
    s_a: float = Query(default=0.0, ge=0, lt=1),
    r: float = Query(default=0.0, ge=0, lt=0.5),
):
    """
    Closed-form repudiation, forging and abort bounds.

    Returns:
        The same object ``qdsbench bounds --format json`` prints
    """
    try:
        params = ProtocolParams(length=length, s_a=s_a, s_v=s_v, r=r)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    return report_record(bound_report(Protocol(protocol), params))


@router.post("/v1/solve")
async def solve_length(request: SolveRequestDTO) -> SolveResponseDTO:
    """Smallest signature length whose bounds are all at most epsilon."""
    protocol = Protocol(request.protocol)
    try:
        length = min_length(protocol, request.epsilon, request.s_a, request.s_v, request.r)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    return SolveResponseDTO(protocol=protocol.family.value, epsilon=request.epsilon, length=length)


@router.post("/v1/optimize")
async def optimize(request: OptimizeRequestDTO) -> OptimizeResponseDTO:
    protocol = Protocol(request.protocol)
    try:
        choice = optimize_thresholds(protocol, request.length, request.r, request.s_a)
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    return OptimizeResponseDTO(
        protocol=protocol.family.value, length=request.length, **choice._asdict()
    )
