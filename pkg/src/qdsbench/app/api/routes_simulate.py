import logging
from typing import Optional

from fastapi import APIRouter, HTTPException
from pydantic import BaseModel, Field

from qdsbench.app.core.models import Protocol, Role
from qdsbench.app.core.params import AdversaryConfig, ProtocolParams, Scenario
from qdsbench.app.core.simulation import DEFAULT_LEVEL, run_trials
from qdsbench.app.infra.reports import SimulationReport, report_record

logger = logging.getLogger(__name__)

router = APIRouter()

# Requests run in-process, so keep them small
MAX_TRIALS = 100_000


class SimulateRequestDTO(BaseModel):
    protocol: Protocol
    adversary: Role = Role.HONEST
    length: int = Field(ge=1)
    s_a: float = Field(default=0.0, ge=0, lt=1)
    s_v: float = Field(gt=0, lt=1)
    r: float = Field(default=0.0, ge=0, lt=0.5)
    trials: int = Field(default=1000, ge=1, le=MAX_TRIALS)
    seed: int = Field(default=0, ge=0, lt=2**64)
    target_fraction: Optional[float] = Field(default=None, ge=0, le=1)
    realistic: bool = False
    level: float = Field(default=DEFAULT_LEVEL, gt=0, lt=1)


@router.post("/v1/simulate")
def simulate(request: SimulateRequestDTO):
    """
    Run a Monte Carlo scenario and return its report.

    Args:
        protocol: p1, p1prime or p2
        adversary: honest, repudiate or forge
        trials: Number of independent runs, at most 100000
        seed: Master seed; equal requests give byte-identical reports

    Returns:
        The same object ``qdsbench simulate --format json`` prints
    """
    try:
        scenario = Scenario(
            protocol=request.protocol,
            params=ProtocolParams(
                length=request.length, s_a=request.s_a, s_v=request.s_v, r=request.r
            ),
            adversary=AdversaryConfig(
                role=request.adversary,
                target_fraction=request.target_fraction,
                knows_kept_set=not request.realistic,
            ),
            trials=request.trials,
            master_seed=request.seed,
        )
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    logger.info("simulate request: %s/%s x%d", scenario.protocol.value, request.adversary.value, request.trials)
    stats = run_trials(scenario, level=request.level)
    return report_record(SimulationReport(scenario, stats))
