import math
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .models import Protocol, Role

# Slack used when turning products like L*(1/2 - r) into integer counts,
# so that 100*(0.5 - 0.1) = 40.000000000000004 still counts as 40.
COUNT_SLACK = 1e-9


def ceil_count(x: float) -> int:
    return math.ceil(x - COUNT_SLACK)


def floor_count(x: float) -> int:
    return math.floor(x + COUNT_SLACK)


class ProtocolParams(BaseModel):
    """Signature length and thresholds shared by all three protocols."""

    model_config = ConfigDict(frozen=True)

    length: int = Field(ge=1)
    s_a: float = Field(default=0.0, ge=0, lt=1)
    s_v: float = Field(gt=0, lt=1)
    r: float = Field(default=0.0, ge=0, lt=0.5)

    @model_validator(mode="after")
    def _check_thresholds(self) -> "ProtocolParams":
        if not self.s_a < self.s_v:
            raise ValueError(f"s_a must be below s_v (got s_a={self.s_a}, s_v={self.s_v})")
        return self

    @property
    def abort_band(self) -> Tuple[int, int]:
        """Inclusive range of received-element counts that does not abort."""
        return (
            ceil_count(self.length * (0.5 - self.r)),
            floor_count(self.length * (0.5 + self.r)),
        )

    def in_band(self, received: int) -> bool:
        low, high = self.abort_band
        return low <= received <= high


class AdversaryConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    role: Role = Role.HONEST
    target_fraction: Optional[float] = Field(default=None, ge=0, le=1)
    knows_kept_set: bool = True

    def aimed_fraction(self, params: ProtocolParams) -> float:
        """Mismatch fraction a repudiating Alice aims for, (s_a + s_v)/2 by default."""
        if self.target_fraction is not None:
            return self.target_fraction
        return (params.s_a + params.s_v) / 2


class Scenario(BaseModel):
    model_config = ConfigDict(frozen=True)

    protocol: Protocol
    params: ProtocolParams
    adversary: AdversaryConfig = AdversaryConfig()
    trials: int = Field(ge=1)
    master_seed: int = Field(default=0, ge=0, lt=2**64)
