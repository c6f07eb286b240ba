from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .config import settings


class Receiver(str, Enum):
    MMSE = "mmse"
    ZF = "zf"


class SerMethod(str, Enum):
    LAPLACE_ZF = "laplace_zf"
    LAPLACE_MMSE = "laplace_mmse"
    EXACT_ZF = "exact_zf"
    EXACT_MMSE = "exact_mmse"


class IntegralMethod(str, Enum):
    CLOSED_FORM = "closed_form"
    QUADRATURE = "quadrature"


class ScenarioId(str, Enum):
    S1 = "S1"
    S2 = "S2"
    S3 = "S3"
    S4 = "S4"
    S5 = "S5"
    S6 = "S6"
    S7 = "S7"
    S8 = "S8"
    S9 = "S9"
    S10 = "S10"


class Command(str, Enum):
    CDF = "cdf"
    PDF = "pdf"
    SER_CURVE = "ser-curve"
    VALIDATE = "validate"
    SCENARIO = "scenario"
    DROP = "drop"
    THETA_CLOUD = "theta-cloud"


class GridScale(str, Enum):
    LINEAR = "linear"
    LOG = "log"


class CoverageRegion(str, Enum):
    # triangle spanned by the side midpoints of the BS triangle
    CLUSTER = "cluster"
    # the full BS triangle, users may sit next to a base station
    TRIANGLE = "triangle"


class SerEstimator(str, Enum):
    CONDITIONAL = "conditional"
    SAMPLES = "samples"


class CheckStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"


# Domain types
class PowerProfile(BaseModel):
    """Diagonal average link powers: p1 for the desired user, p2 for the interferer"""

    model_config = ConfigDict(frozen=True)

    p1: Tuple[float, ...]
    p2: Tuple[float, ...]
    jitter_history: Tuple[float, ...] = ()

    @field_validator("p1", "p2")
    @classmethod
    def _positive(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if any(not np.isfinite(x) or x <= 0 for x in v):
            raise ValueError("link powers must be finite and strictly positive")
        return tuple(float(x) for x in v)

    @model_validator(mode="after")
    def _shape(self) -> "PowerProfile":
        if len(self.p1) != len(self.p2):
            raise ValueError("p1 and p2 must have the same length")
        if len(self.p1) < 2:
            raise ValueError("at least two receive antennas are required")
        return self

    @property
    def n_r(self) -> int:
        return len(self.p1)

    @property
    def P1(self) -> np.ndarray:
        return np.asarray(self.p1, dtype=float)

    @property
    def P2(self) -> np.ndarray:
        return np.asarray(self.p2, dtype=float)

    @classmethod
    def from_arrays(cls, p1, p2) -> "PowerProfile":
        return cls(p1=tuple(np.asarray(p1, dtype=float)), p2=tuple(np.asarray(p2, dtype=float)))


class SystemConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    sigma2: float = Field(gt=0)
    receiver: Receiver = Receiver.MMSE
    modulation_order: int = Field(default=4, ge=2)


class Modulation(BaseModel):
    model_config = ConfigDict(frozen=True)

    g: float = Field(gt=0, le=1)
    t_max: float


class DistributionCurve(BaseModel):
    """Sampled (z, F(z)) pairs, optionally with a confidence halfwidth"""

    model_config = ConfigDict(frozen=True)

    z: Tuple[float, ...]
    f: Tuple[float, ...]
    halfwidth: Optional[float] = None

    @model_validator(mode="after")
    def _ordered(self) -> "DistributionCurve":
        if len(self.z) != len(self.f):
            raise ValueError("z and f must have the same length")
        z = np.asarray(self.z)
        f = np.asarray(self.f)
        if z.size > 1 and np.any(np.diff(z) <= 0):
            raise ValueError("z must be strictly increasing")
        if z.size > 1 and np.any(np.diff(f) < -1e-9):
            raise ValueError("f must be nondecreasing")
        return self

    @property
    def points(self) -> List[Tuple[float, float]]:
        return list(zip(self.z, self.f))


class DegeneracyReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    degenerate: bool
    pairs: List[Tuple[int, int]] = []
    triples: List[Tuple[int, int, int]] = []
    reasons: List[str] = []


class QuadratureSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    abs_tol: float = Field(default_factory=lambda: settings.QUAD_ABS_TOL, gt=0)
    rel_tol: float = Field(default_factory=lambda: settings.QUAD_REL_TOL, gt=0)
    max_subdivisions: int = Field(default_factory=lambda: settings.QUAD_LIMIT, ge=1)


class IntegralArgs(BaseModel):
    """The (a, b, c, d, x) convention shared by the six double-integral families"""

    model_config = ConfigDict(frozen=True)

    a: float
    b: float = Field(gt=0)
    c: float
    d: float = Field(gt=0)
    x: float = Field(ge=0)

    @field_validator("c")
    @classmethod
    def _nonzero(cls, v: float) -> float:
        if v == 0:
            raise ValueError("c must be nonzero")
        return v


class SerIntegralResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: float = Field(gt=0)
    method: IntegralMethod


class SerAsymptote(BaseModel):
    model_config = ConfigDict(frozen=True)

    diversity_gain: float = Field(gt=0)
    array_gain: float = Field(gt=0)
    method: SerMethod


class ThetaMetric(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: float = Field(gt=0)


class ChannelRealization(BaseModel):
    """One draw of the two channel columns h1, h2"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    h1: np.ndarray
    h2: np.ndarray

    @model_validator(mode="after")
    def _finite(self) -> "ChannelRealization":
        if self.h1.shape != self.h2.shape:
            raise ValueError("h1 and h2 must have the same shape")
        if not (np.all(np.isfinite(self.h1)) and np.all(np.isfinite(self.h2))):
            raise ValueError("channel entries must be finite")
        return self


class McRun(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    seed: int
    n_samples: int = Field(ge=1)
    samples: np.ndarray
    receiver: Receiver
    anomalies: int = 0

    @model_validator(mode="after")
    def _count(self) -> "McRun":
        if self.samples.size + self.anomalies != self.n_samples:
            raise ValueError("samples plus excluded anomalies must equal n_samples")
        return self


class ScenarioSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha_desired: float = Field(gt=0)
    alpha_interferer: float = Field(gt=0)
    rho_db: float = 5.0
    varsigma: float = Field(default=1.0, gt=0)
    n_r: int = Field(default=3, ge=2)
    total_p1: float = Field(default=3.0, gt=0)


def _default_bs_positions() -> List[Tuple[float, float]]:
    return [(0.0, 0.0), (1.0, 0.0), (0.5, float(np.sqrt(3.0) / 2.0))]


class DropSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int = 0
    path_loss_exponent: float = Field(default=3.5, gt=2)
    shadow_sigma_db: float = Field(default=8.0, ge=0)
    bs_positions: List[Tuple[float, float]] = Field(default_factory=_default_bs_positions)
    coverage: CoverageRegion = CoverageRegion.CLUSTER
    min_distance: float = Field(default=0.01, gt=0)
    transmit_power: Optional[float] = Field(default=None, gt=0)
    calibration_sigma2: float = Field(default=1.0, gt=0)
    calibration_probes: int = Field(default=10_000, ge=100)
    calibration_seed: int = 0

    @field_validator("bs_positions")
    @classmethod
    def _triangle(cls, v: List[Tuple[float, float]]) -> List[Tuple[float, float]]:
        if len(v) != 3:
            raise ValueError("coverage geometry needs exactly three base stations")
        return v


# CLI run configuration
class GridSpec(BaseModel):
    z_min: float = Field(default=0.0, ge=0)
    z_max: float = Field(default=20.0, gt=0)
    n_points: int = Field(default=200, ge=2)
    scale: GridScale = GridScale.LINEAR

    @model_validator(mode="after")
    def _range(self) -> "GridSpec":
        if self.z_max <= self.z_min:
            raise ValueError("z_max must exceed z_min")
        if self.scale == GridScale.LOG and self.z_min <= 0:
            raise ValueError("log grid needs z_min > 0")
        return self


class McSpec(BaseModel):
    samples: int = Field(default=0, ge=0)
    seed: Optional[int] = None
    workers: int = Field(default_factory=lambda: settings.MC_WORKERS, ge=1)


class SweepSpec(BaseModel):
    start_db: float = 0.0
    stop_db: float = 40.0
    step_db: float = Field(default=5.0, gt=0)

    def points(self) -> np.ndarray:
        n = int(np.floor((self.stop_db - self.start_db) / self.step_db + 1e-9)) + 1
        return self.start_db + self.step_db * np.arange(n)


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    command: Command
    scenario: Optional[ScenarioId] = None
    rho_db: float = 5.0
    n_r: int = Field(default=3, ge=2)
    total_p1: float = Field(default=3.0, gt=0)
    p1: Optional[List[float]] = None
    p2: Optional[List[float]] = None
    sigma2: Optional[float] = Field(default=None, gt=0)
    receiver: Receiver = Receiver.MMSE
    modulation_order: int = Field(default=4, ge=2)
    user: int = Field(default=1, ge=1, le=2)
    grid: GridSpec = Field(default_factory=GridSpec)
    mc: McSpec = Field(default_factory=McSpec)
    sweep: SweepSpec = Field(default_factory=SweepSpec)
    no_mc: bool = False
    ser_estimator: SerEstimator = SerEstimator.CONDITIONAL
    drop: DropSpec = Field(default_factory=DropSpec)
    n_drops: int = Field(default=1, ge=1)
    n_draws: int = Field(default=500, ge=2)
    scenarios: List[ScenarioId] = Field(default_factory=lambda: list(ScenarioId))
    output: Optional[str] = None

    @model_validator(mode="after")
    def _source(self) -> "RunConfig":
        explicit = self.p1 is not None or self.p2 is not None
        if explicit and (self.p1 is None or self.p2 is None):
            raise ValueError("explicit profiles need both p1 and p2")
        if explicit and self.scenario is not None:
            raise ValueError("give either a scenario or explicit p1/p2, not both")
        if self.command == Command.VALIDATE and 0 < self.mc.samples < 1000:
            raise ValueError("validate needs at least 1000 Monte Carlo samples")
        return self


class ValidationResult(BaseModel):
    property_name: str
    status: CheckStatus
    measured: float
    bound: float
    detail: Dict[str, Any] = {}
