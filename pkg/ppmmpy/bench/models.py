import dataclasses
from typing import Optional

import numpy as np

from ppmmpy.engine.models import ConvergenceTrace, EngineConfig, Strategy
from ppmmpy.exceptions import ExperimentError
from ppmmpy.sample import ar1_covariance
from ppmmpy.sample.models import GaussianSpec

__all__ = ("ExperimentSpec", "CellResult", "WEIGHT_SCHEMES")

WEIGHT_SCHEMES = ("uniform", "random")


@dataclasses.dataclass(frozen=True)
class ExperimentSpec:
    """
    A class used to represent a simulation study: the Gaussian pair, the methods and the replications.
    ...

    Attributes
    ----------
    name: str
        Name of the study, used in log records
    dims: tuple[int, ...]
        The dimensions to run
    n: int
        Source sample size (default 2000)
    n_y: Optional[int]
        Target sample size, None for the same as n. A target of size 1 is one draw stored twice.
    mean_x: float
        Every coordinate of the source mean (default -2)
    mean_y: float
        Every coordinate of the target mean (default 2)
    rho_x: float
        AR(1) correlation of the source covariance (default 0.8)
    rho_y: float
        AR(1) correlation of the target covariance (default 0.5)
    weights: str
        'uniform' or 'random' (i.i.d. Uniform(0.5, 1.5) before normalization)
    methods: tuple[Strategy, ...]
        The strategies to compare
    replications: int
        Replications per (dimension, method); replication r uses seed + r
    seed: int
        The base seed
    engine: EngineConfig
        The estimator settings; its seed is replaced per replication
    jobs: int
        Cells run concurrently (default 1)
    """

    name: str = "experiment"
    dims: tuple[int, ...] = (10,)
    n: int = 2000
    n_y: Optional[int] = None
    mean_x: float = -2.0
    mean_y: float = 2.0
    rho_x: float = 0.8
    rho_y: float = 0.5
    weights: str = "uniform"
    methods: tuple[Strategy, ...] = (Strategy(),)
    replications: int = 10
    seed: int = 0
    engine: EngineConfig = dataclasses.field(default_factory=EngineConfig)
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "methods", tuple(self.methods))
        if not self.dims or any(d < 1 for d in self.dims):
            raise ExperimentError(f"dimensions must be positive, got {self.dims}")
        if len(set(self.dims)) != len(self.dims):
            raise ExperimentError(f"dimensions must be distinct, got {self.dims}")
        if self.n < 2:
            raise ExperimentError(f"n must be at least 2, got {self.n}")
        if self.n_y is not None and self.n_y < 1:
            raise ExperimentError(f"n_y must be at least 1, got {self.n_y}")
        if not (abs(self.rho_x) < 1 and abs(self.rho_y) < 1):
            raise ExperimentError(f"|rho| must be below 1, got {self.rho_x} and {self.rho_y}")
        if self.weights not in WEIGHT_SCHEMES:
            raise ExperimentError(f"unknown weight scheme {self.weights!r}")
        if not self.methods:
            raise ExperimentError("at least one method is required")
        if len({m.label for m in self.methods}) != len(self.methods):
            raise ExperimentError("methods must be distinct")
        if self.replications < 1:
            raise ExperimentError(f"replications must be at least 1, got {self.replications}")
        if not 0 <= self.seed < 2**64 - self.replications:
            raise ExperimentError(f"seed out of range: {self.seed}")
        if self.jobs < 1:
            raise ExperimentError(f"jobs must be at least 1, got {self.jobs}")

    @property
    def target_size(self) -> int:
        return self.n if self.n_y is None else self.n_y

    def source_spec(self, d: int) -> GaussianSpec:
        return GaussianSpec(np.full(d, self.mean_x), ar1_covariance(d, self.rho_x))

    def target_spec(self, d: int) -> GaussianSpec:
        return GaussianSpec(np.full(d, self.mean_y), ar1_covariance(d, self.rho_y))


@dataclasses.dataclass(frozen=True)
class CellResult:
    """
    A class used to represent the outcome of one (dimension, method, replication) cell.
    ...

    Attributes
    ----------
    d: int
        The dimension
    method: str
        The strategy label
    replication: int
        The replication index
    trace: Optional[ConvergenceTrace]
        The ConvergenceTrace, None when the cell failed
    error: Optional[str]
        'ErrorClass: message' when the cell failed
    cpu_seconds: float
        Process CPU time spent in the fit
    trace_path: Optional[str]
        Where the trace was written
    """

    d: int
    method: str
    replication: int
    trace: Optional[ConvergenceTrace] = None
    error: Optional[str] = None
    cpu_seconds: float = 0.0
    trace_path: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def status(self) -> str:
        if self.ok:
            return "ok"
        return "failed:" + self.error.split(":", 1)[0]
