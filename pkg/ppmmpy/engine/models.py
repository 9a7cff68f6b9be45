import dataclasses
import enum
from typing import Any, Optional

import numpy as np

from ppmmpy.directions.models import Direction
from ppmmpy.exceptions import ConfigError, DimensionMismatchError, PPMMError
from ppmmpy.transport.models import Map1D

__all__ = (
    "StrategyKind",
    "Strategy",
    "EngineConfig",
    "TransportStep",
    "MongeMapEstimate",
    "TerminationReason",
    "IterationRecord",
    "ConvergenceTrace",
    "relative_change",
)


class StrategyKind(enum.Enum):
    """
    A class used to represent how projection directions are chosen.
    ...

    Attributes
    ----------
    PPMM: str
        One SAVE-selected direction per iteration
    RANDOM: str
        One uniformly random direction per iteration
    SLICED: str
        L uniformly random directions per iteration, displacements averaged
    """

    PPMM = "ppmm"
    RANDOM = "random"
    SLICED = "sliced"


@dataclasses.dataclass(frozen=True)
class Strategy:
    """
    A class used to represent a direction strategy.
    ...

    Attributes
    ----------
    kind: StrategyKind
        The direction rule
    slices: int
        Directions per iteration, used by SLICED only
    mean_adjust: bool
        Use the mean gap direction when the whitened means are far apart, used by PPMM only

    Methods
    -------
    parse(method: str, slices: Optional[int], mean_adjust: bool) -> Strategy
        Build a strategy from a method name such as 'ppmm', 'random' or 'sliced10'
    """

    kind: StrategyKind = StrategyKind.PPMM
    slices: int = 1
    mean_adjust: bool = False

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", StrategyKind(self.kind))
        except ValueError:
            raise ConfigError(f"unknown method {self.kind!r}", key="method")
        if int(self.slices) < 1:
            raise ConfigError(f"slices must be at least 1, got {self.slices}", key="slices")
        object.__setattr__(self, "slices", int(self.slices))
        object.__setattr__(self, "mean_adjust", bool(self.mean_adjust))

    @property
    def directions_per_iteration(self) -> int:
        return self.slices if self.kind is StrategyKind.SLICED else 1

    @property
    def label(self) -> str:
        """Method name used in result files."""
        if self.kind is StrategyKind.SLICED:
            return f"sliced{self.slices}"
        if self.kind is StrategyKind.PPMM and self.mean_adjust:
            return "ppmm-mean"
        return self.kind.value

    @classmethod
    def parse(cls, method: str, slices: Optional[int] = None, mean_adjust: bool = False) -> "Strategy":
        method = method.strip().lower()
        if method == "ppmm-mean":
            return cls(StrategyKind.PPMM, 1, True)
        if method.startswith("sliced") and method[len("sliced"):].isdigit():
            return cls(StrategyKind.SLICED, int(method[len("sliced"):]))
        if method == "sliced":
            return cls(StrategyKind.SLICED, slices if slices is not None else 10)
        return cls(method, 1, mean_adjust)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "slices": self.slices, "mean_adjust": self.mean_adjust}


@dataclasses.dataclass(frozen=True)
class EngineConfig:
    """
    A class used to represent the estimator settings.
    ...

    Attributes
    ----------
    max_iterations: int
        Hard iteration limit, at least 1 (default 200)
    tolerance: float
        Relative change of the displacement estimate that counts as converged; 0 disables the check
        (default 1e-5)
    p: int
        Transport cost order (default 2)
    seed: int
        Seed of the random direction stream (default 0)
    ridge: float
        Relative eigenvalue floor of the pooled covariance in SAVE (default 1e-10)
    lookup: str
        1D table method passed to fit_1d_map: 'auto' or 'quantile' (default 'auto')
    noise_stop: float
        Stop PPMM once the leading SAVE eigenvalue and the whitened mean gap are both within this
        multiple of their sampling noise level; 0 disables the check (default 0)
    """

    max_iterations: int = 200
    tolerance: float = 1e-5
    p: int = 2
    seed: int = 0
    ridge: float = 1e-10
    lookup: str = "auto"
    noise_stop: float = 0.0

    def __post_init__(self):
        if int(self.max_iterations) < 1:
            raise ConfigError(f"max_iterations must be at least 1, got {self.max_iterations}", key="max-iter")
        if not float(self.tolerance) >= 0:
            raise ConfigError(f"tolerance must be nonnegative, got {self.tolerance}", key="tol")
        if int(self.p) < 1 or int(self.p) != self.p:
            raise ConfigError(f"p must be a positive integer, got {self.p}", key="p")
        if not float(self.ridge) >= 0:
            raise ConfigError(f"ridge must be nonnegative, got {self.ridge}", key="ridge")
        if self.lookup not in ("auto", "quantile"):
            raise ConfigError(f"lookup must be 'auto' or 'quantile', got {self.lookup!r}", key="lookup")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer, got {self.seed}", key="seed")
        if not float(self.noise_stop) >= 0:
            raise ConfigError(f"noise_stop must be nonnegative, got {self.noise_stop}", key="noise-stop")
        object.__setattr__(self, "max_iterations", int(self.max_iterations))
        object.__setattr__(self, "tolerance", float(self.tolerance))
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "ridge", float(self.ridge))
        object.__setattr__(self, "noise_stop", float(self.noise_stop))

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


@dataclasses.dataclass(frozen=True, eq=False)
class TransportStep:
    """
    A class used to represent one iteration of the estimate: the directions used and their 1D maps.
    A single pair is a projection pursuit step; several pairs are replayed by averaging their
    displacements.
    """

    directions: tuple[Direction, ...]
    maps: tuple[Map1D, ...]

    def __post_init__(self):
        object.__setattr__(self, "directions", tuple(self.directions))
        object.__setattr__(self, "maps", tuple(self.maps))
        if not self.directions or len(self.directions) != len(self.maps):
            raise PPMMError("a step needs one map per direction and at least one direction")


@dataclasses.dataclass(frozen=True, eq=False)
class MongeMapEstimate:
    """
    A class used to represent the estimated transport map as a composition of steps.
    ...

    Attributes
    ----------
    steps: tuple[TransportStep, ...]
        The steps in application order, one per iteration executed
    source_dim: int
        The dimension d of the source space
    strategy: Strategy
        The strategy that produced the steps
    config: EngineConfig
        The settings that produced the steps
    """

    steps: tuple[TransportStep, ...]
    source_dim: int
    strategy: Strategy = dataclasses.field(default_factory=Strategy)
    config: EngineConfig = dataclasses.field(default_factory=EngineConfig)

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        for step in self.steps:
            for direction in step.directions:
                if direction.d != self.source_dim:
                    raise DimensionMismatchError("step direction has the wrong dimension", self.source_dim, direction.d)

    def __len__(self) -> int:
        return len(self.steps)


class TerminationReason(enum.Enum):
    """
    A class used to represent why an estimation run stopped.
    ...

    Attributes
    ----------
    TOLERANCE: str
        The displacement estimate stopped changing
    MAX_ITERATIONS: str
        The iteration limit was reached
    DEGENERATE: str
        No informative first or second moment discrepancy remains
    NOISE_FLOOR: str
        The remaining discrepancy is within the sampling noise of the two samples
    """

    TOLERANCE = "tolerance"
    MAX_ITERATIONS = "max_iterations"
    DEGENERATE = "degenerate"
    NOISE_FLOOR = "noise_floor"


EPS_ABS = 1e-12


def relative_change(previous: float, current: float, iteration: int) -> float:
    """
    |D_k - D_(k-1)| / max(D_(k-1), EPS_ABS) for the displacement estimates of consecutive iterations.
    The first iteration starts from D_0 = 0 and counts as a full change: 1, or 0 when nothing moved.
    """
    if iteration <= 1:
        return 1.0 if current > EPS_ABS else 0.0
    return abs(current - previous) / max(previous, EPS_ABS)


@dataclasses.dataclass(frozen=True)
class IterationRecord:
    iteration: int
    w_hat_displacement: float
    w_hat_direction_proxy: float
    save_lambda1: float
    elapsed_ms: float


TRACE_COLUMNS = ("iteration", "w_hat_displacement", "w_hat_direction_proxy", "save_lambda1", "elapsed_ms")


@dataclasses.dataclass(frozen=True)
class ConvergenceTrace:
    """
    A class used to represent the per-iteration history of an estimation run.
    ...

    Attributes
    ----------
    records: tuple[IterationRecord, ...]
        One record per iteration executed. w_hat_displacement is the paired distance between the
        current and the original source, w_hat_direction_proxy the 1D distance to the target along the
        iteration's direction(s) before the step, save_lambda1 the leading SAVE eigenvalue (-1 for the
        random baselines) and elapsed_ms the wall-clock time since the run started.
    termination_reason: TerminationReason
        Why the run stopped
    """

    records: tuple[IterationRecord, ...]
    termination_reason: TerminationReason

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))
        object.__setattr__(self, "termination_reason", TerminationReason(self.termination_reason))

    @property
    def iterations(self) -> int:
        return len(self.records)

    @property
    def final(self) -> float:
        """The last displacement estimate, 0 for an empty trace."""
        return self.records[-1].w_hat_displacement if self.records else 0.0

    @property
    def total_ms(self) -> float:
        return self.records[-1].elapsed_ms if self.records else 0.0

    def column(self, name: str) -> np.ndarray:
        if name not in TRACE_COLUMNS:
            raise KeyError(name)
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    def iteration_ms(self) -> np.ndarray:
        """Wall-clock time spent in each iteration."""
        return np.diff(np.concatenate([[0.0], self.column("elapsed_ms")]))

    def relative_changes(self) -> np.ndarray:
        """The per-iteration relative change of the displacement estimate that the stopping rule reads."""
        values = self.column("w_hat_displacement")
        previous = np.concatenate([[0.0], values[:-1]])
        return np.array(
            [relative_change(p, c, k) for k, (p, c) in enumerate(zip(previous, values), start=1)], dtype=float
        )

    def gain_ratios(self) -> np.ndarray:
        """lambda_k / lambda_0 from the SAVE eigenvalue column, empty for the random baselines."""
        lam = self.column("save_lambda1")
        if lam.size == 0 or lam[0] <= 0:
            return np.array([])
        return lam / lam[0]
