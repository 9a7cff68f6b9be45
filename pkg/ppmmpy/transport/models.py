import dataclasses
import enum

import numpy as np

from ppmmpy.exceptions import PPMMError

__all__ = ("Extrapolation", "Map1D")


class Extrapolation(enum.Enum):
    """
    How a one-dimensional map treats inputs outside its knot range.
    ...

    Attributes
    ----------
    CLAMP: str
        Inputs below (above) the first (last) knot map to the first (last) target
    LINEAR: str
        Inputs outside the knot range follow the slope of the nearest end segment
    """

    CLAMP = "clamp"
    LINEAR = "linear"


@dataclasses.dataclass(frozen=True, eq=False)
class Map1D:
    """
    A class used to represent a monotone one-dimensional transport map as a lookup table.
    ...

    Attributes
    ----------
    source_knots: np.ndarray
        Strictly ascending source values
    target_knots: np.ndarray
        Non-decreasing target values, one per source knot
    extrapolation: Extrapolation
        Rule for inputs outside [source_knots[0], source_knots[-1]]
    """

    source_knots: np.ndarray
    target_knots: np.ndarray
    extrapolation: Extrapolation = Extrapolation.CLAMP

    def __post_init__(self):
        source = np.array(self.source_knots, dtype=float, copy=True).reshape(-1)
        target = np.array(self.target_knots, dtype=float, copy=True).reshape(-1)
        if source.shape != target.shape:
            raise PPMMError(f"knot vectors differ in length ({source.shape[0]} and {target.shape[0]})")
        if source.shape[0] < 1:
            raise PPMMError("a map needs at least one knot")
        if not (np.all(np.isfinite(source)) and np.all(np.isfinite(target))):
            raise PPMMError("knots must be finite")
        if np.any(np.diff(source) <= 0):
            raise PPMMError("source knots must be strictly ascending")
        if np.any(np.diff(target) < 0):
            raise PPMMError("target knots must be non-decreasing")
        source.setflags(write=False)
        target.setflags(write=False)
        object.__setattr__(self, "source_knots", source)
        object.__setattr__(self, "target_knots", target)
        object.__setattr__(self, "extrapolation", Extrapolation(self.extrapolation))

    @property
    def size(self) -> int:
        return self.source_knots.shape[0]

    def with_extrapolation(self, extrapolation: Extrapolation) -> "Map1D":
        return Map1D(self.source_knots, self.target_knots, extrapolation)
