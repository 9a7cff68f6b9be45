import dataclasses
from typing import Any, Optional

import numpy as np

from ppmmpy.exceptions import DimensionMismatchError, SampleError
from ppmmpy.linalg import is_symmetric, symmetric_eigh

__all__ = ("Sample", "GaussianSpec", "RngState")


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclasses.dataclass(frozen=True, eq=False)
class Sample:
    """
    A class used to represent a weighted point cloud in R^d.
    ...

    Attributes
    ----------
    points: np.ndarray
        The observations, shape (n, d). n >= 2, d >= 1, all finite.
    weights: np.ndarray
        The observation weights, shape (n,). Given weights are normalized to sum to one;
        None means uniform 1/n.

    Methods
    -------
    mean() -> np.ndarray
        Weighted mean of the points
    project(vector: np.ndarray) -> np.ndarray
        The points projected on the given vector
    with_points(points: np.ndarray) -> Sample
        A sample with the same weights and new points
    """

    points: np.ndarray
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        points = np.array(self.points, dtype=float, copy=True)
        if points.ndim == 1:
            points = points[:, None]
        if points.ndim != 2:
            raise SampleError(f"points must be a matrix, got {points.ndim} dimensions")
        n, d = points.shape
        if n < 2:
            raise SampleError(f"a sample needs at least 2 observations, got {n}")
        if d < 1:
            raise SampleError("a sample needs at least 1 feature")
        if not np.all(np.isfinite(points)):
            row, col = np.argwhere(~np.isfinite(points))[0]
            raise SampleError(f"non-finite value at row {row}, column {col}")
        if self.weights is None:
            weights = np.full(n, 1.0 / n)
        else:
            weights = np.array(self.weights, dtype=float, copy=True).reshape(-1)
            if weights.shape[0] != n:
                raise DimensionMismatchError("weights length does not match observations", n, weights.shape[0])
            if not np.all(np.isfinite(weights)):
                raise SampleError("weights must be finite")
            if np.any(weights < 0):
                raise SampleError(f"negative weight at row {int(np.argmax(weights < 0))}")
            if np.count_nonzero(weights > 0) < 2:
                raise SampleError("at least two weights must be strictly positive")
            weights = weights / weights.sum()
        object.__setattr__(self, "points", _readonly(points))
        object.__setattr__(self, "weights", _readonly(weights))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def is_uniform(self) -> bool:
        """True when every observation carries the same weight."""
        return bool(np.all(self.weights == self.weights[0]))

    def mean(self) -> np.ndarray:
        return self.weights @ self.points

    def project(self, vector: np.ndarray) -> np.ndarray:
        vector = np.asarray(vector, dtype=float)
        if vector.shape != (self.d,):
            raise DimensionMismatchError("projection vector has the wrong dimension", self.d, vector.shape)
        return self.points @ vector

    def with_points(self, points: np.ndarray) -> "Sample":
        return Sample(points, self.weights)

    def __repr__(self) -> str:
        return f"Sample(n={self.n}, d={self.d}, uniform={self.is_uniform})"


@dataclasses.dataclass(frozen=True, eq=False)
class GaussianSpec:
    """
    A class used to represent a d-dimensional Gaussian distribution.
    ...

    Attributes
    ----------
    mean: np.ndarray
        The mean vector, shape (d,)
    covariance: np.ndarray
        The symmetric positive-definite covariance, shape (d, d)
    """

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=float, copy=True).reshape(-1)
        covariance = np.array(self.covariance, dtype=float, copy=True)
        if covariance.ndim == 0:
            covariance = covariance.reshape(1, 1)
        if covariance.shape != (mean.shape[0], mean.shape[0]):
            raise DimensionMismatchError(
                "covariance shape does not match the mean", (mean.shape[0], mean.shape[0]), covariance.shape
            )
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(covariance))):
            raise SampleError("Gaussian parameters must be finite")
        if not is_symmetric(covariance, atol=1e-10):
            raise SampleError("covariance is not symmetric")
        values, _ = symmetric_eigh(covariance, context="covariance")
        if values[-1] <= 0.0:
            raise SampleError(f"covariance is not positive definite (smallest eigenvalue {values[-1]:.3e})")
        object.__setattr__(self, "mean", _readonly(mean))
        object.__setattr__(self, "covariance", _readonly(covariance))

    @property
    def d(self) -> int:
        return self.mean.shape[0]


@dataclasses.dataclass(frozen=True)
class RngState:
    """
    A class used to represent the state of the package's random number generator.

    The generator is numpy's PCG64 (permuted congruential generator, 128-bit state, 64-bit output)
    seeded through ``numpy.random.SeedSequence(seed, spawn_key=(stream,))``. Normal variates come from
    ``numpy.random.Generator.standard_normal``. Both are specified bit-for-bit by numpy, so a seed gives
    the same stream on every platform.
    ...

    Attributes
    ----------
    seed: int
        The 64-bit unsigned seed
    stream: int
        Independent sub-stream index for the same seed
    state: Optional[dict]
        PCG64 counter state; None means the freshly seeded state

    Methods
    -------
    generator() -> np.random.Generator
        A generator positioned at this state
    advanced(generator: np.random.Generator) -> RngState
        The state after the given generator has been used
    spawn(stream: int) -> RngState
        A fresh independent stream for the same seed
    """

    seed: int
    stream: int = 0
    state: Optional[dict[str, Any]] = dataclasses.field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not (0 <= int(self.seed) < 2**64):
            raise SampleError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.stream < 0:
            raise SampleError(f"stream must be nonnegative, got {self.stream}")

    def generator(self) -> np.random.Generator:
        bit_generator = np.random.PCG64(np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream),)))
        if self.state is not None:
            bit_generator.state = self.state
        return np.random.Generator(bit_generator)

    def advanced(self, generator: np.random.Generator) -> "RngState":
        return dataclasses.replace(self, state=generator.bit_generator.state)

    def spawn(self, stream: int) -> "RngState":
        return RngState(self.seed, stream)
