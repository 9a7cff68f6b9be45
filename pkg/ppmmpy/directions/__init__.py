"""
Projection direction selection: SAVE for the projection pursuit estimator, the
first-order mean gap fallback, and uniform random directions for the baselines.
"""
import logging
import os
from typing import Optional, Tuple, Union

import numpy as np

from ppmmpy.directions.models import Direction, SaveDecomposition
from ppmmpy.exceptions import DegenerateSampleError, DimensionMismatchError
from ppmmpy.linalg import fix_sign, leading_eigenvector, symmetric_eigh
from ppmmpy.sample.models import RngState, Sample
from ppmmpy.utils import write_csv

__all__ = (
    "Direction",
    "SaveDecomposition",
    "weighted_covariance",
    "save_direction",
    "mean_gap_direction",
    "random_sphere_direction",
    "save_decomposition",
    "DEFAULT_RIDGE",
)

logger = logging.getLogger("ppmmpy.directions")
logger.propagate = True

DEFAULT_RIDGE = 1e-10
DEGENERATE_EIGENVALUE = 1e-8
# pooled covariance counts as zero below this times the squared coordinate scale
ZERO_COVARIANCE = 1e-24


def _covariance(points: np.ndarray, weights: np.ndarray, center: np.ndarray) -> np.ndarray:
    centered = points - center
    cov = (centered * weights[:, None]).T @ centered
    return (cov + cov.T) / 2.0


def weighted_covariance(sample: Sample, center: np.ndarray) -> np.ndarray:
    """
    Weighted second moment of a sample about a given center.

    Parameters
    ----------
    sample : Sample
        The sample, weights already normalized
    center : np.ndarray
        The center, shape (d,)

    Raises
    ------
    DimensionMismatchError
        if center does not have dimension d

    Returns
    -------
    np.ndarray
        sum_i w_i (x_i - center)(x_i - center)^T, symmetric
    """
    center = np.asarray(center, dtype=float).reshape(-1)
    if center.shape[0] != sample.d:
        raise DimensionMismatchError("center has the wrong dimension", sample.d, center.shape[0])
    return _covariance(sample.points, sample.weights, center)


def _check_pair(x: Sample, y: Sample) -> None:
    if x.d != y.d:
        raise DimensionMismatchError("samples differ in dimension", x.d, y.d)


def save_direction(x: Sample, y: Sample, ridge: float = DEFAULT_RIDGE) -> Tuple[Direction, SaveDecomposition]:
    """
    Select the most informative projection direction between two samples with SAVE.

    The pooled sample gives each group half of the mass. Its covariance about the pooled mean is
    whitened by the symmetric inverse root, the group covariances are taken about the whitened group
    means, and the leading eigenvector of ((S1 - I)^2 + (S2 - I)^2) / 4 is mapped back through the
    whitener and normalized. Pooled eigenvalues at or below ridge times the largest one are null
    directions: they are dropped from the whitener and I becomes the projector on the kept range.

    Parameters
    ----------
    x : Sample
        The current source sample
    y : Sample
        The target sample
    ridge : float
        Relative eigenvalue floor of the pooled covariance, by default 1e-10

    Raises
    ------
    DimensionMismatchError
        if the samples differ in dimension
    DegenerateSampleError
        if the pooled covariance is numerically zero
    PPMMError
        if an eigendecomposition fails

    Returns
    -------
    Tuple[Direction, SaveDecomposition]
        The unit direction (largest-magnitude coordinate positive) and the decomposition
    """
    _check_pair(x, y)
    if ridge < 0:
        raise ValueError(f"ridge must be nonnegative, got {ridge}")
    d = x.d
    points = np.vstack([x.points, y.points])
    weights = np.concatenate([x.weights, y.weights]) / 2.0
    pooled_mean = weights @ points
    pooled = _covariance(points, weights, pooled_mean)

    values, vectors = symmetric_eigh(pooled, context="pooled covariance")
    scale = max(1.0, float(np.max(np.abs(points)))) ** 2
    if values[0] <= ZERO_COVARIANCE * scale:
        raise DegenerateSampleError("pooled covariance is numerically zero")
    keep = values > ridge * values[0]
    kept = vectors[:, keep]
    whitener = (kept / np.sqrt(values[keep])) @ kept.T
    whitener = (whitener + whitener.T) / 2.0
    projector = kept @ kept.T

    xw = x.points @ whitener
    yw = y.points @ whitener
    mean_x = x.weights @ xw
    mean_y = y.weights @ yw
    cov_x = _covariance(xw, x.weights, mean_x)
    cov_y = _covariance(yw, y.weights, mean_y)
    s1 = cov_x - projector
    s2 = cov_y - projector
    save = (s1 @ s1 + s2 @ s2) / 4.0
    save = (save + save.T) / 2.0

    eigenvalues, eigenvectors = symmetric_eigh(save, context="SAVE matrix")
    xi = leading_eigenvector(eigenvalues, eigenvectors)
    raw = whitener @ xi
    if np.linalg.norm(raw) <= np.finfo(float).eps:
        raw = xi
    direction = Direction.from_vector(fix_sign(raw))

    variances = np.concatenate([np.diag(cov_x), np.diag(cov_y)])
    # the difference of two group covariances has entry variance v, so its spectral norm sits near
    # 2 sqrt(r v) and the leading SAVE eigenvalue near norm^2 / 8
    v = float(np.sum(x.weights**2) + np.sum(y.weights**2))
    r = int(np.count_nonzero(keep))
    decomposition = SaveDecomposition(
        pooled_covariance=pooled,
        whitener=whitener,
        save_matrix=save,
        eigenvalues=eigenvalues,
        leading_eigenvector=xi,
        degenerate=bool(eigenvalues[0] < DEGENERATE_EIGENVALUE * d),
        whitened_mean_gap=float(np.linalg.norm(mean_y - mean_x)),
        max_whitened_std=float(np.sqrt(max(float(np.max(variances)), 0.0))),
        noise_eigenvalue=r * v / 2.0,
        noise_gap=float(np.sqrt(r * v)),
    )
    logger.debug(
        "SAVE lambda1=%.6g rank=%d degenerate=%s", decomposition.leading_eigenvalue,
        decomposition.rank, decomposition.degenerate,
    )
    return direction, decomposition


def mean_gap_direction(x: Sample, y: Sample, rel_tol: float = 1e-8) -> Optional[Direction]:
    """
    First-order direction: the normalized difference of the weighted means.

    Parameters
    ----------
    x : Sample
        The current source sample
    y : Sample
        The target sample
    rel_tol : float
        The gap is negligible at or below rel_tol times the scale of the data, by default 1e-8

    Returns
    -------
    Optional[Direction]
        The direction from mean(x) to mean(y), or None when the gap is negligible
    """
    _check_pair(x, y)
    mean_x, mean_y = x.mean(), y.mean()
    gap = mean_y - mean_x
    spread = np.sqrt(
        np.trace(_covariance(x.points, x.weights, mean_x)) + np.trace(_covariance(y.points, y.weights, mean_y))
    )
    reference = max(float(np.linalg.norm(mean_x)), float(np.linalg.norm(mean_y)), float(spread))
    if np.linalg.norm(gap) <= rel_tol * max(reference, np.finfo(float).tiny):
        return None
    return Direction.from_vector(gap)


def random_sphere_direction(d: int, rng: RngState) -> Tuple[Direction, RngState]:
    """
    A direction drawn uniformly from the unit sphere in R^d.

    Parameters
    ----------
    d : int
        The dimension, at least 1
    rng : RngState
        The generator state

    Returns
    -------
    Tuple[Direction, RngState]
        The direction and the advanced generator state
    """
    if d < 1:
        raise ValueError(f"dimension must be positive, got {d}")
    generator = rng.generator()
    while True:
        z = generator.standard_normal(d)
        if np.linalg.norm(z) > 0.0:
            break
    return Direction.from_vector(z), rng.advanced(generator)


def save_decomposition(decomposition: SaveDecomposition, path: Union[str, os.PathLike]) -> None:
    """Write the SAVE eigenvalues to CSV as a single row."""
    values = decomposition.eigenvalues
    write_csv(path, [f"lambda{i + 1}" for i in range(values.shape[0])], [[float(v) for v in values]])
