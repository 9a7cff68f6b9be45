"""
Sample types, CSV ingestion and synthetic Gaussian sampling.
"""
import csv
import logging
import math
import os
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from ppmmpy.exceptions import SampleError, SampleFileError
from ppmmpy.linalg import matrix_root
from ppmmpy.sample.models import GaussianSpec, RngState, Sample
from ppmmpy.utils import write_csv

__all__ = (
    "Sample",
    "GaussianSpec",
    "RngState",
    "load_sample",
    "save_sample",
    "sample_gaussian",
    "ar1_covariance",
    "random_weights",
    "DEFAULT_WEIGHT_COLUMN",
)

logger = logging.getLogger("ppmmpy.sample")
logger.propagate = True

DEFAULT_WEIGHT_COLUMN = "weight"


def load_sample(path: Union[str, os.PathLike], weight_column: Optional[str] = None) -> Sample:
    """
    Read a sample from a CSV file with a header row.

    Every column except the weight column is a feature, in file order.

    Parameters
    ----------
    path : Union[str, os.PathLike]
        The CSV file, UTF-8, comma separated, '.' as decimal point
    weight_column : Optional[str]
        The name of the weight column. When None a column named 'weight' is used if present,
        otherwise the weights are uniform.

    Raises
    ------
    SampleFileError
        if the file is malformed, holds a non-finite value or a negative weight, or has fewer than 2 rows

    Returns
    -------
    Sample
        The sample with normalized weights
    """
    path = os.fspath(path)
    try:
        with open(path, "r", encoding="utf-8-sig", newline="") as fh:
            rows = [row for row in csv.reader(fh) if row and any(cell.strip() for cell in row)]
    except csv.Error as err:
        raise SampleFileError(f"malformed CSV: {err}", path) from err
    except UnicodeDecodeError as err:
        raise SampleFileError(f"malformed CSV: not UTF-8 text (byte {err.start}: {err.reason})", path) from err
    if not rows:
        raise SampleFileError("empty file, a header row is required", path)
    header = [name.strip() for name in rows[0]]
    if len(set(header)) != len(header):
        raise SampleFileError("duplicate column names in header", path)
    if weight_column is None and DEFAULT_WEIGHT_COLUMN in header:
        weight_column = DEFAULT_WEIGHT_COLUMN
    if weight_column is not None and weight_column not in header:
        raise SampleFileError(f"weight column {weight_column!r} not found", path)
    weight_index = header.index(weight_column) if weight_column is not None else None
    feature_index = [i for i in range(len(header)) if i != weight_index]
    if not feature_index:
        raise SampleFileError("no feature columns", path)
    data = rows[1:]
    if len(data) < 2:
        raise SampleFileError(f"a sample needs at least 2 rows, got {len(data)}", path)

    values = np.empty((len(data), len(header)))
    for r, row in enumerate(data, start=1):
        if len(row) != len(header):
            raise SampleFileError(
                f"expected {len(header)} fields, got {len(row)}", path, row=r
            )
        for c, cell in enumerate(row):
            try:
                value = float(cell)
            except ValueError:
                raise SampleFileError(f"cannot parse {cell.strip()!r} as a number", path, row=r, column=header[c])
            if not math.isfinite(value):
                raise SampleFileError(f"non-finite value {cell.strip()!r}", path, row=r, column=header[c])
            if c == weight_index and value < 0:
                raise SampleFileError(f"negative weight {value!r}", path, row=r, column=header[c])
            values[r - 1, c] = value

    weights = values[:, weight_index] if weight_index is not None else None
    try:
        sample = Sample(values[:, feature_index], weights)
    except SampleError as err:
        raise SampleFileError(err.message, path) from err
    logger.debug("loaded %s: n=%d d=%d", path, sample.n, sample.d)
    return sample


def save_sample(
    sample: Sample,
    path: Union[str, os.PathLike],
    *,
    columns: Optional[Sequence[str]] = None,
    weight_column: str = DEFAULT_WEIGHT_COLUMN,
) -> None:
    """
    Write a sample to CSV, features first, then the normalized weights.

    Parameters
    ----------
    sample : Sample
        The sample to write
    path : Union[str, os.PathLike]
        The target file
    columns : Optional[Sequence[str]]
        Feature column names, by default x1..xd
    weight_column : str
        The weight column name, by default 'weight'
    """
    names: List[str] = list(columns) if columns is not None else [f"x{j + 1}" for j in range(sample.d)]
    if len(names) != sample.d:
        raise SampleError(f"{len(names)} column names given for {sample.d} features")
    rows = (
        [float(v) for v in point] + [float(w)]
        for point, w in zip(sample.points, sample.weights)
    )
    write_csv(path, names + [weight_column], rows)


def ar1_covariance(d: int, rho: float) -> np.ndarray:
    """
    The AR(1) correlation matrix with entries rho ** |i - j|.

    Parameters
    ----------
    d : int
        The dimension
    rho : float
        The correlation, |rho| < 1

    Raises
    ------
    SampleError
        if |rho| >= 1 or d < 1

    Returns
    -------
    np.ndarray
        The d x d symmetric positive-definite matrix
    """
    if d < 1:
        raise SampleError(f"dimension must be positive, got {d}")
    if not abs(rho) < 1:
        raise SampleError(f"|rho| must be below 1, got {rho}")
    index = np.arange(d)
    return float(rho) ** np.abs(index[:, None] - index[None, :]).astype(float)


def sample_gaussian(spec: GaussianSpec, n: int, rng: RngState) -> Tuple[Sample, RngState]:
    """
    Draw n i.i.d. rows mean + L z with L the symmetric square root of the covariance.

    Parameters
    ----------
    spec : GaussianSpec
        The distribution
    n : int
        Number of draws, at least 2
    rng : RngState
        The generator state to draw from

    Returns
    -------
    Tuple[Sample, RngState]
        The uniform-weight sample and the advanced generator state
    """
    if n < 2:
        raise SampleError(f"a sample needs at least 2 observations, got {n}")
    root = matrix_root(spec.covariance, require_pd=True).root
    generator = rng.generator()
    z = generator.standard_normal((n, spec.d))
    return Sample(spec.mean + z @ root), rng.advanced(generator)


def random_weights(n: int, rng: RngState, *, low: float = 0.5, high: float = 1.5) -> Tuple[np.ndarray, RngState]:
    """I.i.d. Uniform(low, high) observation weights and the advanced generator state."""
    if not 0 <= low < high:
        raise SampleError(f"invalid weight range [{low}, {high})")
    generator = rng.generator()
    return generator.uniform(low, high, size=n), rng.advanced(generator)
