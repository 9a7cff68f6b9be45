"""
Ground-truth machinery: the closed-form 2-Wasserstein distance between Gaussians and an exact
discrete transport solver for small instances.
"""
import logging

import numpy as np
import scipy.linalg
import scipy.optimize
import scipy.sparse
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from ppmmpy.exceptions import DimensionMismatchError, OracleGuardError, PPMMError
from ppmmpy.linalg import MatrixRoot, matrix_root
from ppmmpy.sample.models import GaussianSpec, Sample

__all__ = (
    "MatrixRoot",
    "matrix_sqrt",
    "bures_term",
    "closed_form_w2",
    "closed_form_w2_spectral",
    "exact_discrete_w2",
    "MAX_CELLS",
)

logger = logging.getLogger("ppmmpy.oracle")
logger.propagate = True

MAX_CELLS = 10_000
# analytically nonnegative quantities that come out below this (relative) are rounding noise
NEGATIVE_NOISE = 1e-8


def matrix_sqrt(matrix: np.ndarray) -> MatrixRoot:
    """Symmetric square root of a symmetric positive semi-definite matrix."""
    return matrix_root(matrix)


def _check_specs(a: GaussianSpec, b: GaussianSpec) -> None:
    if a.d != b.d:
        raise DimensionMismatchError("Gaussians differ in dimension", a.d, b.d)


def _clamp(value: float, scale: float, what: str) -> float:
    if value < 0:
        if value < -NEGATIVE_NOISE * max(scale, 1.0):
            logger.warning("%s is negative beyond rounding (%.3e), clamped to 0", what, value)
        return 0.0
    return value


def bures_term(a: GaussianSpec, b: GaussianSpec) -> float:
    """
    trace(Sa + Sb - 2 (Sa^1/2 Sb Sa^1/2)^1/2), clamped at 0.

    Parameters
    ----------
    a : GaussianSpec
        First Gaussian
    b : GaussianSpec
        Second Gaussian

    Returns
    -------
    float
        The covariance part of the squared distance
    """
    _check_specs(a, b)
    if np.array_equal(a.covariance, b.covariance):
        return 0.0
    root_a = matrix_sqrt(a.covariance).root
    cross = matrix_sqrt(root_a @ b.covariance @ root_a).root
    total = float(np.trace(a.covariance) + np.trace(b.covariance))
    return _clamp(total - 2.0 * float(np.trace(cross)), total, "Bures term")


def closed_form_w2(a: GaussianSpec, b: GaussianSpec) -> float:
    """
    The 2-Wasserstein distance between two Gaussians,
    sqrt(||ma - mb||^2 + trace(Sa + Sb - 2 (Sa^1/2 Sb Sa^1/2)^1/2)).

    Parameters
    ----------
    a : GaussianSpec
        First Gaussian
    b : GaussianSpec
        Second Gaussian

    Raises
    ------
    DimensionMismatchError
        if the dimensions differ

    Returns
    -------
    float
        The distance
    """
    _check_specs(a, b)
    gap = a.mean - b.mean
    return float(np.sqrt(float(gap @ gap) + bures_term(a, b)))


def closed_form_w2_spectral(a: GaussianSpec, b: GaussianSpec) -> float:
    """
    The same distance as closed_form_w2, computed independently: the trace of
    (Sa^1/2 Sb Sa^1/2)^1/2 is the sum of the square roots of the eigenvalues of Sa Sb.
    """
    _check_specs(a, b)
    gap = a.mean - b.mean
    if np.array_equal(a.covariance, b.covariance):
        return float(np.sqrt(float(gap @ gap)))
    eigenvalues = scipy.linalg.eigvals(a.covariance @ b.covariance)
    if not np.all(np.isfinite(eigenvalues)):
        raise PPMMError("eigenvalues of the covariance product are not finite")
    cross = float(np.sum(np.sqrt(np.clip(eigenvalues.real, 0.0, None))))
    total = float(np.trace(a.covariance) + np.trace(b.covariance))
    return float(np.sqrt(float(gap @ gap) + _clamp(total - 2.0 * cross, total, "spectral Bures term")))


def exact_discrete_w2(x: Sample, y: Sample, p: int = 2, *, max_cells: int = MAX_CELLS) -> float:
    """
    Exact optimal transport distance between two weighted empirical measures.

    Equal-size uniform samples are solved as an assignment problem; everything else as the
    transport linear program with the HiGHS solver. Test oracle only.

    Parameters
    ----------
    x : Sample
        Source measure
    y : Sample
        Target measure
    p : int
        Cost order, the ground cost is ||x_i - y_j||^p, by default 2
    max_cells : int
        Size guard on n_x * n_y, by default 10,000

    Raises
    ------
    OracleGuardError
        if n_x * n_y exceeds max_cells
    DimensionMismatchError
        if the dimensions differ
    PPMMError
        if the solver fails

    Returns
    -------
    float
        The p-th root of the optimal cost
    """
    if x.d != y.d:
        raise DimensionMismatchError("samples differ in dimension", x.d, y.d)
    cells = x.n * y.n
    if cells > max_cells:
        raise OracleGuardError(f"exact oracle is limited to {max_cells} cells, got {x.n} x {y.n} = {cells}")
    cost = cdist(x.points, y.points, metric="euclidean") ** p

    if x.n == y.n and x.is_uniform and y.is_uniform:
        rows, cols = linear_sum_assignment(cost)
        total = float(cost[rows, cols].sum() / x.n)
    else:
        a, b = x.weights, y.weights
        rows_constraint = scipy.sparse.kron(scipy.sparse.eye(x.n), np.ones((1, y.n)))
        cols_constraint = scipy.sparse.kron(np.ones((1, x.n)), scipy.sparse.eye(y.n))
        a_eq = scipy.sparse.vstack([rows_constraint, cols_constraint]).tocsr()
        b_eq = np.concatenate([a, b])
        result = scipy.optimize.linprog(
            cost.reshape(-1), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs"
        )
        if not result.success:
            raise PPMMError(f"transport LP failed: {result.message}")
        total = float(result.fun)
    total = _clamp(total, float(cost.max()), "optimal cost")
    return total ** (1.0 / p)
