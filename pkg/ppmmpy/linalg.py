"""
Symmetric eigendecomposition helpers shared by the sampler, the SAVE direction
selection and the Gaussian oracle. Every matrix root in the package goes through
:func:`matrix_root`.
"""
import dataclasses
import logging
from typing import Tuple

import numpy as np

from ppmmpy.exceptions import PPMMError, SampleError

__all__ = (
    "MatrixRoot",
    "symmetric_eigh",
    "matrix_root",
    "fix_sign",
    "leading_eigenvector",
    "is_symmetric",
)

logger = logging.getLogger("ppmmpy.linalg")
logger.propagate = True

# relative floor below which eigenvalues are treated as zero when taking roots
ROOT_CLAMP = 1e-12


@dataclasses.dataclass(frozen=True)
class MatrixRoot:
    """
    A class used to represent the symmetric square root of a symmetric positive (semi-)definite matrix.
    ...

    Attributes
    ----------
    input: np.ndarray
        The matrix whose root was taken
    root: np.ndarray
        The symmetric matrix with root @ root == input
    floor_applied: bool
        True when negative or tiny eigenvalues were clamped to zero
    """

    input: np.ndarray
    root: np.ndarray
    floor_applied: bool

    def residual(self) -> float:
        """Largest absolute entry of root @ root - input."""
        return float(np.max(np.abs(self.root @ self.root - self.input)))


def is_symmetric(matrix: np.ndarray, atol: float = 1e-10) -> bool:
    matrix = np.asarray(matrix)
    return (
        matrix.ndim == 2
        and matrix.shape[0] == matrix.shape[1]
        and bool(np.all(np.abs(matrix - matrix.T) <= atol))
    )


def symmetric_eigh(matrix: np.ndarray, *, context: str = "matrix") -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigendecomposition of a symmetric matrix with eigenvalues in descending order.

    Parameters
    ----------
    matrix: np.ndarray
        A symmetric matrix. Only the symmetric part is used.
    context: str (default: "matrix")
        Name of the matrix, used in the error message

    Returns
    -------
    Tuple[np.ndarray, np.ndarray]
        The eigenvalues (descending) and the eigenvectors as columns

    Raises
    ------
    PPMMError
        If the decomposition fails or the matrix holds non-finite values
    """
    matrix = np.asarray(matrix, dtype=float)
    if not np.all(np.isfinite(matrix)):
        raise PPMMError(f"eigendecomposition of {context} failed: non-finite entries")
    sym = (matrix + matrix.T) / 2.0
    try:
        values, vectors = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as err:
        raise PPMMError(f"eigendecomposition of {context} failed: {err}") from err
    return values[::-1], vectors[:, ::-1]


def matrix_root(matrix: np.ndarray, *, inverse: bool = False, require_pd: bool = False) -> MatrixRoot:
    """
    Symmetric square root (or inverse square root) by eigendecomposition.

    Eigenvalues below ROOT_CLAMP times the largest one are clamped to zero; for the inverse root the
    clamped directions are left out (pseudo-inverse root).

    Parameters
    ----------
    matrix: np.ndarray
        A symmetric positive semi-definite matrix
    inverse: bool (default: False)
        Return the inverse square root instead
    require_pd: bool (default: False)
        Raise SampleError when the smallest eigenvalue is not strictly positive

    Returns
    -------
    MatrixRoot
        The root and whether a clamp was applied
    """
    values, vectors = symmetric_eigh(matrix, context="matrix root input")
    scale = max(abs(values[0]), abs(values[-1]), 0.0)
    if require_pd and values[-1] <= 0.0:
        raise SampleError(
            f"matrix is not positive definite (smallest eigenvalue {values[-1]:.3e})"
        )
    floor = ROOT_CLAMP * scale
    keep = values > floor
    floor_applied = bool(np.any(~keep)) or bool(np.any(values < 0.0))
    clipped = np.where(keep, values, 0.0)
    if inverse:
        scaled = np.zeros_like(clipped)
        scaled[keep] = 1.0 / np.sqrt(clipped[keep])
    else:
        scaled = np.sqrt(clipped)
    root = (vectors * scaled) @ vectors.T
    root = (root + root.T) / 2.0
    return MatrixRoot(input=np.asarray(matrix, dtype=float), root=root, floor_applied=floor_applied)


def fix_sign(vector: np.ndarray) -> np.ndarray:
    """Flip the vector so that its largest-magnitude coordinate is positive (first one on ties)."""
    vector = np.asarray(vector, dtype=float)
    pivot = int(np.argmax(np.abs(vector)))
    if vector[pivot] < 0:
        return -vector
    return vector


def leading_eigenvector(values: np.ndarray, vectors: np.ndarray, *, tie_tol: float = 1e-10) -> np.ndarray:
    """
    Deterministic leading eigenvector.

    Among the eigenvectors whose eigenvalue is within tie_tol of the largest one, each is sign-fixed
    and the lexicographically largest is returned.

    Parameters
    ----------
    values: np.ndarray
        Eigenvalues in descending order
    vectors: np.ndarray
        Eigenvectors as columns, same order
    tie_tol: float (default: 1e-10)
        Tolerance for treating eigenvalues as tied

    Returns
    -------
    np.ndarray
        The chosen unit eigenvector
    """
    candidates = [fix_sign(vectors[:, i]) for i in range(len(values)) if values[0] - values[i] <= tie_tol]
    best = candidates[0]
    for candidate in candidates[1:]:
        for a, b in zip(candidate, best):
            if a != b:
                if a > b:
                    best = candidate
                break
    return best
