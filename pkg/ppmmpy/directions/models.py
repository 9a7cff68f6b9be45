import dataclasses

import numpy as np

from ppmmpy.exceptions import PPMMError

__all__ = ("Direction", "SaveDecomposition")

UNIT_TOL = 1e-10
# numerical rank tolerance of the SAVE matrix
RANK_TOL = 1e-8


@dataclasses.dataclass(frozen=True, eq=False)
class Direction:
    """
    A class used to represent a projection direction on the unit sphere.
    ...

    Attributes
    ----------
    vector: np.ndarray
        Unit vector in R^d (norm 1 within 1e-10)
    """

    vector: np.ndarray

    def __post_init__(self):
        vector = np.array(self.vector, dtype=float, copy=True).reshape(-1)
        if vector.shape[0] < 1 or not np.all(np.isfinite(vector)):
            raise PPMMError("direction must be a finite non-empty vector")
        if abs(np.linalg.norm(vector) - 1.0) > UNIT_TOL:
            raise PPMMError(f"direction must have unit norm, got {np.linalg.norm(vector):.12g}")
        vector.setflags(write=False)
        object.__setattr__(self, "vector", vector)

    @classmethod
    def from_vector(cls, vector: np.ndarray) -> "Direction":
        """Normalize a nonzero vector into a direction."""
        vector = np.asarray(vector, dtype=float).reshape(-1)
        norm = np.linalg.norm(vector)
        if not np.isfinite(norm) or norm == 0.0:
            raise PPMMError("cannot normalize a zero or non-finite vector")
        return cls(vector / norm)

    @property
    def d(self) -> int:
        return self.vector.shape[0]

    def __neg__(self) -> "Direction":
        return Direction(-self.vector)

    def __repr__(self) -> str:
        return f"Direction({np.array2string(self.vector, precision=4)})"


@dataclasses.dataclass(frozen=True, eq=False)
class SaveDecomposition:
    """
    A class used to represent the intermediate quantities of one SAVE direction selection.
    ...

    Attributes
    ----------
    pooled_covariance: np.ndarray
        Covariance of the pooled sample about its pooled mean
    whitener: np.ndarray
        Symmetric inverse square root of the pooled covariance (pseudo-inverse on null directions)
    save_matrix: np.ndarray
        ((S1 - P)^2 + (S2 - P)^2) / 4 with P the projector onto the whitened range (the identity when
        the pooled covariance has full rank)
    eigenvalues: np.ndarray
        Eigenvalues of save_matrix, descending
    leading_eigenvector: np.ndarray
        Leading eigenvector of save_matrix before unwhitening
    degenerate: bool
        True when the leading eigenvalue is below 1e-8 * d
    whitened_mean_gap: float
        Norm of the difference of the whitened group means
    max_whitened_std: float
        Largest whitened coordinate standard deviation of either group
    noise_eigenvalue: float
        Leading SAVE eigenvalue expected when both groups come from one distribution, r v / 2 with r the
        whitened rank and v = 1/n1 + 1/n2 over the effective sample sizes
    noise_gap: float
        Whitened mean gap expected from one distribution, sqrt(r v)
    """

    pooled_covariance: np.ndarray
    whitener: np.ndarray
    save_matrix: np.ndarray
    eigenvalues: np.ndarray
    leading_eigenvector: np.ndarray
    degenerate: bool
    whitened_mean_gap: float
    max_whitened_std: float
    noise_eigenvalue: float = 0.0
    noise_gap: float = 0.0

    @property
    def leading_eigenvalue(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def mean_shift(self) -> bool:
        """True when the whitened mean gap exceeds half the largest whitened group standard deviation."""
        return self.whitened_mean_gap > 0.5 * self.max_whitened_std

    def within_noise(self, factor: float) -> bool:
        """
        True when neither moment discrepancy stands out from sampling noise: the leading eigenvalue is at
        most factor^2 times noise_eigenvalue and the whitened mean gap at most factor times noise_gap.
        """
        return (
            self.leading_eigenvalue <= factor**2 * self.noise_eigenvalue
            and self.whitened_mean_gap <= factor * self.noise_gap
        )

    @property
    def rank(self) -> int:
        """Numerical rank of the SAVE matrix."""
        return int(np.count_nonzero(self.eigenvalues > RANK_TOL))
