"""
One-dimensional optimal transport: the sorted lookup table for equal-size uniform
samples and the interpolated quantile table for weighted or unequal-size samples.
"""
import itertools
import logging
import os
from typing import Optional, Union

import numpy as np

from ppmmpy.exceptions import OracleGuardError, PPMMError
from ppmmpy.transport.models import Extrapolation, Map1D
from ppmmpy.utils import read_csv, write_csv

__all__ = (
    "Extrapolation",
    "Map1D",
    "fit_1d_map",
    "apply_1d_map",
    "transport_cost",
    "exact_assignment_cost",
    "wasserstein_1d",
    "save_map",
    "load_map",
    "ORACLE_MAX_N",
)

logger = logging.getLogger("ppmmpy.transport")
logger.propagate = True

ORACLE_MAX_N = 10
_METHODS = ("auto", "sorted", "quantile")


def _as_weighted(values, weights, name: str):
    values = np.asarray(values, dtype=float).reshape(-1)
    if values.shape[0] == 0:
        raise PPMMError(f"{name} is empty")
    if not np.all(np.isfinite(values)):
        raise PPMMError(f"{name} holds non-finite values")
    if weights is None:
        return values, None
    weights = np.asarray(weights, dtype=float).reshape(-1)
    if weights.shape != values.shape:
        raise PPMMError(f"{name} weights have {weights.shape[0]} entries for {values.shape[0]} values")
    if not np.all(np.isfinite(weights)) or np.any(weights < 0):
        raise PPMMError(f"{name} weights must be finite and nonnegative")
    total = weights.sum()
    if total <= 0:
        raise PPMMError(f"{name} has zero total weight")
    return values, weights / total


def _is_uniform(weights) -> bool:
    return weights is None or bool(np.all(weights == weights[0]))


def _merge_ties(source: np.ndarray, target: np.ndarray):
    # source is sorted; equal sources get the mean of their targets
    unique, inverse, counts = np.unique(source, return_inverse=True, return_counts=True)
    if unique.shape[0] == source.shape[0]:
        return source, target
    merged = np.bincount(inverse, weights=target) / counts
    return unique, merged


def _cumulative(values: np.ndarray, weights: Optional[np.ndarray]):
    order = np.argsort(values, kind="stable")
    values = values[order]
    if weights is None:
        weights = np.full(values.shape[0], 1.0 / values.shape[0])
    else:
        weights = weights[order]
    positive = weights > 0
    values, weights = values[positive], weights[positive]
    levels = np.cumsum(weights)
    levels /= levels[-1]
    return values, levels


def fit_1d_map(
    u,
    v,
    u_weights: Optional[np.ndarray] = None,
    v_weights: Optional[np.ndarray] = None,
    *,
    extrapolation: Extrapolation = Extrapolation.CLAMP,
    method: str = "auto",
) -> Map1D:
    """
    Fit the monotone transport map from the empirical measure of u to that of v.

    With equal sizes and uniform weights the i-th smallest u maps to the i-th smallest v. Otherwise
    both quantile functions are the linear interpolations of the sorted values at their cumulative
    weights, the knots are the union of both cumulative-weight levels, and each knot pairs the
    u-quantile with the v-quantile at that level.

    Parameters
    ----------
    u : array-like
        Source values
    v : array-like
        Target values
    u_weights : Optional[np.ndarray]
        Source weights, uniform when None
    v_weights : Optional[np.ndarray]
        Target weights, uniform when None
    extrapolation : Extrapolation
        Rule stored in the map, by default CLAMP
    method : str
        'auto', 'sorted' or 'quantile'; 'auto' picks 'sorted' for equal-size uniform samples

    Raises
    ------
    PPMMError
        if a sample is empty, non-finite or has zero total weight, or 'sorted' is requested for
        samples it does not apply to

    Returns
    -------
    Map1D
        The fitted lookup table
    """
    if method not in _METHODS:
        raise PPMMError(f"unknown 1D fitting method {method!r}")
    u, u_weights = _as_weighted(u, u_weights, "source sample")
    v, v_weights = _as_weighted(v, v_weights, "target sample")
    sortable = u.shape[0] == v.shape[0] and _is_uniform(u_weights) and _is_uniform(v_weights)
    if method == "sorted" and not sortable:
        raise PPMMError("the sorted lookup table needs equal sizes and uniform weights")

    if method == "sorted" or (method == "auto" and sortable):
        source = np.sort(u, kind="stable")
        target = np.sort(v, kind="stable")
    else:
        us, cu = _cumulative(u, u_weights)
        vs, cv = _cumulative(v, v_weights)
        levels = np.concatenate([cu, cv])
        order = np.argsort(levels, kind="stable")
        levels = levels[order]
        source = np.interp(levels, cu, us)
        target = np.interp(levels, cv, vs)
        # the union is sorted by level, so both columns are monotone up to rounding
        source = np.maximum.accumulate(source)
    source, target = _merge_ties(source, target)
    target = np.maximum.accumulate(target)
    return Map1D(source, target, extrapolation)


def apply_1d_map(map: Map1D, t: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """
    Evaluate a lookup table by piecewise-linear interpolation.

    Inputs equal to a source knot return exactly the paired target knot.

    Parameters
    ----------
    map : Map1D
        The lookup table
    t : Union[float, np.ndarray]
        Scalar or array of inputs

    Returns
    -------
    Union[float, np.ndarray]
        Values of the same shape as t
    """
    arr = np.asarray(t, dtype=float)
    source, target = map.source_knots, map.target_knots
    out = np.interp(arr, source, target)
    if map.extrapolation is Extrapolation.LINEAR and map.size >= 2:
        low_slope = (target[1] - target[0]) / (source[1] - source[0])
        high_slope = (target[-1] - target[-2]) / (source[-1] - source[-2])
        out = np.where(arr < source[0], target[0] + low_slope * (arr - source[0]), out)
        out = np.where(arr > source[-1], target[-1] + high_slope * (arr - source[-1]), out)
    if arr.ndim == 0:
        return float(out)
    return out


def transport_cost(map: Map1D, u, u_weights: Optional[np.ndarray] = None, p: float = 2) -> float:
    """The cost (sum_i w_i |u_i - map(u_i)|^p)^(1/p) the map induces on the sample u."""
    u, u_weights = _as_weighted(u, u_weights, "source sample")
    if u_weights is None:
        u_weights = np.full(u.shape[0], 1.0 / u.shape[0])
    moved = np.abs(apply_1d_map(map, u) - u)
    return float(np.sum(u_weights * moved**p) ** (1.0 / p))


def exact_assignment_cost(u, v, p: float = 2) -> float:
    """
    Exact optimal assignment cost between two equal-size uniform samples by enumerating all
    bijections. Test oracle only.

    Parameters
    ----------
    u : array-like
        Source values
    v : array-like
        Target values, same length
    p : float
        Cost order, by default 2

    Raises
    ------
    OracleGuardError
        if there are more than 10 values
    PPMMError
        if the sizes differ

    Returns
    -------
    float
        (min over sigma of mean |u_i - v_sigma(i)|^p)^(1/p)
    """
    u = np.asarray(u, dtype=float).reshape(-1)
    v = np.asarray(v, dtype=float).reshape(-1)
    if u.shape != v.shape or u.shape[0] == 0:
        raise PPMMError("the assignment oracle needs two non-empty samples of equal size")
    n = u.shape[0]
    if n > ORACLE_MAX_N:
        raise OracleGuardError(f"assignment oracle is limited to n <= {ORACLE_MAX_N}, got {n}")
    cost = np.abs(u[:, None] - v[None, :]) ** p
    permutations = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
    totals = cost[np.arange(n), permutations].sum(axis=1)
    return float((totals.min() / n) ** (1.0 / p))


def wasserstein_1d(u, v, u_weights: Optional[np.ndarray] = None, v_weights: Optional[np.ndarray] = None, p: float = 2) -> float:
    """
    The p-Wasserstein distance between two weighted empirical measures on the line, by integrating
    the difference of their (right-continuous, piecewise-constant) quantile functions.

    Parameters
    ----------
    u : array-like
        First sample
    v : array-like
        Second sample
    u_weights : Optional[np.ndarray]
        Weights of u, uniform when None
    v_weights : Optional[np.ndarray]
        Weights of v, uniform when None
    p : float
        Cost order, by default 2

    Returns
    -------
    float
        The distance (the p-th root of the optimal cost)
    """
    u, u_weights = _as_weighted(u, u_weights, "first sample")
    v, v_weights = _as_weighted(v, v_weights, "second sample")
    us, cu = _cumulative(u, u_weights)
    vs, cv = _cumulative(v, v_weights)
    qs = np.sort(np.concatenate([cu, cv]), kind="stable")
    u_q = us[np.clip(np.searchsorted(cu, qs), 0, us.shape[0] - 1)]
    v_q = vs[np.clip(np.searchsorted(cv, qs), 0, vs.shape[0] - 1)]
    delta = np.diff(np.concatenate([[0.0], qs]))
    cost = float(np.sum(delta * np.abs(u_q - v_q) ** p))
    return max(cost, 0.0) ** (1.0 / p)


def save_map(map: Map1D, path: Union[str, os.PathLike]) -> None:
    """Write a lookup table as a two-column CSV with an extrapolation comment line."""
    write_csv(
        path,
        ["source_knot", "target_knot"],
        ([float(s), float(t)] for s, t in zip(map.source_knots, map.target_knots)),
        preamble=f"extrapolation={map.extrapolation.value}",
    )


def load_map(path: Union[str, os.PathLike]) -> Map1D:
    """Read a lookup table written by save_map."""
    header, rows, comments = read_csv(path)
    if header != ["source_knot", "target_knot"]:
        raise PPMMError(f"{os.fspath(path)} is not a map file (header {header})")
    extrapolation = Extrapolation.CLAMP
    for comment in comments:
        key, _, value = comment.partition("=")
        if key.strip() == "extrapolation":
            extrapolation = Extrapolation(value.strip())
    knots = np.array([[float(a), float(b)] for a, b in rows]).reshape(-1, 2)
    return Map1D(knots[:, 0], knots[:, 1], extrapolation)
