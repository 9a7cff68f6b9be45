"""
The projection pursuit Monge map estimator and its random and sliced baselines.
"""
import logging
import os
import time
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from ppmmpy.directions import (
    Direction,
    mean_gap_direction,
    random_sphere_direction,
    save_direction,
)
from ppmmpy.engine.models import (
    TRACE_COLUMNS,
    ConvergenceTrace,
    EngineConfig,
    IterationRecord,
    MongeMapEstimate,
    Strategy,
    StrategyKind,
    TerminationReason,
    TransportStep,
    relative_change,
)
from ppmmpy.exceptions import (
    DegenerateSampleError,
    DimensionMismatchError,
    NonFiniteError,
    PPMMError,
)
from ppmmpy.sample.models import RngState, Sample
from ppmmpy.transport import (
    Extrapolation,
    Map1D,
    apply_1d_map,
    fit_1d_map,
    load_map,
    save_map,
    wasserstein_1d,
)
from ppmmpy.utils import json_dumps, json_loads, atomic_write, read_csv, write_csv

__all__ = (
    "Strategy",
    "StrategyKind",
    "EngineConfig",
    "TransportStep",
    "MongeMapEstimate",
    "TerminationReason",
    "IterationRecord",
    "ConvergenceTrace",
    "empirical_wasserstein",
    "ppmm_step",
    "sliced_step",
    "fit",
    "apply_map",
    "save_trace",
    "load_trace",
    "save_estimate",
    "load_estimate",
)

# create logger object
logger = logging.getLogger("ppmmpy.engine")
logger.propagate = True

RNG_STREAM = 1
MANIFEST = "manifest.json"


def empirical_wasserstein(x: Sample, y: Sample, p: int = 2) -> float:
    """
    Paired transport cost between two samples whose rows correspond.

    Parameters
    ----------
    x : Sample
        First sample
    y : Sample
        Second sample, same shape and weights as x
    p : int
        Cost order, by default 2

    Raises
    ------
    DimensionMismatchError
        if the shapes differ
    PPMMError
        if the weights differ

    Returns
    -------
    float
        (sum_i w_i ||x_i - y_i||^p)^(1/p)
    """
    if x.points.shape != y.points.shape:
        raise DimensionMismatchError("paired samples differ in shape", x.points.shape, y.points.shape)
    if not np.allclose(x.weights, y.weights, rtol=0.0, atol=1e-12):
        raise PPMMError("paired samples must share their weights")
    distances = np.linalg.norm(x.points - y.points, axis=1)
    return float(np.sum(x.weights * distances**p) ** (1.0 / p))


def _displace(points: np.ndarray, directions: Sequence[Direction], maps: Sequence[Map1D]) -> np.ndarray:
    # the average of the rank-one displacements (map(P xi) - P xi) xi^T
    total = np.zeros_like(points)
    for direction, map in zip(directions, maps):
        projected = points @ direction.vector
        total += np.outer(apply_1d_map(map, projected) - projected, direction.vector)
    return points + total / len(directions)


def _step_points(
    current: Sample, y: Sample, directions: Sequence[Direction], lookup: str = "auto"
) -> Tuple[np.ndarray, List[Map1D]]:
    if not directions:
        raise PPMMError("at least one direction is required")
    maps = []
    for direction in directions:
        if direction.d != current.d:
            raise DimensionMismatchError("direction has the wrong dimension", current.d, direction.d)
        maps.append(
            fit_1d_map(
                current.project(direction.vector),
                y.project(direction.vector),
                current.weights,
                y.weights,
                extrapolation=Extrapolation.CLAMP,
                method=lookup,
            )
        )
    return _displace(current.points, directions, maps), maps


def _check_pair(x: Sample, y: Sample) -> None:
    if x.d != y.d:
        raise DimensionMismatchError("source and target differ in dimension", x.d, y.d)


def ppmm_step(
    x_current: Sample, y: Sample, direction: Direction, *, lookup: str = "auto"
) -> Tuple[Sample, Map1D]:
    """
    One projection pursuit update along a direction.

    Both samples are projected on the direction, the 1D map is fitted between the projections and
    every source row moves along the direction by map(x . xi) - x . xi.

    Parameters
    ----------
    x_current : Sample
        The current source sample
    y : Sample
        The target sample
    direction : Direction
        The unit direction
    lookup : str
        1D table method, 'auto' or 'quantile', by default 'auto'

    Returns
    -------
    Tuple[Sample, Map1D]
        The updated source sample and the fitted map
    """
    _check_pair(x_current, y)
    points, maps = _step_points(x_current, y, [direction], lookup)
    return x_current.with_points(points), maps[0]


def sliced_step(
    x_current: Sample, y: Sample, directions: Sequence[Direction], *, lookup: str = "auto"
) -> Tuple[Sample, List[Map1D]]:
    """
    One sliced update: the average of the rank-one displacements of every direction.

    Parameters
    ----------
    x_current : Sample
        The current source sample
    y : Sample
        The target sample
    directions : Sequence[Direction]
        The unit directions, at least one
    lookup : str
        1D table method, 'auto' or 'quantile', by default 'auto'

    Raises
    ------
    PPMMError
        if directions is empty

    Returns
    -------
    Tuple[Sample, List[Map1D]]
        The updated source sample and the fitted maps in direction order
    """
    _check_pair(x_current, y)
    points, maps = _step_points(x_current, y, list(directions), lookup)
    return x_current.with_points(points), maps


def _direction_proxy(current: Sample, y: Sample, directions: Sequence[Direction], p: int) -> float:
    return float(
        np.mean(
            [
                wasserstein_1d(current.project(xi.vector), y.project(xi.vector), current.weights, y.weights, p)
                for xi in directions
            ]
        )
    )


def fit(
    x: Sample,
    y: Sample,
    strategy: Optional[Strategy] = None,
    config: Optional[EngineConfig] = None,
    *,
    callback: Optional[Callable[[IterationRecord], None]] = None,
) -> Tuple[MongeMapEstimate, ConvergenceTrace]:
    """
    Estimate the transport map from x to y by iterated one-dimensional transport.

    Each iteration picks the direction(s) given by the strategy, applies the step and records the
    displacement estimate D_k = W_p(X^[k], X). The run stops when the relative change of D_k is at most
    the tolerance, at the iteration limit, or (PPMM) when SAVE finds no second-moment discrepancy and
    the mean gap is negligible. With config.noise_stop > 0, PPMM also stops once both discrepancies are
    within that multiple of their sampling noise level; later steps would only fit the noise of the
    two samples.

    Parameters
    ----------
    x : Sample
        The source sample
    y : Sample
        The target sample
    strategy : Optional[Strategy]
        The direction strategy, by default PPMM
    config : Optional[EngineConfig]
        The estimator settings, by default EngineConfig()
    callback : Optional[Callable[[IterationRecord], None]]
        Called with each iteration's record

    Raises
    ------
    DimensionMismatchError
        if the samples differ in dimension
    NonFiniteError
        if an iteration produces non-finite values

    Returns
    -------
    Tuple[MongeMapEstimate, ConvergenceTrace]
        The composed estimate and the trace of the run
    """
    strategy = strategy or Strategy()
    config = config or EngineConfig()
    _check_pair(x, y)
    rng = RngState(config.seed, RNG_STREAM)
    current = x
    previous = 0.0
    steps: List[TransportStep] = []
    records: List[IterationRecord] = []
    reason = TerminationReason.MAX_ITERATIONS
    started = time.perf_counter()

    for iteration in range(1, config.max_iterations + 1):
        lambda1 = -1.0
        stop_after = None
        if strategy.kind is StrategyKind.PPMM:
            try:
                direction, decomposition = save_direction(current, y, config.ridge)
            except DegenerateSampleError:
                logger.info("pooled covariance vanished before iteration %d", iteration)
                reason = TerminationReason.DEGENERATE
                break
            lambda1 = decomposition.leading_eigenvalue
            if decomposition.degenerate or (strategy.mean_adjust and decomposition.mean_shift):
                gap = mean_gap_direction(current, y)
                if gap is not None:
                    direction = gap
                if decomposition.degenerate and gap is None:
                    stop_after = TerminationReason.DEGENERATE
            if stop_after is None and config.noise_stop > 0 and decomposition.within_noise(config.noise_stop):
                stop_after = TerminationReason.NOISE_FLOOR
            directions = [direction]
        else:
            directions = []
            for _ in range(strategy.directions_per_iteration):
                direction, rng = random_sphere_direction(x.d, rng)
                directions.append(direction)

        proxy = _direction_proxy(current, y, directions, config.p)
        points, maps = _step_points(current, y, directions, config.lookup)
        if not np.all(np.isfinite(points)):
            raise NonFiniteError("non-finite source points", iteration)
        current = current.with_points(points)
        steps.append(TransportStep(tuple(directions), tuple(maps)))

        displacement = empirical_wasserstein(current, x, config.p)
        if not np.isfinite(displacement):
            raise NonFiniteError("non-finite displacement estimate", iteration)
        record = IterationRecord(
            iteration=iteration,
            w_hat_displacement=displacement,
            w_hat_direction_proxy=proxy,
            save_lambda1=lambda1,
            elapsed_ms=(time.perf_counter() - started) * 1000.0,
        )
        records.append(record)
        logger.debug(
            "%s iteration %d: W=%.8g proxy=%.6g lambda1=%.6g",
            strategy.label, iteration, displacement, proxy, lambda1,
        )
        if callback is not None:
            callback(record)

        if stop_after is not None:
            reason = stop_after
            break
        if config.tolerance > 0 and relative_change(previous, displacement, iteration) <= config.tolerance:
            reason = TerminationReason.TOLERANCE
            break
        previous = displacement

    trace = ConvergenceTrace(tuple(records), reason)
    logger.info(
        "%s stopped after %d iterations (%s), W=%.8g",
        strategy.label, trace.iterations, reason.value, trace.final,
    )
    estimate = MongeMapEstimate(tuple(steps), x.d, strategy, config)
    return estimate, trace


def apply_map(estimate: MongeMapEstimate, points: Sample) -> Sample:
    """
    Replay an estimate on new points.

    Parameters
    ----------
    estimate : MongeMapEstimate
        The fitted estimate
    points : Sample
        The points to transport, dimension source_dim

    Raises
    ------
    DimensionMismatchError
        if the dimension differs from the estimate's

    Returns
    -------
    Sample
        The transported points with the input weights
    """
    if points.d != estimate.source_dim:
        raise DimensionMismatchError("points have the wrong dimension", estimate.source_dim, points.d)
    current = points.points
    for step in estimate.steps:
        maps = [
            m if m.extrapolation is Extrapolation.CLAMP else m.with_extrapolation(Extrapolation.CLAMP)
            for m in step.maps
        ]
        current = _displace(current, step.directions, maps)
    return points.with_points(current)


def save_trace(trace: ConvergenceTrace, path: Union[str, os.PathLike], *, timing: bool = True) -> None:
    """
    Write a trace as CSV with a termination comment line. With timing=False the elapsed_ms column is
    written as zeros so that the file depends only on the data and the seed.
    """
    write_csv(
        path,
        TRACE_COLUMNS,
        (
            [
                r.iteration,
                float(r.w_hat_displacement),
                float(r.w_hat_direction_proxy),
                float(r.save_lambda1),
                float(r.elapsed_ms) if timing else 0.0,
            ]
            for r in trace.records
        ),
        preamble=f"termination_reason={trace.termination_reason.value}",
    )


def load_trace(path: Union[str, os.PathLike]) -> ConvergenceTrace:
    """Read a trace written by save_trace."""
    header, rows, comments = read_csv(path)
    if tuple(header) != TRACE_COLUMNS:
        raise PPMMError(f"{os.fspath(path)} is not a trace file (header {header})")
    reason = TerminationReason.MAX_ITERATIONS
    for comment in comments:
        key, _, value = comment.partition("=")
        if key.strip() == "termination_reason":
            reason = TerminationReason(value.strip())
    records = tuple(
        IterationRecord(int(row[0]), float(row[1]), float(row[2]), float(row[3]), float(row[4])) for row in rows
    )
    return ConvergenceTrace(records, reason)


def save_estimate(estimate: MongeMapEstimate, directory: Union[str, os.PathLike]) -> None:
    """
    Write an estimate to a directory: one CSV per 1D map and a JSON manifest holding the step
    order, the directions, the strategy and the settings.
    """
    directory = os.fspath(directory)
    os.makedirs(directory, exist_ok=True)
    steps = []
    for k, step in enumerate(estimate.steps, start=1):
        files = []
        for j, map in enumerate(step.maps, start=1):
            name = f"step_{k:04d}_{j:03d}.csv"
            save_map(map, os.path.join(directory, name))
            files.append(name)
        steps.append({"maps": files, "directions": [d.vector.tolist() for d in step.directions]})
    manifest = {
        "format": "ppmmpy-estimate/1",
        "source_dim": estimate.source_dim,
        "strategy": estimate.strategy.to_dict(),
        "config": estimate.config.to_dict(),
        "steps": steps,
    }
    atomic_write(os.path.join(directory, MANIFEST), json_dumps(manifest, indent=True))


def load_estimate(directory: Union[str, os.PathLike]) -> MongeMapEstimate:
    """Read an estimate written by save_estimate."""
    directory = os.fspath(directory)
    try:
        with open(os.path.join(directory, MANIFEST), "rb") as fh:
            manifest = json_loads(fh.read())
    except (OSError, ValueError) as err:
        raise PPMMError(f"cannot read estimate manifest in {directory}: {err}") from err
    steps = [
        TransportStep(
            tuple(Direction(np.array(vector)) for vector in step["directions"]),
            tuple(load_map(os.path.join(directory, name)) for name in step["maps"]),
        )
        for step in manifest["steps"]
    ]
    strategy = manifest["strategy"]
    return MongeMapEstimate(
        tuple(steps),
        int(manifest["source_dim"]),
        Strategy(strategy["kind"], strategy["slices"], strategy["mean_adjust"]),
        EngineConfig(**manifest["config"]),
    )
