"""
Simulation studies: convergence curves against the closed-form ground truth, per-iteration and
time-to-converge timings, iterations-to-converge against dimension, and the weighted / unequal-size
extension checked against the exact discrete oracle.
"""
import concurrent.futures
import dataclasses
import logging
import os
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import psutil
from scipy.stats import linregress

from ppmmpy.bench.models import CellResult, ExperimentSpec, WEIGHT_SCHEMES
from ppmmpy.engine import fit, save_trace
from ppmmpy.engine.models import ConvergenceTrace, Strategy
from ppmmpy.exceptions import ExperimentError, OracleGuardError, PPMMError
from ppmmpy.oracle import MAX_CELLS, closed_form_w2, exact_discrete_w2
from ppmmpy.sample import random_weights, sample_gaussian
from ppmmpy.sample.models import RngState, Sample
from ppmmpy.utils import atomic_write, json_dumps, write_csv
from ppmmpy.bench.plot import plot_summary

__all__ = (
    "ExperimentSpec",
    "CellResult",
    "ExperimentResult",
    "WEIGHT_SCHEMES",
    "cell_samples",
    "summarize_displacements",
    "run_convergence_experiment",
    "run_timing_experiment",
    "run_k_vs_d_experiment",
    "run_extension_experiment",
    "plot_summary",
)

logger = logging.getLogger("ppmmpy.bench")
logger.propagate = True

SUMMARY_COLUMNS = ("d", "method", "iteration", "mean_w", "sd_w", "replications", "ground_truth", "status")
TIMING_COLUMNS = ("d", "method", "replication", "iteration_ms", "total_ms", "iterations", "cpu_seconds", "termination_reason")
TIMING_SUMMARY_COLUMNS = (
    "d", "method", "mean_iteration_ms", "sd_iteration_ms", "mean_total_ms", "sd_total_ms", "median_total_ms",
    "mean_iterations", "mean_cpu_seconds_per_iteration", "converged", "replications",
)
KVD_COLUMNS = ("method", "d", "mean_k", "sd_k", "replications")
KVD_FIT_COLUMNS = ("method", "slope", "intercept", "r_squared")
EXTENSION_COLUMNS = ("d", "method", "replication", "final_w", "iterations", "oracle_w", "relative_error", "status")


@dataclasses.dataclass(frozen=True)
class ExperimentResult:
    """
    A class used to represent the files an experiment wrote.
    ...

    Attributes
    ----------
    out_dir: str
        The output directory
    files: Dict[str, str]
        Result files by role ('summary', 'timing', 'kvd', ...)
    cells: tuple[CellResult, ...]
        Every cell in (dimension, method, replication) order
    """

    out_dir: str
    files: Dict[str, str]
    cells: tuple[CellResult, ...]

    @property
    def failures(self) -> List[CellResult]:
        return [cell for cell in self.cells if not cell.ok]


def _sd(values: Sequence[float]) -> float:
    return float(np.std(values, ddof=1)) if len(values) > 1 else 0.0


def _cpu_seconds() -> float:
    times = psutil.Process().cpu_times()
    return float(times.user + times.system)


def cell_samples(spec: ExperimentSpec, d: int, replication: int) -> Tuple[Sample, Sample]:
    """
    The source and target samples of one replication. Replication r draws from seed + r, source
    first; the same data is shared by every method.
    """
    rng = RngState(spec.seed + replication)
    x, rng = sample_gaussian(spec.source_spec(d), spec.n, rng)
    size = spec.target_size
    y, rng = sample_gaussian(spec.target_spec(d), max(size, 2), rng)
    if size == 1:
        y = Sample(np.vstack([y.points[0], y.points[0]]))
    if spec.weights == "random":
        wx, rng = random_weights(x.n, rng)
        wy, rng = random_weights(y.n, rng)
        x, y = Sample(x.points, wx), Sample(y.points, wy)
    return x, y


def _run_cell(
    spec: ExperimentSpec,
    d: int,
    strategy: Strategy,
    replication: int,
    trace_dir: str,
    timing: bool,
    samples: Optional[Tuple[Sample, Sample]] = None,
) -> CellResult:
    config = dataclasses.replace(spec.engine, seed=spec.seed + replication)
    try:
        x, y = samples if samples is not None else cell_samples(spec, d, replication)
        started = _cpu_seconds()
        _, trace = fit(x, y, strategy, config)
        cpu = _cpu_seconds() - started
    except PPMMError as err:
        logger.warning("%s d=%d %s r=%d failed: %s", spec.name, d, strategy.label, replication, err)
        return CellResult(d, strategy.label, replication, error=f"{type(err).__name__}: {err}")
    except Exception as err:
        # numerical failures outside the library's own errors still only cost this cell
        logger.warning(
            "%s d=%d %s r=%d failed: %s", spec.name, d, strategy.label, replication, err, exc_info=True
        )
        return CellResult(d, strategy.label, replication, error=f"{type(err).__name__}: {err}")
    path = os.path.join(trace_dir, f"{strategy.label}_d{d}_r{replication:03d}.csv")
    save_trace(trace, path, timing=timing)
    logger.info(
        "%s d=%d %s r=%d: %d iterations (%s), W=%.6g",
        spec.name, d, strategy.label, replication, trace.iterations, trace.termination_reason.value, trace.final,
    )
    return CellResult(d, strategy.label, replication, trace=trace, cpu_seconds=cpu, trace_path=path)


def _run_cells(jobs: int, tasks: Sequence[Callable[[], CellResult]]) -> List[CellResult]:
    # results keep task order whatever the completion order
    if jobs <= 1:
        return [task() for task in tasks]
    with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(lambda task: task(), tasks))


def _grid(spec: ExperimentSpec, trace_dir: str, timing: bool, jobs: int) -> List[CellResult]:
    tasks = [
        (lambda d=d, m=m, r=r: _run_cell(spec, d, m, r, trace_dir, timing))
        for d in spec.dims
        for m in spec.methods
        for r in range(spec.replications)
    ]
    return _run_cells(jobs, tasks)


def _spec_echo(spec: ExperimentSpec) -> dict:
    return {
        "name": spec.name,
        "dims": list(spec.dims),
        "n": spec.n,
        "n_y": spec.n_y,
        "mean_x": spec.mean_x,
        "mean_y": spec.mean_y,
        "rho_x": spec.rho_x,
        "rho_y": spec.rho_y,
        "weights": spec.weights,
        "methods": [m.to_dict() for m in spec.methods],
        "replications": spec.replications,
        "seed": spec.seed,
        "engine": spec.engine.to_dict(),
    }


def _prepare(spec: ExperimentSpec, out_dir: str, kind: str) -> Tuple[str, Dict[str, str]]:
    trace_dir = os.path.join(out_dir, "traces")
    os.makedirs(trace_dir, exist_ok=True)
    echo = os.path.join(out_dir, "experiment.json")
    atomic_write(echo, json_dumps({"experiment": kind, **_spec_echo(spec)}, indent=True))
    return trace_dir, {"experiment": echo}


def summarize_displacements(traces: Sequence[ConvergenceTrace]) -> List[Tuple[int, float, float]]:
    """
    Per-iteration mean and standard deviation of the displacement estimate across runs. A run that
    stopped early contributes its final value to the later iterations.

    Parameters
    ----------
    traces : Sequence[ConvergenceTrace]
        The runs, at least one iteration each

    Returns
    -------
    List[Tuple[int, float, float]]
        (iteration, mean, sd) for iterations 1..longest run; sd is 0 for a single run
    """
    traces = [t for t in traces if t.iterations > 0]
    if not traces:
        return []
    longest = max(t.iterations for t in traces)
    rows = []
    for k in range(1, longest + 1):
        values = [t.records[min(k, t.iterations) - 1].w_hat_displacement for t in traces]
        rows.append((k, float(np.mean(values)), _sd(values)))
    return rows


def run_convergence_experiment(spec: ExperimentSpec, out_dir: str) -> ExperimentResult:
    """
    Trace every (dimension, method, replication) cell and summarize the displacement estimate per
    iteration next to the closed-form ground truth.

    Parameters
    ----------
    spec : ExperimentSpec
        The study
    out_dir : str
        Output directory; gets traces/, summary.csv and experiment.json

    Returns
    -------
    ExperimentResult
        The written files and the cells. Failed cells appear in the summary with a failure status.
    """
    trace_dir, files = _prepare(spec, out_dir, "convergence")
    cells = _grid(spec, trace_dir, timing=False, jobs=spec.jobs)
    rows = []
    for d in spec.dims:
        truth = closed_form_w2(spec.source_spec(d), spec.target_spec(d))
        for method in spec.methods:
            group = [c for c in cells if c.d == d and c.method == method.label]
            ok = [c.trace for c in group if c.ok]
            for k, mean, sd in summarize_displacements(ok):
                rows.append([d, method.label, k, mean, sd, len(ok), truth, "ok"])
            for cell in group:
                if not cell.ok:
                    rows.append([d, method.label, 0, "", "", cell.replication, truth, cell.status])
    files["summary"] = os.path.join(out_dir, "summary.csv")
    write_csv(files["summary"], SUMMARY_COLUMNS, rows)
    return ExperimentResult(out_dir, files, tuple(cells))


def run_timing_experiment(spec: ExperimentSpec, out_dir: str) -> ExperimentResult:
    """
    Per-iteration wall time and time-to-converge per method. Cells always run one at a time so the
    timings do not compete for the processor. A run's iteration time is the median of its iterations,
    so a single descheduled iteration does not move it.

    Parameters
    ----------
    spec : ExperimentSpec
        The study; use a positive engine tolerance for meaningful time-to-converge
    out_dir : str
        Output directory; gets traces/, timing.csv, timing_summary.csv and experiment.json

    Returns
    -------
    ExperimentResult
        The written files and the cells
    """
    if spec.jobs > 1:
        logger.info("timing cells run sequentially, ignoring jobs=%d", spec.jobs)
    trace_dir, files = _prepare(spec, out_dir, "timing")
    cells = _grid(spec, trace_dir, timing=True, jobs=1)
    raw, summary = [], []
    for d in spec.dims:
        for method in spec.methods:
            group = [
                c for c in cells
                if c.d == d and c.method == method.label and c.ok and c.trace.iterations > 0
            ]
            per_iteration, totals, iterations, cpu, converged = [], [], [], [], 0
            for cell in group:
                trace = cell.trace
                per_iteration.append(float(np.median(trace.iteration_ms())))
                totals.append(trace.total_ms)
                iterations.append(trace.iterations)
                cpu.append(cell.cpu_seconds / trace.iterations)
                converged += trace.termination_reason.value != "max_iterations"
                raw.append([
                    d, method.label, cell.replication, per_iteration[-1], trace.total_ms,
                    trace.iterations, cell.cpu_seconds, trace.termination_reason.value,
                ])
            if not group:
                continue
            summary.append([
                d, method.label, float(np.mean(per_iteration)), _sd(per_iteration),
                float(np.mean(totals)), _sd(totals), float(np.median(totals)), float(np.mean(iterations)),
                float(np.mean(cpu)), converged, len(group),
            ])
    files["timing"] = os.path.join(out_dir, "timing.csv")
    files["timing_summary"] = os.path.join(out_dir, "timing_summary.csv")
    write_csv(files["timing"], TIMING_COLUMNS, raw)
    write_csv(files["timing_summary"], TIMING_SUMMARY_COLUMNS, summary)
    return ExperimentResult(out_dir, files, tuple(cells))


def run_k_vs_d_experiment(spec: ExperimentSpec, out_dir: str) -> ExperimentResult:
    """
    Iterations to converge against dimension, with a least-squares line per method.

    Parameters
    ----------
    spec : ExperimentSpec
        The study, at least four dimensions
    out_dir : str
        Output directory; gets traces/, kvd.csv, kvd_fit.csv and experiment.json

    Raises
    ------
    ExperimentError
        if fewer than four dimensions are given

    Returns
    -------
    ExperimentResult
        The written files and the cells
    """
    if len(spec.dims) < 4:
        raise ExperimentError(f"the K-vs-d study needs at least 4 dimensions, got {len(spec.dims)}")
    trace_dir, files = _prepare(spec, out_dir, "k_vs_d")
    cells = _grid(spec, trace_dir, timing=False, jobs=spec.jobs)
    rows, fits = [], []
    for method in spec.methods:
        dims, means = [], []
        for d in spec.dims:
            ks = [c.trace.iterations for c in cells if c.d == d and c.method == method.label and c.ok]
            if not ks:
                logger.warning("no successful %s cell at d=%d", method.label, d)
                continue
            rows.append([method.label, d, float(np.mean(ks)), _sd(ks), len(ks)])
            dims.append(d)
            means.append(float(np.mean(ks)))
        if len(dims) >= 2:
            line = linregress(np.array(dims, dtype=float), np.array(means))
            fits.append([method.label, float(line.slope), float(line.intercept), float(line.rvalue**2)])
    files["kvd"] = os.path.join(out_dir, "kvd.csv")
    files["kvd_fit"] = os.path.join(out_dir, "kvd_fit.csv")
    write_csv(files["kvd"], KVD_COLUMNS, rows)
    write_csv(files["kvd_fit"], KVD_FIT_COLUMNS, fits)
    return ExperimentResult(out_dir, files, tuple(cells))


def run_extension_experiment(spec: ExperimentSpec, out_dir: str) -> ExperimentResult:
    """
    Weighted and/or unequal-size samples: the estimator's final displacement against the exact
    discrete transport distance of the same two samples.

    Parameters
    ----------
    spec : ExperimentSpec
        The study; set n_y and/or weights='random'
    out_dir : str
        Output directory; gets traces/, extension.csv and experiment.json

    Returns
    -------
    ExperimentResult
        The written files and the cells. The oracle column is empty when the instance exceeds the
        oracle's size guard.
    """
    if spec.n_y is None and spec.weights == "uniform":
        logger.warning("%s: equal sizes and uniform weights, nothing specific to the extension", spec.name)
    trace_dir, files = _prepare(spec, out_dir, "extension")
    cells, rows = [], []
    for d in spec.dims:
        for r in range(spec.replications):
            x, y = cell_samples(spec, d, r)
            oracle: Optional[float] = None
            if x.n * y.n <= MAX_CELLS:
                oracle = exact_discrete_w2(x, y, spec.engine.p)
            else:
                logger.warning(
                    "%s d=%d r=%d: %d x %d exceeds the oracle guard, oracle omitted", spec.name, d, r, x.n, y.n
                )
            tasks = [
                (lambda m=m: _run_cell(spec, d, m, r, trace_dir, False, (x, y))) for m in spec.methods
            ]
            for cell in _run_cells(spec.jobs, tasks):
                cells.append(cell)
                if not cell.ok:
                    rows.append([d, cell.method, r, "", "", "" if oracle is None else oracle, "", cell.status])
                    continue
                final = cell.trace.final
                error = "" if not oracle else abs(final - oracle) / oracle
                rows.append([
                    d, cell.method, r, final, cell.trace.iterations, "" if oracle is None else oracle, error, "ok",
                ])
    files["extension"] = os.path.join(out_dir, "extension.csv")
    write_csv(files["extension"], EXTENSION_COLUMNS, rows)
    return ExperimentResult(out_dir, files, tuple(cells))
