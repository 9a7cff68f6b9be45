"""
SVG line charts over the experiment CSVs. Post-processing only; nothing in the runners depends on it.
"""
import collections
import logging
import os
from typing import Dict, List, Tuple, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from ppmmpy.exceptions import ExperimentError  # noqa: E402
from ppmmpy.utils import read_csv  # noqa: E402

__all__ = ("plot_summary", "plot_convergence", "plot_k_vs_d")

logger = logging.getLogger("ppmmpy.bench.plot")
logger.propagate = True

PathLike = Union[str, os.PathLike]


def _columns(header: List[str], rows: List[List[str]], path: PathLike) -> List[Dict[str, str]]:
    records = []
    for i, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise ExperimentError(f"{os.fspath(path)}: row {i} has {len(row)} fields, expected {len(header)}")
        records.append(dict(zip(header, row)))
    return records


def plot_convergence(summary_csv: PathLike, out_svg: PathLike) -> str:
    """
    Mean ± sd of the displacement estimate per iteration, one panel per dimension, with the
    ground-truth line.
    """
    header, rows, _ = read_csv(summary_csv)
    records = [r for r in _columns(header, rows, summary_csv) if r["status"] == "ok"]
    if not records:
        raise ExperimentError(f"{os.fspath(summary_csv)} has no successful rows to plot")
    curves: Dict[int, Dict[str, List[Tuple[int, float, float]]]] = collections.defaultdict(
        lambda: collections.defaultdict(list)
    )
    truth: Dict[int, float] = {}
    for r in records:
        d = int(r["d"])
        curves[d][r["method"]].append((int(r["iteration"]), float(r["mean_w"]), float(r["sd_w"])))
        truth[d] = float(r["ground_truth"])

    dims = sorted(curves)
    fig, axes = plt.subplots(1, len(dims), figsize=(5 * len(dims), 4), squeeze=False)
    for ax, d in zip(axes[0], dims):
        for method, points in sorted(curves[d].items()):
            points.sort()
            ks = [k for k, _, _ in points]
            means = [m for _, m, _ in points]
            sds = [s for _, _, s in points]
            ax.plot(ks, means, label=method)
            ax.fill_between(ks, [m - s for m, s in zip(means, sds)], [m + s for m, s in zip(means, sds)], alpha=0.2)
        ax.axhline(truth[d], color="black", linestyle="--", linewidth=1, label="ground truth")
        ax.set_title(f"d = {d}")
        ax.set_xlabel("iteration")
        ax.set_ylabel("estimated distance")
        ax.legend()
    fig.tight_layout()
    fig.savefig(out_svg, format="svg")
    plt.close(fig)
    logger.info("wrote %s", os.fspath(out_svg))
    return os.fspath(out_svg)


def plot_k_vs_d(kvd_csv: PathLike, out_svg: PathLike) -> str:
    """Mean iterations to converge against dimension, error bars at one sd."""
    header, rows, _ = read_csv(kvd_csv)
    records = _columns(header, rows, kvd_csv)
    if not records:
        raise ExperimentError(f"{os.fspath(kvd_csv)} has no rows to plot")
    series: Dict[str, List[Tuple[int, float, float]]] = collections.defaultdict(list)
    for r in records:
        series[r["method"]].append((int(r["d"]), float(r["mean_k"]), float(r["sd_k"])))

    fig, ax = plt.subplots(figsize=(5, 4))
    for method, points in sorted(series.items()):
        points.sort()
        ax.errorbar([d for d, _, _ in points], [k for _, k, _ in points], yerr=[s for _, _, s in points],
                    marker="o", capsize=3, label=method)
    ax.set_xlabel("dimension")
    ax.set_ylabel("iterations to converge")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_svg, format="svg")
    plt.close(fig)
    logger.info("wrote %s", os.fspath(out_svg))
    return os.fspath(out_svg)


def plot_summary(summary_csv: PathLike, out_svg: PathLike) -> str:
    """
    Render a summary CSV, choosing the chart from its columns.

    Parameters
    ----------
    summary_csv : str | os.PathLike
        summary.csv from the convergence study or kvd.csv from the K-vs-d study
    out_svg : str | os.PathLike
        The SVG file to write

    Raises
    ------
    ExperimentError
        if the file is neither kind or holds nothing to plot

    Returns
    -------
    str
        The written path
    """
    header, _, _ = read_csv(summary_csv)
    if {"iteration", "mean_w", "sd_w", "ground_truth"} <= set(header):
        return plot_convergence(summary_csv, out_svg)
    if {"d", "mean_k", "sd_k"} <= set(header):
        return plot_k_vs_d(summary_csv, out_svg)
    raise ExperimentError(f"{os.fspath(summary_csv)} is not a convergence or K-vs-d summary")
