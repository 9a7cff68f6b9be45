"""
This is the command line runner for ppmmpy: the simulation studies, fitting and evaluating an
estimate on CSV samples, the two oracles and the summary charts.
"""
import argparse as ap
import logging
import os
import sys
import typing

from pyfiglet import Figlet

from ppmmpy import __version__, bench, engine, exceptions as ex, oracle
from ppmmpy.bench.config import load_config, merge_options
from ppmmpy.engine.models import EngineConfig, IterationRecord, Strategy
from ppmmpy.sample import load_sample, save_sample
from ppmmpy.utils import cprint, json_dumps

logger = logging.getLogger("ppmmpy.cli")
logger.propagate = True

DEFAULTS: typing.Dict[str, typing.Any] = {
    "method": "ppmm",
    "slices": None,
    "max-iter": 200,
    "tol": 1e-5,
    "p": 2,
    "seed": 0,
    "reps": 10,
    "dims": "10",
    "n": 2000,
    "n-y": None,
    "weights": "uniform",
    "mean-x": -2.0,
    "mean-y": 2.0,
    "rho-x": 0.8,
    "rho-y": 0.5,
    "mean-adjust": False,
    "ridge": 1e-10,
    "lookup": "auto",
    "noise-stop": 0.0,
    "jobs": 1,
    "out": "results",
    "name": None,
}
_INTS = {"slices", "max-iter", "p", "seed", "reps", "n", "n-y", "jobs"}
_FLOATS = {"tol", "mean-x", "mean-y", "rho-x", "rho-y", "ridge", "noise-stop"}
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def report_errors(func: typing.Callable[..., int]) -> typing.Callable[..., int]:
    """
    This decorator turns library and file errors into one ``error: <Class>: <message>`` line on
    stderr and exit status 1, instead of a traceback.

    Parameters
    ----------
    func : typing.Callable
        A subcommand handler returning an exit status
    """

    def wrapper(*args, **kwargs) -> int:
        try:
            return func(*args, **kwargs)
        except (ex.PPMMError, OSError) as e:
            logger.debug("subcommand failed", exc_info=True)
            message = " ".join(str(e).split())
            print(f"error: {e.__class__.__name__}: {message}", file=sys.stderr)
            return 1

    wrapper.__name__ = func.__name__
    wrapper.__doc__ = func.__doc__ or "Not Documented Yet"
    return wrapper


def _coerce(key: str, value: typing.Any) -> typing.Any:
    if value is None or not isinstance(value, str):
        return value
    text = value.strip()
    try:
        if key in _INTS:
            return int(text)
        if key in _FLOATS:
            return float(text)
    except ValueError:
        raise ex.ConfigError(f"{key} expects a number, got {value!r}", key=key)
    if key == "mean-adjust":
        if text.lower() in _TRUE:
            return True
        if text.lower() in _FALSE:
            return False
        raise ex.ConfigError(f"{key} expects true or false, got {value!r}", key=key)
    return text


def _split(text: typing.Any) -> typing.List[str]:
    return [part.strip() for part in str(text).split(",") if part.strip()]


def _options(args: ap.Namespace) -> typing.Dict[str, typing.Any]:
    flags = {key: getattr(args, key.replace("-", "_"), None) for key in DEFAULTS}
    file_values = load_config(args.config) if getattr(args, "config", None) else None
    merged = merge_options(DEFAULTS, file_values, flags)
    return {key: _coerce(key, value) for key, value in merged.items()}


def _strategies(options: typing.Mapping[str, typing.Any]) -> typing.Tuple[Strategy, ...]:
    return tuple(
        Strategy.parse(method, options["slices"], options["mean-adjust"]) for method in _split(options["method"])
    )


def _engine_config(options: typing.Mapping[str, typing.Any]) -> EngineConfig:
    return EngineConfig(
        max_iterations=options["max-iter"],
        tolerance=options["tol"],
        p=options["p"],
        seed=options["seed"],
        ridge=options["ridge"],
        lookup=options["lookup"],
        noise_stop=options["noise-stop"],
    )


def _experiment_spec(options: typing.Mapping[str, typing.Any], default_name: str) -> bench.ExperimentSpec:
    try:
        dims = tuple(int(d) for d in _split(options["dims"]))
    except ValueError:
        raise ex.ConfigError(f"dims expects comma-separated integers, got {options['dims']!r}", key="dims")
    return bench.ExperimentSpec(
        name=options["name"] or default_name,
        dims=dims,
        n=options["n"],
        n_y=options["n-y"],
        mean_x=options["mean-x"],
        mean_y=options["mean-y"],
        rho_x=options["rho-x"],
        rho_y=options["rho-y"],
        weights=options["weights"],
        methods=_strategies(options),
        replications=options["reps"],
        seed=options["seed"],
        engine=_engine_config(options),
        jobs=options["jobs"],
    )


def _emit(payload: typing.Mapping[str, typing.Any]) -> None:
    print(json_dumps(payload))


def _emit_experiment(result: bench.ExperimentResult) -> int:
    _emit({"out": result.out_dir, "files": result.files, "cells": len(result.cells), "failed": len(result.failures)})
    return 0


_RUNNERS = {
    "simulate": bench.run_convergence_experiment,
    "timing": bench.run_timing_experiment,
    "kvd": bench.run_k_vs_d_experiment,
    "extension": bench.run_extension_experiment,
}


@report_errors
def do_experiment(args: ap.Namespace) -> int:
    """Run one of the simulation studies."""
    options = _options(args)
    spec = _experiment_spec(options, args.command)
    result = _RUNNERS[args.command](spec, options["out"])
    return _emit_experiment(result)


@report_errors
def do_fit(args: ap.Namespace) -> int:
    """Fit an estimate between two CSV samples and write it with its trace."""
    options = _options(args)
    strategies = _strategies(options)
    if len(strategies) != 1:
        raise ex.ConfigError("fit takes exactly one method", key="method")
    x = load_sample(args.source)
    y = load_sample(args.target)

    def progress(record: IterationRecord) -> None:
        cprint(f"iteration {record.iteration}: W = {record.w_hat_displacement:.6g}", "cyan", file=sys.stderr)

    estimate, trace = engine.fit(
        x, y, strategies[0], _engine_config(options), callback=progress if args.progress else None
    )
    out = options["out"]
    os.makedirs(out, exist_ok=True)
    engine.save_estimate(estimate, out)
    engine.save_trace(trace, os.path.join(out, "trace.csv"))
    _emit({
        "out": out,
        "iterations": trace.iterations,
        "termination_reason": trace.termination_reason.value,
        "w_hat": trace.final,
    })
    return 0


@report_errors
def do_eval(args: ap.Namespace) -> int:
    """Apply a saved estimate to a CSV sample and report the displacement estimate."""
    options = _options(args)
    estimate = engine.load_estimate(args.estimate)
    points = load_sample(args.sample)
    mapped = engine.apply_map(estimate, points)
    payload: typing.Dict[str, typing.Any] = {
        "n": points.n,
        "w_hat": engine.empirical_wasserstein(mapped, points, options["p"]),
    }
    if args.target:
        payload["w_hat_to_target"] = engine.empirical_wasserstein(mapped, load_sample(args.target), options["p"])
    if args.mapped:
        save_sample(mapped, args.mapped)
        payload["mapped"] = args.mapped
    _emit(payload)
    return 0


@report_errors
def do_oracle(args: ap.Namespace) -> int:
    """Closed-form Gaussian distance or exact discrete distance."""
    options = _options(args)
    if args.kind == "gaussian":
        spec = _experiment_spec(options, "oracle")
        for d in spec.dims:
            a, b = spec.source_spec(d), spec.target_spec(d)
            _emit({
                "d": d,
                "w2": oracle.closed_form_w2(a, b),
                "w2_spectral": oracle.closed_form_w2_spectral(a, b),
            })
        return 0
    if not (args.source and args.target):
        raise ex.ConfigError("oracle discrete needs a source and a target CSV")
    x = load_sample(args.source)
    y = load_sample(args.target)
    _emit({"w": oracle.exact_discrete_w2(x, y, options["p"], max_cells=args.max_cells)})
    return 0


@report_errors
def do_plot(args: ap.Namespace) -> int:
    """Render a summary CSV as an SVG chart."""
    out = args.svg or os.path.splitext(args.summary)[0] + ".svg"
    _emit({"svg": bench.plot_summary(args.summary, out)})
    return 0


def _shared_flags() -> ap.ArgumentParser:
    # every default is None so config-file values show through
    parent = ap.ArgumentParser(add_help=False)
    parent.add_argument("--config", default=None, help="key = value file; flags win over its values")
    parent.add_argument("--method", default=None, help="ppmm, ppmm-mean, random, slicedL; comma-separated for studies")
    parent.add_argument("--slices", type=int, default=None, help="directions per iteration for 'sliced'")
    parent.add_argument("--max-iter", dest="max_iter", type=int, default=None, help="iteration limit (200)")
    parent.add_argument("--tol", type=float, default=None, help="relative change that counts as converged (1e-5)")
    parent.add_argument("--p", type=int, default=None, help="transport cost order (2)")
    parent.add_argument("--seed", type=int, default=None, help="base seed (0)")
    parent.add_argument("--out", default=None, help="output directory (results)")
    parent.add_argument("--reps", type=int, default=None, help="replications per cell (10)")
    parent.add_argument("--dims", default=None, help="comma-separated dimensions (10)")
    parent.add_argument("--n", type=int, default=None, help="source sample size (2000)")
    parent.add_argument("--n-y", dest="n_y", type=int, default=None, help="target sample size (same as --n)")
    parent.add_argument("--weights", choices=bench.WEIGHT_SCHEMES, default=None, help="weight scheme (uniform)")
    parent.add_argument("--mean-x", dest="mean_x", type=float, default=None, help="source mean coordinate (-2)")
    parent.add_argument("--mean-y", dest="mean_y", type=float, default=None, help="target mean coordinate (2)")
    parent.add_argument("--rho-x", dest="rho_x", type=float, default=None, help="source AR(1) correlation (0.8)")
    parent.add_argument("--rho-y", dest="rho_y", type=float, default=None, help="target AR(1) correlation (0.5)")
    parent.add_argument(
        "--mean-adjust", dest="mean_adjust", action="store_const", const=True, default=None,
        help="use the mean gap direction when the means are far apart",
    )
    parent.add_argument("--ridge", type=float, default=None, help="relative eigenvalue floor in SAVE (1e-10)")
    parent.add_argument("--lookup", choices=("auto", "quantile"), default=None, help="1D table method (auto)")
    parent.add_argument(
        "--noise-stop", dest="noise_stop", type=float, default=None,
        help="stop PPMM once SAVE sees only this multiple of sampling noise (0, off)",
    )
    parent.add_argument("--jobs", type=int, default=None, help="cells run concurrently (1)")
    parent.add_argument("--name", default=None, help="study name used in log records")
    return parent


def build_parser() -> ap.ArgumentParser:
    shared = _shared_flags()
    parser = ap.ArgumentParser(
        prog="ppmm", description="Projection pursuit Monge map estimation and its simulation studies"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")
    commands = parser.add_subparsers(dest="command")

    for name, text in (
        ("simulate", "convergence curves against the closed-form ground truth"),
        ("timing", "per-iteration time and time to converge"),
        ("kvd", "iterations to converge against dimension"),
        ("extension", "weighted / unequal-size samples against the exact discrete oracle"),
    ):
        commands.add_parser(name, parents=[shared], help=text).set_defaults(handler=do_experiment)

    fit_parser = commands.add_parser("fit", parents=[shared], help="fit an estimate between two CSV samples")
    fit_parser.add_argument("source", help="source sample CSV")
    fit_parser.add_argument("target", help="target sample CSV")
    fit_parser.add_argument("--progress", action="store_true", help="print each iteration to stderr")
    fit_parser.set_defaults(handler=do_fit)

    eval_parser = commands.add_parser("eval", parents=[shared], help="apply an estimate to a CSV sample")
    eval_parser.add_argument("estimate", help="estimate directory written by fit")
    eval_parser.add_argument("sample", help="sample CSV to transport")
    eval_parser.add_argument("--target", default=None, help="also report the distance to this sample")
    eval_parser.add_argument("--mapped", default=None, help="write the transported sample to this CSV")
    eval_parser.set_defaults(handler=do_eval)

    oracle_parser = commands.add_parser("oracle", parents=[shared], help="closed-form or exact discrete distance")
    oracle_parser.add_argument("kind", choices=("gaussian", "discrete"))
    oracle_parser.add_argument("source", nargs="?", default=None, help="source sample CSV (discrete)")
    oracle_parser.add_argument("target", nargs="?", default=None, help="target sample CSV (discrete)")
    oracle_parser.add_argument(
        "--max-cells", dest="max_cells", type=int, default=oracle.MAX_CELLS, help="size guard n_x * n_y"
    )
    oracle_parser.set_defaults(handler=do_oracle)

    plot_parser = commands.add_parser("plot", help="SVG chart of summary.csv or kvd.csv")
    plot_parser.add_argument("summary", help="summary CSV")
    plot_parser.add_argument("--svg", default=None, help="output file (summary name with .svg)")
    plot_parser.set_defaults(handler=do_plot)
    return parser


def main(argv: typing.Optional[typing.Sequence[str]] = None) -> int:
    """
    Entry point of the ``ppmm`` command.

    Parameters
    ----------
    argv : Optional[Sequence[str]]
        The arguments, sys.argv[1:] by default

    Returns
    -------
    int
        0 on success, 1 on a reported error, 2 on a usage error
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level={0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if args.command is None:
        cprint(Figlet(font="slant").renderText("ppmm"), "magenta")
        parser.print_help()
        return 2
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
