import os

import numpy as np
import pytest

from ppmmpy.bench import (
    ExperimentSpec,
    cell_samples,
    plot_summary,
    run_convergence_experiment,
    run_extension_experiment,
    run_k_vs_d_experiment,
    run_timing_experiment,
    summarize_displacements,
)
from ppmmpy.bench.config import load_config, merge_options, parse_config_text
from ppmmpy.engine import load_trace
from ppmmpy.engine.models import EngineConfig, Strategy, StrategyKind
from ppmmpy.exceptions import ConfigError, ExperimentError, NonFiniteError, PPMMError
from ppmmpy.oracle import closed_form_w2
from ppmmpy.utils import read_csv


def _small(**changes):
    values = dict(
        name="small",
        dims=(2, 3),
        n=60,
        replications=2,
        methods=(Strategy(), Strategy.parse("random")),
        engine=EngineConfig(max_iterations=8, tolerance=0.0),
    )
    values.update(changes)
    return ExperimentSpec(**values)


def _records(path):
    header, rows, _ = read_csv(path)
    return [dict(zip(header, row)) for row in rows]


def _tree(root):
    files = {}
    for folder, _, names in os.walk(root):
        for name in names:
            path = os.path.join(folder, name)
            with open(path, "rb") as fh:
                files[os.path.relpath(path, root)] = fh.read()
    return files


def test_experiment_spec_validation():
    with pytest.raises(ExperimentError):
        ExperimentSpec(replications=0)
    with pytest.raises(ExperimentError):
        ExperimentSpec(dims=(3, 3))
    with pytest.raises(ExperimentError):
        ExperimentSpec(weights="gamma")
    with pytest.raises(ExperimentError):
        ExperimentSpec(methods=(Strategy(), Strategy()))
    assert ExperimentSpec(n=10, n_y=1).target_size == 1


def test_cell_samples():
    spec = _small(n_y=1, weights="random")
    x, y = cell_samples(spec, 3, 0)
    assert (x.n, y.n, x.d) == (60, 2, 3)
    np.testing.assert_array_equal(y.points[0], y.points[1])
    assert not x.is_uniform
    again, _ = cell_samples(spec, 3, 0)
    np.testing.assert_array_equal(again.points, x.points)
    other, _ = cell_samples(spec, 3, 1)
    assert not np.array_equal(other.points, x.points)


def test_convergence_experiment_outputs(tmp_path):
    spec = _small()
    result = run_convergence_experiment(spec, tmp_path)
    assert len(result.cells) == 2 * 2 * 2 and not result.failures
    assert sorted(os.listdir(tmp_path / "traces")) == sorted(
        f"{m}_d{d}_r{r:03d}.csv" for d in (2, 3) for m in ("ppmm", "random") for r in range(2)
    )
    rows = _records(result.files["summary"])
    assert {r["status"] for r in rows} == {"ok"}
    assert {int(r["iteration"]) for r in rows} == set(range(1, 9))
    for r in rows:
        assert int(r["replications"]) == 2
        assert float(r["ground_truth"]) > 0


def test_summary_matches_recomputed_traces(tmp_path):
    spec = _small(engine=EngineConfig(max_iterations=20, tolerance=1e-3))
    run_convergence_experiment(spec, tmp_path)
    rows = _records(tmp_path / "summary.csv")
    for d in spec.dims:
        for method in spec.methods:
            traces = [
                load_trace(tmp_path / "traces" / f"{method.label}_d{d}_r{r:03d}.csv")
                for r in range(spec.replications)
            ]
            expected = summarize_displacements(traces)
            emitted = [
                (int(r["iteration"]), float(r["mean_w"]), float(r["sd_w"]))
                for r in rows
                if r["d"] == str(d) and r["method"] == method.label
            ]
            assert emitted == expected


def test_summarize_displacements_carries_last_value():
    from ppmmpy.engine.models import ConvergenceTrace, IterationRecord

    short = ConvergenceTrace((IterationRecord(1, 1.0, 0.0, -1.0, 0.0),), "tolerance")
    long = ConvergenceTrace(tuple(IterationRecord(k, float(k), 0.0, -1.0, 0.0) for k in (1, 2, 3)), "tolerance")
    rows = summarize_displacements([short, long])
    assert [k for k, _, _ in rows] == [1, 2, 3]
    assert rows[2][1] == 2.0
    assert summarize_displacements([short]) == [(1, 1.0, 0.0)]


def test_convergence_experiment_is_deterministic(tmp_path):
    spec = _small(dims=(3,), replications=1)
    run_convergence_experiment(spec, tmp_path / "a")
    run_convergence_experiment(spec, tmp_path / "b")
    assert _tree(tmp_path / "a") == _tree(tmp_path / "b")


def test_concurrent_cells_match_sequential(tmp_path):
    run_convergence_experiment(_small(jobs=1), tmp_path / "seq")
    run_convergence_experiment(_small(jobs=3), tmp_path / "par")
    seq, par = _tree(tmp_path / "seq"), _tree(tmp_path / "par")
    seq.pop("experiment.json")
    par.pop("experiment.json")
    assert seq == par


def test_failed_cells_are_tagged(tmp_path, monkeypatch):
    import ppmmpy.bench as bench

    real_fit = bench.fit

    def failing_fit(x, y, strategy, config):
        if strategy.kind is StrategyKind.RANDOM:
            raise NonFiniteError("non-finite source points", 3)
        return real_fit(x, y, strategy, config)

    monkeypatch.setattr(bench, "fit", failing_fit)
    result = run_convergence_experiment(_small(dims=(2,)), tmp_path)
    assert len(result.failures) == 2
    assert {c.status for c in result.failures} == {"failed:NonFiniteError"}
    rows = _records(result.files["summary"])
    failed = [r for r in rows if r["method"] == "random"]
    assert [r["status"] for r in failed] == ["failed:NonFiniteError"] * 2
    assert {r["status"] for r in rows if r["method"] == "ppmm"} == {"ok"}


def test_unexpected_errors_only_fail_their_cell(tmp_path, monkeypatch):
    import ppmmpy.bench as bench

    real_fit = bench.fit

    def failing_fit(x, y, strategy, config):
        if strategy.kind is StrategyKind.RANDOM:
            raise ValueError("array must not contain infs or NaNs")
        return real_fit(x, y, strategy, config)

    monkeypatch.setattr(bench, "fit", failing_fit)
    result = run_convergence_experiment(_small(dims=(2,)), tmp_path)
    assert {c.status for c in result.failures} == {"failed:ValueError"}
    assert len(result.failures) == 2
    assert all(c.ok for c in result.cells if c.method == "ppmm")
    assert os.path.exists(result.files["summary"])


def test_timing_experiment(tmp_path):
    spec = _small(methods=(Strategy(), Strategy.parse("sliced3")), engine=EngineConfig(max_iterations=5))
    result = run_timing_experiment(spec, tmp_path)
    raw = _records(result.files["timing"])
    assert len(raw) == 2 * 2 * 2
    summary = _records(result.files["timing_summary"])
    assert {(r["d"], r["method"]) for r in summary} == {(d, m) for d in ("2", "3") for m in ("ppmm", "sliced3")}
    for r in summary:
        assert float(r["mean_iteration_ms"]) >= 0
        assert float(r["median_total_ms"]) >= 0
        assert float(r["mean_cpu_seconds_per_iteration"]) >= 0


def test_k_vs_d_needs_four_dimensions(tmp_path):
    with pytest.raises(ExperimentError):
        run_k_vs_d_experiment(_small(), tmp_path)


def test_k_vs_d_with_unit_tolerance(tmp_path):
    spec = _small(dims=(2, 3, 4, 5), replications=1, methods=(Strategy(),), engine=EngineConfig(tolerance=1.0))
    result = run_k_vs_d_experiment(spec, tmp_path)
    rows = _records(result.files["kvd"])
    assert [int(r["d"]) for r in rows] == [2, 3, 4, 5]
    assert all(float(r["mean_k"]) == 1.0 and float(r["sd_k"]) == 0.0 for r in rows)
    fit_rows = _records(result.files["kvd_fit"])
    assert float(fit_rows[0]["slope"]) == 0.0


def test_extension_single_target(tmp_path):
    spec = _small(
        dims=(3,), n=40, n_y=1, replications=1, methods=(Strategy(),), weights="random",
        engine=EngineConfig(max_iterations=50, tolerance=0.0),
    )
    result = run_extension_experiment(spec, tmp_path)
    (row,) = _records(result.files["extension"])
    assert row["status"] == "ok"
    x, y = cell_samples(spec, 3, 0)
    forced = np.sqrt(x.weights @ np.sum((x.points - y.points[0]) ** 2, axis=1))
    assert float(row["oracle_w"]) == pytest.approx(forced, rel=1e-6)
    assert float(row["final_w"]) == pytest.approx(forced, rel=1e-6)


def test_extension_omits_oracle_above_guard(tmp_path, caplog):
    spec = _small(dims=(2,), n=200, n_y=60, replications=1, methods=(Strategy(),))
    result = run_extension_experiment(spec, tmp_path)
    (row,) = _records(result.files["extension"])
    assert row["oracle_w"] == ""
    assert "oracle guard" in caplog.text


def test_plot_summary(tmp_path):
    result = run_convergence_experiment(_small(replications=1), tmp_path)
    svg = plot_summary(result.files["summary"], tmp_path / "summary.svg")
    with open(svg, encoding="utf-8") as fh:
        assert "<svg" in fh.read()
    with pytest.raises(ExperimentError):
        plot_summary(os.path.join(tmp_path, "traces", "ppmm_d2_r000.csv"), tmp_path / "bad.svg")


def test_config_parsing(tmp_path):
    values = parse_config_text("# study\nmethod = ppmm,random\nmax_iter=50  # short\n\nDIMS = 5,10\n")
    assert values == {"method": "ppmm,random", "max-iter": "50", "dims": "5,10"}
    for text in ("colour = red", "n = 1\nn = 2", "just words"):
        with pytest.raises(ConfigError):
            parse_config_text(text)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.conf")


def test_config_must_be_utf8(tmp_path):
    path = tmp_path / "latin1.conf"
    path.write_bytes(b"name = r\xe9sum\xe9\nn = 500\n")
    with pytest.raises(ConfigError, match="not UTF-8"):
        load_config(path)
    path.write_bytes("name = r\u00e9sum\u00e9\nnoise_stop = 1.5\n".encode("utf-8"))
    assert load_config(path) == {"name": "r\u00e9sum\u00e9", "noise-stop": "1.5"}


def test_read_csv_reports_bad_bytes(tmp_path):
    path = tmp_path / "summary.csv"
    path.write_bytes(b"# study\nd,method\n2,ppmm\xff\n")
    with pytest.raises(PPMMError, match="malformed CSV"):
        read_csv(path)


def test_flags_win_over_config():
    merged = merge_options({"n": 2000, "seed": 0, "tol": 1e-5}, {"n": "500", "seed": "4"}, {"seed": 9, "tol": None})
    assert merged == {"n": "500", "seed": 9, "tol": 1e-5}


@pytest.mark.slow
def test_iterations_grow_with_dimension(tmp_path):
    spec = ExperimentSpec(
        name="kvd", dims=(5, 10, 15, 20, 25, 30), n=2000, replications=10,
        engine=EngineConfig(max_iterations=400, tolerance=1e-5), jobs=4,
    )
    result = run_k_vs_d_experiment(spec, tmp_path)
    (line,) = _records(result.files["kvd_fit"])
    assert float(line["slope"]) > 0
    assert float(line["r_squared"]) >= 0.8


@pytest.mark.slow
def test_extension_matches_exact_oracle(tmp_path):
    spec = ExperimentSpec(
        name="extension", dims=(5,), n=60, n_y=20, weights="random", replications=5,
        engine=EngineConfig(max_iterations=200),
    )
    result = run_extension_experiment(spec, tmp_path)
    errors = [float(r["relative_error"]) for r in _records(result.files["extension"])]
    assert np.median(errors) < 0.10


@pytest.mark.slow
def test_timing_ordering(tmp_path):
    spec = ExperimentSpec(
        name="timing", dims=(10,), n=2000, replications=10,
        methods=(Strategy.parse("random"), Strategy(), Strategy.parse("sliced10")),
        engine=EngineConfig(max_iterations=150, tolerance=1e-5, noise_stop=1.5),
    )
    result = run_timing_experiment(spec, tmp_path)
    raw = _records(result.files["timing"])
    per_iteration = {
        m: np.median([float(r["iteration_ms"]) for r in raw if r["method"] == m])
        for m in ("random", "ppmm", "sliced10")
    }
    assert per_iteration["random"] < per_iteration["ppmm"] < per_iteration["sliced10"]
    summary = {r["method"]: r for r in _records(result.files["timing_summary"])}
    assert float(summary["ppmm"]["median_total_ms"]) < float(summary["random"]["median_total_ms"])


@pytest.mark.slow
def test_sliced_cost_grows_with_slices(tmp_path):
    spec = ExperimentSpec(
        name="slices", dims=(10,), n=2000, replications=3,
        methods=(Strategy.parse("sliced10"), Strategy.parse("sliced50")),
        engine=EngineConfig(max_iterations=20, tolerance=0.0),
    )
    summary = {r["method"]: r for r in _records(run_timing_experiment(spec, tmp_path).files["timing_summary"])}
    ratio = float(summary["sliced50"]["mean_iteration_ms"]) / float(summary["sliced10"]["mean_iteration_ms"])
    assert 3 <= ratio <= 7


def _iterations_to_reach(trace, truth, within=0.10):
    values = trace.column("w_hat_displacement")
    close = np.flatnonzero(np.abs(values - truth) <= within * truth)
    return int(close[0]) + 1 if close.size else trace.iterations + 1


@pytest.mark.slow
def test_ppmm_gets_close_in_fewer_iterations(tmp_path):
    spec = ExperimentSpec(
        name="reach", dims=(20,), n=2000, replications=5,
        methods=(Strategy(), Strategy.parse("random")),
        engine=EngineConfig(max_iterations=80, tolerance=0.0),
    )
    result = run_convergence_experiment(spec, tmp_path)
    truth = closed_form_w2(spec.source_spec(20), spec.target_spec(20))
    reach = {
        m: np.median([_iterations_to_reach(c.trace, truth) for c in result.cells if c.method == m])
        for m in ("ppmm", "random")
    }
    assert reach["ppmm"] < reach["random"]
