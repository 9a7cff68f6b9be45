import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from ppmmpy.exceptions import OracleGuardError, PPMMError
from ppmmpy.transport import (
    exact_assignment_cost,
    fit_1d_map,
    apply_1d_map,
    load_map,
    save_map,
    transport_cost,
    wasserstein_1d,
)
from ppmmpy.transport.models import Extrapolation, Map1D


def test_translation_example():
    m = fit_1d_map([1.0, 2.0, 3.0], [4.0, 5.0, 6.0])
    assert_array_equal(m.source_knots, [1, 2, 3])
    assert_array_equal(m.target_knots, [4, 5, 6])


def test_identity_example(generator):
    u = generator.standard_normal(7)
    m = fit_1d_map(u, u)
    assert_array_equal(m.source_knots, m.target_knots)


def test_two_point_example():
    m = fit_1d_map([1.0, 0.0], [3.0, 0.0])
    assert_array_equal(m.target_knots, [0, 3])
    assert transport_cost(m, [0.0, 1.0]) == pytest.approx(np.sqrt(2.0))


def test_weighted_example():
    m = fit_1d_map([0.0, 1.0], [0.0, 2.0], None, [0.75, 0.25])
    image = apply_1d_map(m, 1.0)
    assert 0.0 < image <= 2.0
    assert apply_1d_map(m, 0.0) == 0.0


def test_apply_examples():
    m = Map1D([0.0, 2.0], [0.0, 4.0])
    assert apply_1d_map(m, 1.0) == 2.0
    assert apply_1d_map(m, 2.0) == 4.0
    assert apply_1d_map(m, -5.0) == 0.0
    assert apply_1d_map(m, 7.0) == 4.0
    assert_array_equal(apply_1d_map(m, np.array([[0.5], [1.5]])), [[1.0], [3.0]])
    linear = m.with_extrapolation(Extrapolation.LINEAR)
    assert apply_1d_map(linear, -1.0) == -2.0
    assert apply_1d_map(linear, 3.0) == 6.0


def test_ties_are_merged():
    m = fit_1d_map([1.0, 1.0, 2.0], [0.0, 2.0, 5.0])
    assert_array_equal(m.source_knots, [1, 2])
    assert_array_equal(m.target_knots, [1, 5])


def test_map_validation():
    with pytest.raises(PPMMError):
        Map1D([0.0, 0.0], [0.0, 1.0])
    with pytest.raises(PPMMError):
        Map1D([0.0, 1.0], [1.0, 0.0])
    with pytest.raises(PPMMError):
        fit_1d_map([0.0, 1.0], [0.0, 1.0, 2.0], method="sorted")
    with pytest.raises(PPMMError):
        fit_1d_map([0.0, np.nan], [0.0, 1.0])


def test_exact_assignment_examples():
    assert exact_assignment_cost([1, 2, 3], [4, 5, 6], p=2) == pytest.approx(3.0)
    assert exact_assignment_cost([1, 5, 2], [1, 5, 2]) == 0.0
    assert exact_assignment_cost([2.5], [-1.0], p=1) == pytest.approx(3.5)
    with pytest.raises(OracleGuardError):
        exact_assignment_cost(np.zeros(11), np.zeros(11))


def test_sorted_lookup_matches_enumeration(generator):
    for trial in range(200):
        n = int(generator.integers(1, 9))
        p = 1 + trial % 2
        u = generator.normal(size=n) * 3
        v = generator.normal(size=n) * 2 + 1
        m = fit_1d_map(u, v)
        assert transport_cost(m, u, p=p) == pytest.approx(exact_assignment_cost(u, v, p), abs=1e-9)


def test_monotone_on_random_inputs(generator):
    for _ in range(20):
        u = generator.normal(size=30)
        v = generator.exponential(size=45)
        m = fit_1d_map(u, v, generator.uniform(0.5, 1.5, 30), generator.uniform(0.5, 1.5, 45))
        t = np.sort(generator.uniform(-4, 4, 200))
        assert np.all(np.diff(apply_1d_map(m, t)) >= 0)


def test_translation_equivariance(generator):
    u = generator.normal(size=12)
    v = generator.normal(size=12)
    base = fit_1d_map(u, v)
    shifted = fit_1d_map(u + 2.5, v)
    assert_allclose(shifted.source_knots, base.source_knots + 2.5, atol=1e-12)
    assert_array_equal(shifted.target_knots, base.target_knots)
    assert transport_cost(fit_1d_map(u, u - 1.75), u) == pytest.approx(1.75)


def test_negation_symmetry(generator):
    u = generator.normal(size=9)
    v = generator.normal(size=9)
    forward = apply_1d_map(fit_1d_map(u, v), u)
    negated = apply_1d_map(fit_1d_map(-u, -v), -u)
    assert_allclose(negated, -forward, atol=1e-12)


def test_quantile_table_reproduces_sorted_table(generator):
    u = generator.normal(size=25)
    v = generator.normal(size=25)
    sorted_map = fit_1d_map(u, v, method="sorted")
    weighted = fit_1d_map(u, v, np.full(25, 2.0), np.full(25, 2.0), method="quantile")
    assert_allclose(apply_1d_map(weighted, u), apply_1d_map(sorted_map, u), atol=1e-12)


def test_wasserstein_1d(generator):
    u = generator.normal(size=8)
    v = generator.normal(size=8)
    for p in (1, 2):
        assert wasserstein_1d(u, v, p=p) == pytest.approx(exact_assignment_cost(u, v, p), abs=1e-12)
    assert wasserstein_1d([0.0, 1.0], [2.0], p=2) == pytest.approx(np.sqrt(2.5))
    assert wasserstein_1d([0.0, 1.0], [0.0, 1.0], [0.5, 0.5], [0.75, 0.25], p=1) == pytest.approx(0.25)


def test_map_file_round_trip(tmp_path, generator):
    m = fit_1d_map(generator.normal(size=10), generator.normal(size=13), extrapolation=Extrapolation.LINEAR)
    save_map(m, tmp_path / "map.csv")
    loaded = load_map(tmp_path / "map.csv")
    assert loaded.extrapolation is Extrapolation.LINEAR
    assert_array_equal(loaded.source_knots, m.source_knots)
    assert_array_equal(loaded.target_knots, m.target_knots)
