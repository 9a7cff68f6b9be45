import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from ppmmpy.exceptions import DimensionMismatchError, SampleError, SampleFileError
from ppmmpy.sample import ar1_covariance, load_sample, random_weights, sample_gaussian, save_sample
from ppmmpy.sample.models import GaussianSpec, RngState, Sample


def test_load_sample_uniform(write_text):
    sample = load_sample(write_text("x.csv", "x1,x2\n0,0\n1,1\n2,2\n"))
    assert (sample.n, sample.d) == (3, 2)
    assert_allclose(sample.weights, [1 / 3] * 3)
    assert sample.is_uniform


def test_load_sample_weight_column_is_normalized(write_text):
    sample = load_sample(write_text("x.csv", "a,weight,b\n0,1,5\n1,1,6\n2,2,7\n"))
    assert sample.d == 2
    assert_allclose(sample.weights, [0.25, 0.25, 0.5])
    assert_array_equal(sample.points[:, 1], [5, 6, 7])


def test_load_sample_named_weight_column(write_text):
    sample = load_sample(write_text("x.csv", "x,w\n0,3\n1,1\n"), weight_column="w")
    assert_allclose(sample.weights, [0.75, 0.25])


def test_load_sample_reports_non_finite_cell(write_text):
    with pytest.raises(SampleFileError) as info:
        load_sample(write_text("x.csv", "x1,x2\n0,0\n1,NaN\n"))
    assert info.value.row == 2
    assert info.value.column == "x2"
    assert "row 2, column 'x2'" in str(info.value)


@pytest.mark.parametrize(
    "text",
    [
        "x1\n1\n",
        "x1,weight\n1,-1\n2,1\n3,1\n",
        "x1,x2\n1,2\n3\n",
        "x1\n1\nabc\n",
        "",
        "x,weight\n1,1\n2,0\n",
    ],
)
def test_load_sample_rejects(write_text, text):
    with pytest.raises(SampleFileError):
        load_sample(write_text("bad.csv", text))


def test_load_sample_rejects_invalid_utf8(tmp_path):
    path = tmp_path / "latin1.csv"
    path.write_bytes(b"x1,x2\n0,0\n1,\xff\xfe\n")
    with pytest.raises(SampleFileError, match="malformed CSV") as info:
        load_sample(path)
    assert info.value.path == str(path)


def test_save_load_round_trip(tmp_path, generator):
    sample = Sample(generator.standard_normal((20, 4)) * 1e3, generator.uniform(0.5, 1.5, 20))
    save_sample(sample, tmp_path / "s.csv")
    loaded = load_sample(tmp_path / "s.csv")
    assert_allclose(loaded.points, sample.points, rtol=0, atol=1e-12)
    assert_allclose(loaded.weights, sample.weights, rtol=0, atol=1e-12)


def test_sample_validation():
    with pytest.raises(SampleError):
        Sample(np.zeros((1, 2)))
    with pytest.raises(SampleError):
        Sample([[0.0], [np.inf]])
    with pytest.raises(DimensionMismatchError):
        Sample(np.zeros((3, 2)), [1, 1])
    with pytest.raises(SampleError):
        Sample(np.zeros((3, 2)), [1, 0, 0])


def test_sample_is_read_only():
    sample = Sample(np.arange(6.0).reshape(3, 2))
    with pytest.raises(ValueError):
        sample.points[0, 0] = 1.0


def test_gaussian_spec_validation():
    with pytest.raises(SampleError):
        GaussianSpec([0, 0], [[1, 0.5], [0.4, 1]])
    with pytest.raises(SampleError):
        GaussianSpec([0, 0], [[1, 2], [2, 1]])
    with pytest.raises(DimensionMismatchError):
        GaussianSpec([0, 0, 0], np.eye(2))


def test_sample_gaussian_moments():
    x, _ = sample_gaussian(GaussianSpec([0, 0], np.eye(2)), 100_000, RngState(1))
    assert np.all(np.abs(x.mean()) < 0.02)
    y, _ = sample_gaussian(GaussianSpec([3, 3], np.eye(2)), 100_000, RngState(2))
    assert np.all(np.abs(np.cov(y.points, rowvar=False) - np.eye(2)) < 0.03)


def test_sample_gaussian_is_deterministic():
    spec = GaussianSpec(np.zeros(3), ar1_covariance(3, 0.5))
    a, state_a = sample_gaussian(spec, 10, RngState(42))
    b, state_b = sample_gaussian(spec, 10, RngState(42))
    assert_array_equal(a.points, b.points)
    c, _ = sample_gaussian(spec, 10, state_a)
    assert not np.array_equal(a.points, c.points)


def test_rng_streams_are_independent():
    a = RngState(5).generator().standard_normal(4)
    b = RngState(5).spawn(1).generator().standard_normal(4)
    assert not np.array_equal(a, b)


def test_random_weights_range():
    weights, _ = random_weights(1000, RngState(3))
    assert weights.min() >= 0.5 and weights.max() < 1.5


def test_ar1_covariance():
    assert_allclose(ar1_covariance(2, 0.5), [[1, 0.5], [0.5, 1]])
    assert_array_equal(ar1_covariance(3, 0.0), np.eye(3))
    assert ar1_covariance(3, 0.8)[0, 2] == pytest.approx(0.64)
    for d in (1, 10, 100):
        for rho in (-0.99, 0.5, 0.99):
            assert np.linalg.eigvalsh(ar1_covariance(d, rho)).min() > 0
    with pytest.raises(SampleError):
        ar1_covariance(3, 1.0)
