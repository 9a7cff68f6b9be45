import numpy as np
import pytest

from ppmmpy.sample import ar1_covariance, sample_gaussian
from ppmmpy.sample.models import GaussianSpec, RngState, Sample


def gaussian_pair(d: int, mean_x: float = -2.0, mean_y: float = 2.0):
    """The correlated Gaussian pair of the simulation studies."""
    return (
        GaussianSpec(np.full(d, mean_x), ar1_covariance(d, 0.8)),
        GaussianSpec(np.full(d, mean_y), ar1_covariance(d, 0.5)),
    )


def draw_pair(d: int, n: int, seed: int, n_y=None):
    source, target = gaussian_pair(d)
    rng = RngState(seed)
    x, rng = sample_gaussian(source, n, rng)
    y, _ = sample_gaussian(target, n if n_y is None else n_y, rng)
    return x, y


@pytest.fixture
def generator():
    return np.random.default_rng(20240607)


@pytest.fixture
def small_pair():
    return draw_pair(3, 200, seed=7)


@pytest.fixture
def write_text(tmp_path):
    def _write(name: str, text: str):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write


@pytest.fixture
def uniform_sample(generator):
    return Sample(generator.standard_normal((50, 3)))
