import numpy as np
import pytest

from utils.data_providers import IndexSeries, synth_series
from utils.networks import build_small_world


@pytest.fixture
def ramp():
    """F_j = j + 1, j = 0..199."""
    return IndexSeries(np.arange(1.0, 201.0), label="ramp")


@pytest.fixture
def gbm():
    return synth_series("gbm", length=2000, sigma=0.01, seed=3)


@pytest.fixture
def small_lattice():
    return build_small_world(L=10, p=0.0, seed=0)


@pytest.fixture
def write_csv(tmp_path):
    """Write `text` to a CSV in tmp_path and return its path."""

    def _write(text, name="series.csv"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write
