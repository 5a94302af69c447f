import numpy as np
import pytest

from slimsim.array import ArrayGeometry, SlimArray


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def random_array(rng):
    """Full-size array holding a random memory plane, all cells absolute."""
    arr = SlimArray()
    arr.write_memory_plane(rng.integers(0, 2, size=arr.geometry.shape))
    return arr


@pytest.fixture
def small_geometry():
    return ArrayGeometry(mat_rows=8, mat_cols=8, mats_per_bank=4, banks=2)
