import numpy as np
import pytest

from miprune import EmbeddingMatrix, row_normalize


def unit_matrix(rng, n, d, kind="visual"):
    """Random matrix with unit-norm rows."""
    return row_normalize(EmbeddingMatrix(rng.normal(size=(n, d)), kind=kind))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
