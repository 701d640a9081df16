import os

os.environ.setdefault("NHLAT_CACHE", "0")

import numpy as np
import pytest

from lattice.model import figure_models, make_chain


@pytest.fixture(scope="session")
def models():
    return figure_models()


@pytest.fixture(scope="session")
def trivial_half(models):
    return models["trivial_critical_half"]


@pytest.fixture(scope="session")
def trivial_one(models):
    return models["trivial_critical_one"]


@pytest.fixture(scope="session")
def flux_a(models):
    return models["flux_a"]


@pytest.fixture(scope="session")
def flux_b(models):
    return models["flux_b"]


@pytest.fixture(scope="session")
def cosine_chain():
    """Hermitian chain, E(k) = 2 cos k."""
    return make_chain(1.0)


@pytest.fixture(scope="session")
def hatano_nelson():
    """E(k) = e^{-ik} + 0.5 e^{ik}."""
    return make_chain(1.0, 0.5)


def match_sets(a, b):
    """Largest distance from a point of `a` to the nearest point of `b`, and vice versa."""
    a, b = np.asarray(a).ravel(), np.asarray(b).ravel()
    distance = np.abs(a[:, None] - b[None, :])
    return max(distance.min(axis=1).max(), distance.min(axis=0).max())
