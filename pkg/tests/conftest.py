import math

import numpy as np
import pytest

from contextuality.catalog import chsh_quantum, chsh_scenario, mim_counterexample, ncycle_scenario, pr_box
from contextuality.documents import model_to_document, write_document
from contextuality.empirical import new_model

SQRT2_MINUS_1 = math.sqrt(2) - 1
GAP = 1e-8


def dirichlet_model(scenario, rng, concentration=1.0):
    """Independent Dirichlet table per context; signalling in general"""
    tables = [rng.dirichlet(np.full(size, concentration)) for size in scenario.context_sizes]
    return new_model(scenario, tables)


@pytest.fixture
def chsh():
    return chsh_scenario()


@pytest.fixture
def five_cycle():
    return ncycle_scenario(5)


@pytest.fixture
def pr():
    return pr_box()


@pytest.fixture
def pr_exact():
    return pr_box(exact=True)


@pytest.fixture
def quantum():
    return chsh_quantum()


@pytest.fixture
def counterexample():
    return mim_counterexample()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def model_file(tmp_path):
    """Write a model document and return its path"""
    def write(model, name='model.json'):
        path = tmp_path / name
        write_document(path, model_to_document(model))
        return path
    return write
