"""Shared fixtures. Tables are session-scoped; nothing in the suite mutates
a table after construction."""

import numpy as np
import pytest

from numbra.embeddings import synth_table


@pytest.fixture(scope="session")
def table8():
    return synth_table(dim=8, seed=0)


@pytest.fixture(scope="session")
def table16():
    return synth_table(dim=16, seed=0)


@pytest.fixture(scope="session")
def table2():
    return synth_table(dim=2, seed=1)


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
