import hypothesis
import numpy as np
import pytest

from isacsim.waveform import NumerologyConfig

hypothesis.settings.register_profile("ci", max_examples=30, deadline=None)
hypothesis.settings.load_profile("ci")


@pytest.fixture
def small():
    return NumerologyConfig.small()


@pytest.fixture
def tiny():
    # N_c = 64, M = 4, N_cp = 5
    return NumerologyConfig(n_subcarriers=64, n_symbols=4)


@pytest.fixture
def paper():
    return NumerologyConfig.paper()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
