import os
import sys

import hypothesis
import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

hypothesis.settings.register_profile("default", max_examples=60, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=10, deadline=None)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def small_world():
    """A small three-period synthetic dataset shared by estimation and ranking tests."""
    from weightcraft.datagen import DatagenConfig, generate_dataset

    cfg = DatagenConfig(n_urls=300, n_periods=3, seed=11)
    table, truth = generate_dataset(cfg)
    return cfg, table, truth


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)
