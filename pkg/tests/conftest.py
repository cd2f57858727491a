from causalicm.simgen import SimScenario, simulate
import numpy as np
import pytest


@pytest.fixture(autouse=True)
def output_dir(tmp_path, monkeypatch):
    """Keep log files and default outputs inside the test's temporary directory."""
    monkeypatch.setenv("CAUSALICM_OUTPUT_DIR", str(tmp_path))
    return tmp_path


@pytest.fixture
def small_uni1():
    """A small Uni1 draw: roughly 100 trial and 150 observational units."""
    return simulate(SimScenario("uni1", pool_size=400, n_obs=150), 3)


@pytest.fixture
def rng():
    return np.random.default_rng(20260)
