import matplotlib

matplotlib.use("Agg")

import pytest

from ksion.analysis.calibration import calibrate_phases
from ksion.driver.config import ExperimentConfig, NoiseConfig
from ksion.driver.report import load_table1
from ksion.quantum.core import bell_state, fig5_specs


@pytest.fixture
def bell():
    return bell_state()


@pytest.fixture
def specs():
    return fig5_specs()


@pytest.fixture
def calibrated_specs(bell, specs):
    return calibrate_phases(bell, specs).apply(specs)


@pytest.fixture
def table1_counts():
    counts, _ = load_table1()
    return counts


@pytest.fixture
def small_config():
    """An ideal-state run small enough for unit tests."""
    return ExperimentConfig(
        seed=7,
        trials_per_setting=2000,
        repeatability_runs=300,
        state_source="ideal",
        noise=NoiseConfig(yb=[0.01, 0.02], ba=[0.02, 0.01], depolarization=0.1),
        exp_name="unit",
    ).validate()
