# Quantum kernel and gate dynamics
from ksion.quantum.core import ObservableSpec, QuantumState, bell_state, fig5_specs
from ksion.dynamics.core import MsParams
from ksion.dynamics.ms_gate import fidelity_bound, ms_evolve, parity_scan

# Measurement and analysis
from ksion.measurement.core import ConfusionMatrix, NoiseModel
from ksion.measurement.repeatability import repeatability_protocol
from ksion.measurement.trials import measure_trial, sample_context
from ksion.analysis.calibration import calibrate_phases
from ksion.analysis.contextuality import ContextualityReport, build_report
from ksion.analysis.core import (
    chsh_statistic,
    correlator,
    epsilon_fraction,
    epsilon_mnc,
    epsilon_sequential,
    violation_significance,
)
from ksion.crosstalk.estimator import crosstalk_budget, raman_rabi

# Experiment driver
from ksion.driver.config import ExperimentConfig, load_config
from ksion.driver.experiment import run_simulation
from ksion.driver.ingest import ingest
from ksion.driver.report import report, table1_report

# Loggers
from ksion.utils.logx import Logger, StatsLogger

# Version
from ksion.version import __version__
