from ksion.analysis.calibration import (
    FrameCalibration,
    calibrate_phases,
    depolarization_for_target,
    exact_chsh,
)
from ksion.analysis.contextuality import ContextualityReport, build_report
from ksion.analysis.core import (
    ContextCounts,
    CorrelatorEstimate,
    MarginalTable,
    bootstrap_epsilon_mnc,
    chsh_statistic,
    correlator,
    epsilon_fraction,
    epsilon_mnc,
    epsilon_sequential,
    marginal_table,
    violation_significance,
)
