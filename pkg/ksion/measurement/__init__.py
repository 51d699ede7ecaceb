from ksion.measurement.core import (
    CONTEXTS,
    SETTING_IDS,
    ConfusionMatrix,
    NoiseModel,
    collapse_after_measurement,
    exact_recorded_chsh,
    exact_recorded_statistics,
)
from ksion.measurement.repeatability import (
    RepeatabilityRecord,
    mean_repeatability,
    repeatability_protocol,
)
from ksion.measurement.strategies import NoncontextualStrategy
from ksion.measurement.trials import TrialRecord, interleave, measure_trial, sample_context
