from ksion.crosstalk.core import IonOpticalParams, load_ion_levels
from ksion.crosstalk.estimator import (
    CrosstalkBudget,
    comb_detuning,
    crosstalk_budget,
    intensity_for_rabi,
    max_population_transfer,
    raman_rabi,
)
