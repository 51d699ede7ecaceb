from ksion.dynamics.core import MsParams, thermal_populations
from ksion.dynamics.ms_gate import (
    EvolutionTrace,
    ParityScan,
    bell_fidelity,
    fidelity_bound,
    gate_phase,
    ms_evolution_trace,
    ms_evolve,
    parity_scan,
    parity_to_csv,
    trace_to_csv,
)
