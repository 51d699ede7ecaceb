"""
Molmer-Sorensen state preparation and its quality metrics.
"""
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd

from ksion.dynamics.core import (
    CUTOFF_STEP,
    CUTOFF_TOL,
    Propagator,
    check_truncation,
    initial_state,
    warn_if_unconverged,
)
from ksion.quantum.core import (
    QUBIT_DIMS,
    SIGMA_Z,
    QuantumState,
    apply_unitary,
    expectation,
    partial_trace,
    rotation,
    tensor,
)
from ksion.utils.errors import DimensionError, EstimationError, ParameterError

MIN_PARITY_POINTS = 8
PARITY_OPERATOR = tensor(SIGMA_Z, SIGMA_Z)
POPULATION_LABELS = ("P00", "P01", "P10", "P11")


@dataclass
class EvolutionTrace:
    times: np.ndarray
    populations: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.populations = np.asarray(self.populations, dtype=float)
        sums = self.populations.sum(axis=1)
        assert np.all(np.abs(sums - 1) < 1e-6), "Populations do not sum to one."

    def column(self, label):
        return self.populations[:, POPULATION_LABELS.index(label)]

    @property
    def parity(self):
        p = self.populations
        return p[:, 0] + p[:, 3] - p[:, 1] - p[:, 2]

    def to_frame(self):
        frame = pd.DataFrame(self.populations, columns=list(POPULATION_LABELS))
        frame.insert(0, "time_us", self.times)
        return frame


@dataclass
class ParityScan:
    phases: np.ndarray
    parity: np.ndarray
    contrast: float
    fit_coefficients: tuple = (0.0, 0.0, 0.0)

    def fitted(self, phases=None):
        phases = self.phases if phases is None else np.asarray(phases)
        a, b, c = self.fit_coefficients
        return a * np.cos(2 * phases) + b * np.sin(2 * phases) + c

    def to_frame(self):
        return pd.DataFrame({"phase_rad": self.phases, "parity": self.parity})


def _run(params, times, max_step_us=None, trace_out=True):
    propagator = Propagator(params, max_step_us)
    rho = np.array(initial_state(params).rho)
    t_prev = 0.0
    states = []
    for t in times:
        rho = propagator.evolve(rho, t_prev, t)
        t_prev = t
        check_truncation(rho, params.dims)
        full = QuantumState(rho / np.trace(rho).real, params.dims, tol=1e-8)
        states.append(partial_trace(full, (0, 1)) if trace_out else full)
    return states


def _two_qubit_populations(states):
    return np.array(
        [(s if s.dims == QUBIT_DIMS else partial_trace(s, (0, 1))).populations() for s in states]
    )


def _check_convergence(params, times, pops):
    """Warn when halving the step or raising the cutoff moves ``pops``."""
    fine = _two_qubit_populations(_run(params, times, params.max_step_us / 2))
    warn_if_unconverged(pops, fine)
    wider = replace(params, n_max=params.n_max + CUTOFF_STEP)
    warn_if_unconverged(
        pops,
        _two_qubit_populations(_run(wider, times)),
        tol=CUTOFF_TOL,
        what="Raising n_max by %d" % CUTOFF_STEP,
    )


def _validate_times(times):
    times = np.asarray(times, dtype=float).reshape(-1)
    if np.any(times < 0):
        raise ParameterError("Evolution times must be non-negative.")
    if np.any(np.diff(times) < 0):
        raise ParameterError("Evolution times must be sorted.")
    return times


def ms_evolve(params, t=None, trace_out=True, convergence_check=False):
    """
    Evolve |00> (x) thermal(nbar_oop) for ``t`` microseconds.

    Args:
        params (MsParams): Drive parameters.
        t (float): Evolution time. Defaults to ``params.gate_time``.
        trace_out (bool): Return the two-qubit state with the phonon mode
            traced out; otherwise the full qubit (x) phonon state.
        convergence_check (bool): Repeat at half the step size and with
            n_max raised by 5; warn when populations move by 1e-6 or 1e-5
            respectively.

    Raises:
        TruncationError: if the top Fock level ends up populated above 1e-4.
    """
    t = params.gate_time if t is None else float(t)
    times = _validate_times([t])
    state = _run(params, times, trace_out=trace_out)[0]
    if convergence_check:
        _check_convergence(params, times, _two_qubit_populations([state]))
    return state


def ms_evolution_trace(params, times, convergence_check=False):
    """Two-qubit populations at each of the sorted ``times``."""
    times = _validate_times(times)
    pops = np.array([s.populations() for s in _run(params, times)])
    if convergence_check:
        _check_convergence(params, times, pops)
    return EvolutionTrace(times, pops / pops.sum(axis=1, keepdims=True))


def parity_scan(state, phases):
    """
    Parity P00 + P11 - P01 - P10 after R(pi/2, phi) on both ions, per phase.

    The contrast is the amplitude of a least-squares fit of
    a cos(2 phi) + b sin(2 phi) + c.
    """
    if state.dims != QUBIT_DIMS:
        raise DimensionError("Parity scans need a two-qubit state, got %s." % (state.dims,))
    phases = np.asarray(phases, dtype=float).reshape(-1)
    if len(phases) < MIN_PARITY_POINTS:
        raise EstimationError(
            "Parity fit needs at least %d phases, got %d." % (MIN_PARITY_POINTS, len(phases))
        )
    parity = []
    for phi in phases:
        r = rotation(np.pi / 2, phi)
        rotated = apply_unitary(state, tensor(r, r))
        parity.append(expectation(rotated, PARITY_OPERATOR))
    parity = np.clip(np.array(parity), -1.0, 1.0)

    design = np.column_stack([np.cos(2 * phases), np.sin(2 * phases), np.ones_like(phases)])
    coef, *_ = np.linalg.lstsq(design, parity, rcond=None)
    contrast = float(min(np.hypot(coef[0], coef[1]), 1.0))
    return ParityScan(phases, parity, contrast, tuple(float(c) for c in coef))


def fidelity_bound(p00_plus_p11, contrast):
    """Bell-state fidelity estimate (P00 + P11 + contrast)/2."""
    for name, val in (("p00_plus_p11", p00_plus_p11), ("contrast", contrast)):
        if not 0.0 <= val <= 1.0:
            raise ParameterError("%s=%r outside [0, 1]." % (name, val))
    return 0.5 * (p00_plus_p11 + contrast)


def gate_phase(state):
    """Phase chi of the |11><00| coherence, i.e. of (|00> + e^{i chi}|11>)/sqrt(2)."""
    return float(np.angle(state.rho[3, 0]))


def bell_fidelity(state):
    """Fidelity to the closest (|00> + e^{i chi}|11>)/sqrt(2), maximized over chi."""
    rho = state.rho
    return float(0.5 * (rho[0, 0].real + rho[3, 3].real) + abs(rho[3, 0]))


def trace_to_csv(trace, path):
    trace.to_frame().to_csv(path, index=False, float_format="%.10g")
    return path


def parity_to_csv(scan, path):
    scan.to_frame().to_csv(path, index=False, float_format="%.10g")
    return path
