"""
Building blocks for the spin-motion simulation: gate parameters, phonon
operators, thermal states and the piecewise propagator.
"""
from dataclasses import dataclass, asdict
import warnings

import numpy as np
from scipy.linalg import expm

from ksion.quantum.core import (
    IDENTITY_2,
    QUBIT_DIMS,
    SIGMA_X,
    SIGMA_Z,
    QuantumState,
    embed,
    tensor,
)
from ksion.utils.errors import ParameterError, TruncationError

# Population allowed on the highest retained Fock level.
LEAKAGE_TOL = 1e-4

# Convergence checks: step halving, and a cutoff raised by CUTOFF_STEP levels.
STEP_TOL = 1e-6
CUTOFF_STEP = 5
CUTOFF_TOL = 1e-5

# Fourth-order commutator-free Magnus coefficients and Gauss nodes.
_SQRT3 = np.sqrt(3.0)
CF4_ALPHA_1 = (3 - 2 * _SQRT3) / 12
CF4_ALPHA_2 = (3 + 2 * _SQRT3) / 12
CF4_NODE_1 = 0.5 - _SQRT3 / 6
CF4_NODE_2 = 0.5 + _SQRT3 / 6


def khz_to_rad_per_us(f_khz):
    return 2 * np.pi * f_khz * 1e-3


@dataclass(frozen=True)
class MsParams:
    """
    Molmer-Sorensen drive on the axial out-of-phase mode.

    Args:
        detuning_khz: Sideband detuning delta.
        gate_time_us: Gate duration. Defaults to the closed-loop time 1/delta.
        mode_freq_mhz: Mode frequency f_z (recorded, the Lamb-Dicke model does
            not depend on it).
        sideband_rabi_khz: Sideband Rabi frequency. Defaults to delta/2, the
            single-loop maximally entangling value.
        n_max: Highest retained Fock level.
        nbar_oop: Thermal occupation of the driven mode.
        nbar_ip: Thermal occupation of the in-phase mode (recorded; its effect
            enters through ``dephasing_khz``).
        dephasing_khz: Per-qubit pure-dephasing rate. Zero disables the channel.
        max_step_us: Longest propagator step.
    """

    detuning_khz: float = 22.0
    gate_time_us: float = None
    mode_freq_mhz: float = 1.67
    sideband_rabi_khz: float = None
    n_max: int = 15
    nbar_oop: float = 0.0
    nbar_ip: float = 0.0
    dephasing_khz: float = 0.0
    max_step_us: float = 0.1

    def __post_init__(self):
        if not self.detuning_khz > 0:
            raise ParameterError("Sideband detuning must be positive, got %r." % self.detuning_khz)
        if self.gate_time_us is not None and self.gate_time_us < 0:
            raise ParameterError("Gate time must be non-negative.")
        if self.sideband_rabi_khz is not None and self.sideband_rabi_khz < 0:
            raise ParameterError("Sideband Rabi frequency must be non-negative.")
        if self.nbar_oop < 0 or self.nbar_ip < 0:
            raise ParameterError("Thermal occupations must be non-negative.")
        if self.dephasing_khz < 0:
            raise ParameterError("Dephasing rate must be non-negative.")
        if not self.max_step_us > 0:
            raise ParameterError("max_step_us must be positive.")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ParameterError("n_max must be a positive integer.")
        if self.n_max < 5 * self.nbar_oop + 5:
            raise ParameterError(
                "Phonon cutoff n_max=%d too small for nbar=%g (need >= %g)."
                % (self.n_max, self.nbar_oop, 5 * self.nbar_oop + 5)
            )

    @property
    def rabi_khz(self):
        if self.sideband_rabi_khz is None:
            return self.detuning_khz / 2
        return self.sideband_rabi_khz

    @property
    def gate_time(self):
        if self.gate_time_us is None:
            return 1e3 / self.detuning_khz
        return self.gate_time_us

    @property
    def dims(self):
        return QUBIT_DIMS + (self.n_max + 1,)

    def to_dict(self):
        return asdict(self)


def annihilation(n_max):
    return np.diag(np.sqrt(np.arange(1, n_max + 1)), k=1).astype(complex)


def collective_sx():
    return tensor(SIGMA_X, IDENTITY_2) + tensor(IDENTITY_2, SIGMA_X)


def thermal_populations(nbar, n_max):
    """Geometric occupation distribution truncated at n_max and renormalized."""
    n = np.arange(n_max + 1)
    if nbar == 0:
        p = (n == 0).astype(float)
    else:
        ratio = nbar / (1.0 + nbar)
        p = ratio ** n / (1.0 + nbar)
    return p / p.sum()


def initial_state(params):
    """|00> (x) thermal(nbar_oop) on the truncated phonon space."""
    spin = np.zeros((4, 4), dtype=complex)
    spin[0, 0] = 1
    phonon = np.diag(thermal_populations(params.nbar_oop, params.n_max)).astype(complex)
    return QuantumState(np.kron(spin, phonon), params.dims)


class MsHamiltonian:
    """
    H(t) = (g/2) S_x (x) (a^+ e^{i delta t} + a e^{-i delta t}), t in microseconds.
    """

    def __init__(self, params):
        self.params = params
        self.g = khz_to_rad_per_us(params.rabi_khz)
        self.delta = khz_to_rad_per_us(params.detuning_khz)
        a = annihilation(params.n_max)
        sx = collective_sx()
        self._raise = 0.5 * self.g * np.kron(sx, a.conj().T)
        self._lower = 0.5 * self.g * np.kron(sx, a)

    def __call__(self, t):
        phase = np.exp(1j * self.delta * t)
        return phase * self._raise + np.conj(phase) * self._lower


def magnus_step(hamiltonian, t, h):
    """Propagator over [t, t+h] from one commutator-free fourth-order step."""
    h1 = hamiltonian(t + CF4_NODE_1 * h)
    h2 = hamiltonian(t + CF4_NODE_2 * h)
    first = expm(-1j * h * (CF4_ALPHA_2 * h1 + CF4_ALPHA_1 * h2))
    second = expm(-1j * h * (CF4_ALPHA_1 * h1 + CF4_ALPHA_2 * h2))
    return second @ first


class Dephasing:
    """Independent z-dephasing on both qubits over a step of length dt."""

    def __init__(self, rate_khz, dims):
        self.rate = rate_khz * 1e-3
        self.z_ops = [embed(SIGMA_Z, slot, dims) for slot in (0, 1)]

    def flip_probability(self, dt):
        return 0.5 * (1 - np.exp(-self.rate * dt))

    def __call__(self, rho, dt):
        if self.rate == 0:
            return rho
        q = self.flip_probability(dt)
        for z in self.z_ops:
            rho = (1 - q) * rho + q * (z @ rho @ z)
        return rho


def step_grid(t0, t1, max_step):
    """Uniform steps no longer than ``max_step`` covering [t0, t1]."""
    span = t1 - t0
    if span <= 0:
        return 0, 0.0
    n = int(np.ceil(span / max_step - 1e-12))
    return n, span / n


class Propagator:
    """
    Density-matrix propagation under ``MsHamiltonian`` with optional dephasing.
    """

    def __init__(self, params, max_step_us=None):
        self.params = params
        self.max_step = max_step_us or params.max_step_us
        self.hamiltonian = MsHamiltonian(params)
        self.dephasing = Dephasing(params.dephasing_khz, params.dims)

    def evolve(self, rho, t0, t1):
        n, dt = step_grid(t0, t1, self.max_step)
        t = t0
        for _ in range(n):
            u = magnus_step(self.hamiltonian, t, dt)
            rho = u @ rho @ u.conj().T
            rho = self.dephasing(rho, dt)
            t += dt
        return 0.5 * (rho + rho.conj().T)


def top_fock_population(rho, dims):
    """Population of the highest retained phonon level."""
    d_spin, d_ph = int(np.prod(dims[:-1])), dims[-1]
    diag = np.real(np.diag(rho)).reshape(d_spin, d_ph)
    return float(diag[:, -1].sum())


def check_truncation(rho, dims):
    leak = top_fock_population(rho, dims)
    if leak > LEAKAGE_TOL:
        raise TruncationError(
            "Top Fock level holds population %.3g > %g; raise n_max." % (leak, LEAKAGE_TOL)
        )
    return leak


def warn_if_unconverged(coarse, fine, tol=STEP_TOL, what="Step-halving"):
    diff = float(np.max(np.abs(np.asarray(coarse) - np.asarray(fine))))
    if diff >= tol:
        warnings.warn("%s changed populations by %.2e (tolerance %.0e)." % (what, diff, tol))
    return diff
