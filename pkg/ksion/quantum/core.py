"""
Dense linear-algebra kernel for the two-ion system.

Basis ordering is |q_Yb q_Ba> with the Yb qubit as the most significant
index; a phonon mode, when present, is appended last.
"""
from dataclasses import dataclass, replace
from functools import reduce

import numpy as np

from ksion.utils.errors import DimensionError, ParameterError

# Default tolerances.
STATE_TOL = 1e-10
UNITARY_TOL = 1e-12
EIGEN_TOL = 1e-9
IMAG_TOL = 1e-9

IDENTITY_2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

YB, BA = "Yb", "Ba"
IONS = (YB, BA)

# Tensor slot of each ion in the two-qubit register.
ION_SLOT = {YB: 0, BA: 1}

# Observables 0 and 2 live on the Yb ion, 1 and 3 on the Ba ion.
OBSERVABLE_ION = (YB, BA, YB, BA)

QUBIT_DIMS = (2, 2)


def is_hermitian(a, tol=STATE_TOL):
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and np.allclose(a, a.conj().T, atol=tol, rtol=0)


def is_unitary(u, tol=UNITARY_TOL):
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=tol, rtol=0)


def rotation(theta, phi):
    """
    Single-qubit rotation by ``theta`` about cos(phi) x + sin(phi) y.

    .. math::

        R(\\theta, \\phi) = \\begin{pmatrix}
            \\cos\\frac{\\theta}{2} & -i e^{-i\\phi} \\sin\\frac{\\theta}{2} \\\\
            -i e^{i\\phi} \\sin\\frac{\\theta}{2} & \\cos\\frac{\\theta}{2}
        \\end{pmatrix}
    """
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [[c, -1j * np.exp(-1j * phi) * s], [-1j * np.exp(1j * phi) * s, c]],
        dtype=complex,
    )


def tensor(*ops):
    """Kronecker product of ``ops`` in slot order (Yb, Ba, phonon)."""
    assert len(ops) > 0, "tensor() needs at least one operand."
    return reduce(np.kron, [np.asarray(op, dtype=complex) for op in ops])


def embed(op, slot, dims):
    """Lift a single-subsystem operator into the full tensor space."""
    dims = tuple(dims)
    op = np.asarray(op, dtype=complex)
    if not 0 <= slot < len(dims):
        raise DimensionError("Slot %d outside a %d-subsystem space." % (slot, len(dims)))
    if op.shape != (dims[slot], dims[slot]):
        raise DimensionError(
            "Operator of shape %s does not fit subsystem %d of dimension %d."
            % (op.shape, slot, dims[slot])
        )
    factors = [np.eye(d, dtype=complex) for d in dims]
    factors[slot] = op
    return tensor(*factors)


class QuantumState:
    """
    Density operator on a tensor-product Hilbert space.

    The matrix is validated on construction (unit trace, Hermitian,
    non-negative spectrum) and stored read-only.
    """

    def __init__(self, rho, dims=QUBIT_DIMS, tol=STATE_TOL, check=True):
        rho = np.array(rho, dtype=complex)
        dims = tuple(int(d) for d in dims)
        d = int(np.prod(dims))
        if rho.shape != (d, d):
            raise DimensionError(
                "Density matrix shape %s does not match dims %s." % (rho.shape, dims)
            )
        if check:
            tr = np.trace(rho)
            if abs(tr - 1) > tol:
                raise ParameterError("State trace is %r, expected 1." % tr)
            if not is_hermitian(rho, tol):
                raise ParameterError("Density matrix is not Hermitian.")
            if np.linalg.eigvalsh(rho).min() < -EIGEN_TOL:
                raise ParameterError("Density matrix has a negative eigenvalue.")
        rho.setflags(write=False)
        self.rho = rho
        self.dims = dims

    @property
    def dim(self):
        return self.rho.shape[0]

    @classmethod
    def from_ket(cls, ket, dims=QUBIT_DIMS):
        ket = np.asarray(ket, dtype=complex).reshape(-1)
        norm = np.linalg.norm(ket)
        if norm == 0:
            raise ParameterError("Cannot build a state from the zero vector.")
        ket = ket / norm
        return cls(np.outer(ket, ket.conj()), dims)

    @classmethod
    def basis_state(cls, index, dims=QUBIT_DIMS):
        ket = np.zeros(int(np.prod(dims)), dtype=complex)
        ket[index] = 1
        return cls.from_ket(ket, dims)

    @classmethod
    def maximally_mixed(cls, dims=QUBIT_DIMS):
        d = int(np.prod(dims))
        return cls(np.eye(d, dtype=complex) / d, dims)

    def populations(self):
        """Computational-basis populations, clipped to [0, 1]."""
        return np.clip(np.real(np.diag(self.rho)), 0.0, 1.0)

    def __repr__(self):
        return "QuantumState(dims=%s)" % (self.dims,)


def bell_state(chi=np.pi / 2):
    """(|00> + e^{i chi}|11>)/sqrt(2); chi = pi/2 gives the prepared state."""
    ket = np.zeros(4, dtype=complex)
    ket[0] = 1
    ket[3] = np.exp(1j * chi)
    return QuantumState.from_ket(ket)


def expectation(state, observable):
    """tr(rho O) for a Hermitian ``observable``; the imaginary part is discarded."""
    observable = np.asarray(observable, dtype=complex)
    if observable.shape != state.rho.shape:
        raise DimensionError(
            "Observable shape %s does not match state dimension %d."
            % (observable.shape, state.dim)
        )
    if not is_hermitian(observable):
        raise ParameterError("Observable is not Hermitian.")
    val = np.trace(state.rho @ observable)
    assert abs(val.imag) < IMAG_TOL, "Expectation has imaginary part %g." % val.imag
    return float(val.real)


def apply_unitary(state, u):
    u = np.asarray(u, dtype=complex)
    if u.shape != state.rho.shape:
        raise DimensionError(
            "Unitary shape %s does not match state dimension %d." % (u.shape, state.dim)
        )
    rho = u @ state.rho @ u.conj().T
    return QuantumState(0.5 * (rho + rho.conj().T), state.dims, check=False)


def apply_local(state, u, slot):
    """Apply a single-subsystem unitary to tensor slot ``slot``."""
    return apply_unitary(state, embed(u, slot, state.dims))


def apply_depolarizing(state, p):
    """White-noise admixture: (1-p) rho + p I/d."""
    if not 0.0 <= p <= 1.0:
        raise ParameterError("Depolarizing probability %r outside [0, 1]." % p)
    rho = (1 - p) * state.rho + p * np.eye(state.dim) / state.dim
    return QuantumState(rho, state.dims)


def partial_trace(state, keep):
    """Reduced state on the subsystems listed in ``keep`` (in their original order)."""
    dims = state.dims
    keep = sorted(set(keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionError("Cannot keep subsystems %s of dims %s." % (keep, dims))
    n = len(dims)
    rho = state.rho.reshape(dims + dims)
    traced = [k for k in range(n) if k not in keep]
    # Trace out from the highest index down so axis numbers stay valid.
    for k in sorted(traced, reverse=True):
        m = rho.ndim // 2
        rho = np.trace(rho, axis1=k, axis2=k + m)
    kept_dims = tuple(dims[k] for k in keep)
    d = int(np.prod(kept_dims)) if kept_dims else 1
    return QuantumState(rho.reshape(d, d), kept_dims, tol=1e-8)


def fidelity_to_pure(state, ket):
    ket = np.asarray(ket, dtype=complex).reshape(-1)
    ket = ket / np.linalg.norm(ket)
    return float(np.real(ket.conj() @ state.rho @ ket))


def correlation_tensor(state):
    """
    Two-qubit Pauli correlations T[a, b] = <sigma_a (x) sigma_b>, a, b in (x, y, z).
    """
    if state.dims != QUBIT_DIMS:
        raise DimensionError("Correlation tensor needs a two-qubit state, got %s." % (state.dims,))
    return np.array([[expectation(state, tensor(a, b)) for b in PAULIS] for a in PAULIS])


@dataclass(frozen=True)
class ObservableSpec:
    """
    One of the four +-1 valued observables.

    The measured operator is R^+(pi/2, phi_eff) sigma_z R(pi/2, phi_eff) with
    ``phi_eff = phase_sense * phase + frame_offset``, multiplied by
    ``convention_sign``. ``frame_offset`` and ``phase_sense`` describe the
    ion's local phase frame.
    """

    index: int
    phase: float
    ion: str = None
    convention_sign: int = 1
    frame_offset: float = 0.0
    phase_sense: int = 1

    def __post_init__(self):
        if self.index not in (0, 1, 2, 3):
            raise ParameterError("Observable index %r outside 0..3." % (self.index,))
        expected = OBSERVABLE_ION[self.index]
        if self.ion is None:
            object.__setattr__(self, "ion", expected)
        elif self.ion != expected:
            raise ParameterError(
                "Observable %d is measured on %s, not %s." % (self.index, expected, self.ion)
            )
        if self.convention_sign not in (1, -1):
            raise ParameterError("convention_sign must be +1 or -1.")
        if self.phase_sense not in (1, -1):
            raise ParameterError("phase_sense must be +1 or -1.")

    @property
    def slot(self):
        return ION_SLOT[self.ion]

    @property
    def effective_phase(self):
        return self.phase_sense * self.phase + self.frame_offset

    def with_frame(self, frame_offset, phase_sense=None):
        sense = self.phase_sense if phase_sense is None else phase_sense
        return replace(self, frame_offset=frame_offset, phase_sense=sense)


def basis_rotation(spec):
    """The pi/2 analysis pulse that maps ``spec``'s observable onto sigma_z."""
    return rotation(np.pi / 2, spec.effective_phase)


def observable_from_phase(spec):
    r = basis_rotation(spec)
    return spec.convention_sign * (r.conj().T @ SIGMA_Z @ r)


def observable_bloch_vector(spec):
    """Closed form of ``observable_from_phase``: sign * (-sin phi, cos phi, 0)."""
    phi = spec.effective_phase
    return spec.convention_sign * np.array([-np.sin(phi), np.cos(phi), 0.0])


def fig5_specs(phases=(5 * np.pi / 4, 3 * np.pi / 2, 3 * np.pi / 4, np.pi)):
    """Observable specs at the published analysis phases, indexed 0..3."""
    return tuple(ObservableSpec(index=i, phase=float(phi)) for i, phi in enumerate(phases))
