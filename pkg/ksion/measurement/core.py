"""
Readout model shared by trial sampling and the repeatability sequence.

Outcomes are +-1. A true qubit bit is 0 (dark, no fluorescence) or 1
(bright). The reported bit passes through a per-ion confusion matrix and is
mapped to a value by ``dark_outcome`` and the observable's convention sign.
"""
from dataclasses import dataclass, field

import numpy as np

from ksion.quantum.core import (
    BA,
    IONS,
    QUBIT_DIMS,
    YB,
    QuantumState,
    apply_unitary,
    basis_rotation,
    embed,
    tensor,
)
from ksion.utils.errors import ParameterError, ZeroProbabilityError

# Compatible pairs, one per edge of the four-cycle.
CONTEXTS = ((0, 1), (1, 2), (2, 3), (3, 0))
SETTING_IDS = tuple("%d%d" % c for c in CONTEXTS)

# Random stream names; see ``stream_key``.
TRIALS_STREAM = 0
SCHEDULE_STREAM = 1
REPEATABILITY_STREAM = 2
BOOTSTRAP_STREAM = 3
STRATEGY_STREAM = 4

# Uniforms drawn per trial: joint cell, Yb flip, Ba flip, reserved.
DRAWS_PER_TRIAL = 4
# Column of each ion's readout-flip uniform within a trial's draws.
FLIP_DRAW = {YB: 1, BA: 2}


def context_id(setting):
    """Index 0..3 of ``setting`` given as a pair, an id string or an index."""
    if isinstance(setting, str):
        if setting not in SETTING_IDS:
            raise ParameterError("Unknown setting id %r." % setting)
        return SETTING_IDS.index(setting)
    if isinstance(setting, (int, np.integer)):
        if not 0 <= setting < len(CONTEXTS):
            raise ParameterError("Context index %r outside 0..3." % setting)
        return int(setting)
    pair = tuple(int(x) for x in setting)
    if pair not in CONTEXTS:
        raise ParameterError("%s is not one of the compatible pairs %s." % (pair, CONTEXTS))
    return CONTEXTS.index(pair)


@dataclass(frozen=True)
class ConfusionMatrix:
    """
    Classical readout errors of one ion.

    ``p_report1_given0`` is a dark ion reported bright, ``p_report0_given1``
    a bright ion reported dark.
    """

    p_report1_given0: float = 0.0
    p_report0_given1: float = 0.0

    def __post_init__(self):
        for name in ("p_report1_given0", "p_report0_given1"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ParameterError("%s=%r outside [0, 1]." % (name, val))

    @property
    def matrix(self):
        """M[reported, true]."""
        e0, e1 = self.p_report1_given0, self.p_report0_given1
        return np.array([[1 - e0, e1], [e0, 1 - e1]])

    def flip_probability(self, true_bit):
        return np.where(np.asarray(true_bit) == 0, self.p_report1_given0, self.p_report0_given1)

    @property
    def shrink(self):
        return 1.0 - self.p_report1_given0 - self.p_report0_given1

    @classmethod
    def from_pair(cls, pair):
        return cls(float(pair[0]), float(pair[1]))

    def to_list(self):
        return [self.p_report1_given0, self.p_report0_given1]


@dataclass(frozen=True)
class NoiseModel:
    yb: ConfusionMatrix = field(default_factory=ConfusionMatrix)
    ba: ConfusionMatrix = field(default_factory=ConfusionMatrix)

    def for_ion(self, ion):
        assert ion in IONS, "Unknown ion %r." % (ion,)
        return self.yb if ion == YB else self.ba

    @classmethod
    def noiseless(cls):
        return cls()


def bit_to_outcome(bit, spec, dark_outcome=1):
    """Reported bit (0 dark, 1 bright) to the +-1 value of ``spec``'s observable."""
    return (spec.convention_sign * dark_outcome * (1 - 2 * np.asarray(bit))).astype(np.int8)


def stream_key(seed, stream, *path):
    """128-bit Philox key for (master seed, stream, path)."""
    ss = np.random.SeedSequence(seed, spawn_key=(stream,) + tuple(int(p) for p in path))
    return ss.generate_state(2, np.uint64)


def counter_rng(key, counter=0):
    """Generator whose next Philox block is the one after ``counter``."""
    return np.random.Generator(np.random.Philox(key=key, counter=int(counter)))


def ordered_pair(context, specs):
    """(Yb spec, Ba spec) of a context plus whether observable i sits on Yb."""
    i, j = CONTEXTS[context_id(context)]
    si, sj = specs[i], specs[j]
    assert si.ion != sj.ion, "A context must span both ions."
    if si.ion == YB:
        return si, sj, True
    return sj, si, False


def rotate_for_context(state, context, specs):
    spec_yb, spec_ba, _ = ordered_pair(context, specs)
    u = tensor(basis_rotation(spec_yb), basis_rotation(spec_ba))
    return apply_unitary(state, u)


def context_probabilities(state, context, specs):
    """True joint bit probabilities ordered (b_Yb, b_Ba) = 00, 01, 10, 11."""
    if state.dims != QUBIT_DIMS:
        raise ParameterError("Trials need a two-qubit state, got dims %s." % (state.dims,))
    p = rotate_for_context(state, context, specs).populations()
    return p / p.sum()


def recorded_probabilities(state, context, specs, noise):
    """Joint distribution of the reported bits after confusion."""
    p = context_probabilities(state, context, specs).reshape(2, 2)
    m_yb, m_ba = noise.yb.matrix, noise.ba.matrix
    return (m_yb @ p @ m_ba.T).reshape(-1)


@dataclass(frozen=True)
class ContextStatistics:
    """Exact recorded correlator and marginals of one context."""

    context: tuple
    correlator: float
    marginal_i: float
    marginal_j: float


def exact_recorded_statistics(state, specs, noise=None, dark_outcome=1):
    """
    Recorded <O_i O_j>, <O_i> and <O_j> of every context, including readout
    confusion. Keyed by context pair.
    """
    noise = noise or NoiseModel.noiseless()
    out = {}
    bits = np.array([[0, 0], [0, 1], [1, 0], [1, 1]])
    for context in CONTEXTS:
        spec_yb, spec_ba, i_on_yb = ordered_pair(context, specs)
        q = recorded_probabilities(state, context, specs, noise)
        v_yb = bit_to_outcome(bits[:, 0], spec_yb, dark_outcome).astype(float)
        v_ba = bit_to_outcome(bits[:, 1], spec_ba, dark_outcome).astype(float)
        m_yb, m_ba = float(q @ v_yb), float(q @ v_ba)
        corr = float(q @ (v_yb * v_ba))
        mi, mj = (m_yb, m_ba) if i_on_yb else (m_ba, m_yb)
        out[context] = ContextStatistics(context, corr, mi, mj)
    return out


def exact_recorded_chsh(state, specs, noise=None, dark_outcome=1):
    stats = exact_recorded_statistics(state, specs, noise, dark_outcome)
    e = [stats[c].correlator for c in CONTEXTS]
    return e[0] + e[1] + e[2] - e[3]


def projector(bit, slot, dims):
    p = np.zeros((2, 2), dtype=complex)
    p[bit, bit] = 1
    return embed(p, slot, dims)


def outcome_probability(state, bit, slot):
    proj = projector(bit, slot, state.dims)
    return float(np.real(np.trace(proj @ state.rho)))


def collapse_after_measurement(state, outcome, basis=None, slot=0):
    """
    Lueders update after a sigma_z-basis readout of qubit ``slot``.

    ``outcome`` is +1 for the dark bit |0> and -1 for |1>. ``basis`` is an
    optional unitary mapping the measured observable onto sigma_z; when given,
    the state is rotated into that basis, projected and rotated back.

    Raises:
        ZeroProbabilityError: if the outcome has zero probability.
    """
    if outcome not in (1, -1):
        raise ParameterError("Outcome must be +1 or -1, got %r." % (outcome,))
    bit = 0 if outcome == 1 else 1
    u = None
    if basis is not None:
        u = embed(basis, slot, state.dims)
        state = apply_unitary(state, u)
    proj = projector(bit, slot, state.dims)
    prob = float(np.real(np.trace(proj @ state.rho)))
    if prob <= 1e-15:
        raise ZeroProbabilityError("Outcome %+d has zero probability." % outcome)
    post = QuantumState(proj @ state.rho @ proj / prob, state.dims, tol=1e-8)
    if u is not None:
        post = apply_unitary(post, u.conj().T)
    return post
