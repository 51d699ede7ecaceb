"""
Classical reference data: outcome-noncontextual hidden-variable models.

Every hidden variable fixes a value v_i in {+1, -1} for each of the four
observables, independent of the context in which it is read out.
"""
import itertools

import numpy as np

from ksion.measurement.core import (
    CONTEXTS,
    DRAWS_PER_TRIAL,
    FLIP_DRAW,
    STRATEGY_STREAM,
    NoiseModel,
    context_id,
    counter_rng,
    stream_key,
)
from ksion.measurement.trials import TrialBlock
from ksion.quantum.core import OBSERVABLE_ION
from ksion.utils.errors import ParameterError


def chsh_value(assignment):
    v = assignment
    return v[0] * v[1] + v[1] * v[2] + v[2] * v[3] - v[3] * v[0]


def optimal_assignments():
    """The eight deterministic assignments that reach the classical bound 2."""
    return [v for v in itertools.product((1, -1), repeat=4) if chsh_value(v) == 2]


class NoncontextualStrategy:
    """
    Mixture of deterministic assignments.

    Args:
        assignments: Sequence of 4-tuples of +-1. Defaults to the eight
            assignments saturating the bound.
        weights: Mixing probabilities, uniform by default.
        noise (NoiseModel): Optional readout confusion applied on top, with
            +1 read as the dark bit.
    """

    def __init__(self, assignments=None, weights=None, noise=None):
        assignments = optimal_assignments() if assignments is None else list(assignments)
        self.assignments = np.array(assignments, dtype=np.int8)
        if self.assignments.ndim != 2 or self.assignments.shape[1] != 4:
            raise ParameterError("Assignments must be 4-tuples.")
        if not np.all(np.isin(self.assignments, (1, -1))):
            raise ParameterError("Assigned values must be +-1.")
        k = len(self.assignments)
        weights = np.full(k, 1.0 / k) if weights is None else np.asarray(weights, dtype=float)
        if weights.shape != (k,) or np.any(weights < 0) or abs(weights.sum() - 1) > 1e-9:
            raise ParameterError("Weights must be a probability vector over the assignments.")
        self.weights = weights / weights.sum()
        self.noise = noise or NoiseModel.noiseless()

    def expected_chsh(self):
        return float(self.weights @ np.array([chsh_value(v) for v in self.assignments]))

    def _read(self, values, index, u):
        confusion = self.noise.for_ion(OBSERVABLE_ION[index])
        bit = (values == -1).astype(np.int64)
        bit = bit ^ (u < confusion.flip_probability(bit))
        return (1 - 2 * bit).astype(np.int8)

    def sample_context(self, context, n, seed, start=0):
        """Trials ``start .. start+n-1`` of a context, same counter scheme as quantum trials."""
        context = CONTEXTS[context_id(context)]
        i, j = context
        key = stream_key(seed, STRATEGY_STREAM, CONTEXTS.index(context))
        u = counter_rng(key, start).random((n, DRAWS_PER_TRIAL))
        hidden = np.minimum(
            np.searchsorted(np.cumsum(self.weights), u[:, 0], side="right"),
            len(self.weights) - 1,
        )
        values = self.assignments[hidden]
        ui = u[:, FLIP_DRAW[OBSERVABLE_ION[i]]]
        uj = u[:, FLIP_DRAW[OBSERVABLE_ION[j]]]
        return TrialBlock(
            context,
            self._read(values[:, i], i, ui),
            self._read(values[:, j], j, uj),
            np.arange(start, start + n, dtype=np.int64),
        )

    def sample(self, n_per_context, seed):
        return [self.sample_context(c, n_per_context, seed) for c in CONTEXTS]
