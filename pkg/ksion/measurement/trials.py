"""
Trial generation with counter-based random streams.

Every trial of a context consumes exactly one Philox block (four uniforms),
addressed by its per-context counter. A block of trials drawn from counter
``start`` is therefore identical to the same trials drawn one at a time,
and any split of a context into shards reproduces the same outcomes.
"""
from dataclasses import dataclass

import numpy as np
import pandas as pd

from ksion.measurement.core import (
    CONTEXTS,
    DRAWS_PER_TRIAL,
    FLIP_DRAW,
    SCHEDULE_STREAM,
    SETTING_IDS,
    TRIALS_STREAM,
    bit_to_outcome,
    context_id,
    context_probabilities,
    counter_rng,
    ordered_pair,
    stream_key,
)
from ksion.quantum.core import BA, YB
from ksion.utils.errors import ParameterError

TRIAL_FIELDS = ("setting", "outcome_i", "outcome_j", "trial_index", "rng_stream_id")
TRIAL_FORMAT = "ksion-trials"
TRIAL_VERSION = 1
TRIAL_HEADER = "# %s v%d: %s" % (TRIAL_FORMAT, TRIAL_VERSION, "\t".join(TRIAL_FIELDS))


@dataclass(frozen=True)
class TrialRecord:
    setting: tuple
    outcome_i: int
    outcome_j: int
    trial_index: int
    rng_stream_id: int

    def __post_init__(self):
        if tuple(self.setting) not in CONTEXTS:
            raise ParameterError("Unknown setting %r." % (self.setting,))
        if self.outcome_i not in (1, -1) or self.outcome_j not in (1, -1):
            raise ParameterError("Outcomes must be +-1.")

    @property
    def setting_id(self):
        return SETTING_IDS[CONTEXTS.index(tuple(self.setting))]


@dataclass
class TrialBlock:
    """Consecutive trials of one context, in counter order."""

    context: tuple
    outcome_i: np.ndarray
    outcome_j: np.ndarray
    rng_stream_id: np.ndarray

    def __len__(self):
        return len(self.outcome_i)

    @classmethod
    def concatenate(cls, blocks):
        blocks = list(blocks)
        assert blocks, "Nothing to concatenate."
        assert len({b.context for b in blocks}) == 1, "Blocks span several contexts."
        return cls(
            blocks[0].context,
            np.concatenate([b.outcome_i for b in blocks]),
            np.concatenate([b.outcome_j for b in blocks]),
            np.concatenate([b.rng_stream_id for b in blocks]),
        )


def trial_key(seed, context):
    return stream_key(seed, TRIALS_STREAM, context_id(context))


def _draw(probs, u, spec_yb, spec_ba, noise, dark_outcome):
    cell = np.minimum(np.searchsorted(np.cumsum(probs), u[:, 0], side="right"), 3)
    b_yb, b_ba = cell // 2, cell % 2
    r_yb = b_yb ^ (u[:, FLIP_DRAW[YB]] < noise.yb.flip_probability(b_yb))
    r_ba = b_ba ^ (u[:, FLIP_DRAW[BA]] < noise.ba.flip_probability(b_ba))
    return (
        bit_to_outcome(r_yb, spec_yb, dark_outcome),
        bit_to_outcome(r_ba, spec_ba, dark_outcome),
    )


def sample_context(state, context, specs, noise, n, seed, start=0, dark_outcome=1, probs=None):
    """
    Draw trials ``start .. start+n-1`` of one context.

    Args:
        state: Two-qubit QuantumState.
        context: Context pair, id string or index.
        specs: The four ObservableSpecs.
        noise (NoiseModel): Readout confusion per ion.
        n (int): Number of trials.
        seed (int): Master seed.
        start (int): Per-context counter of the first trial.
        probs: Precomputed ``context_probabilities`` (optional).
    """
    context = CONTEXTS[context_id(context)]
    spec_yb, spec_ba, i_on_yb = ordered_pair(context, specs)
    if probs is None:
        probs = context_probabilities(state, context, specs)
    u = counter_rng(trial_key(seed, context), start).random((n, DRAWS_PER_TRIAL))
    o_yb, o_ba = _draw(probs, u, spec_yb, spec_ba, noise, dark_outcome)
    oi, oj = (o_yb, o_ba) if i_on_yb else (o_ba, o_yb)
    return TrialBlock(context, oi, oj, np.arange(start, start + n, dtype=np.int64))


def measure_trial(state, setting, specs, noise, rng, trial_index=0, rng_stream_id=0, dark_outcome=1):
    """
    One trial: rotate both ions into the context's basis, sample the joint
    outcome by the Born rule, then flip each report by its confusion matrix.

    ``rng`` supplies four uniforms. With ``counter_rng(trial_key(seed, c), k)``
    the result equals trial ``k`` of ``sample_context``.
    """
    context = CONTEXTS[context_id(setting)]
    spec_yb, spec_ba, i_on_yb = ordered_pair(context, specs)
    probs = context_probabilities(state, context, specs)
    u = rng.random(DRAWS_PER_TRIAL).reshape(1, DRAWS_PER_TRIAL)
    o_yb, o_ba = _draw(probs, u, spec_yb, spec_ba, noise, dark_outcome)
    oi, oj = (o_yb[0], o_ba[0]) if i_on_yb else (o_ba[0], o_yb[0])
    return TrialRecord(context, int(oi), int(oj), int(trial_index), int(rng_stream_id))


def schedule(counts, seed):
    """Context index of every global trial position, randomly interleaved."""
    labels = np.repeat(np.arange(len(CONTEXTS)), [counts.get(c, 0) for c in CONTEXTS])
    rng = counter_rng(stream_key(seed, SCHEDULE_STREAM), 0)
    return rng.permutation(labels)


def interleave(blocks, seed):
    """
    Merge per-context blocks into one trial table ordered by ``trial_index``.

    Each context keeps its counter order; the positions it occupies come from
    the seeded schedule.
    """
    blocks = {b.context: b for b in blocks}
    order = schedule({c: len(b) for c, b in blocks.items()}, seed)
    n = len(order)
    setting = np.empty(n, dtype=object)
    oi = np.zeros(n, dtype=np.int8)
    oj = np.zeros(n, dtype=np.int8)
    stream = np.zeros(n, dtype=np.int64)
    for k, context in enumerate(CONTEXTS):
        if context not in blocks:
            continue
        pos = np.flatnonzero(order == k)
        b = blocks[context]
        setting[pos] = SETTING_IDS[k]
        oi[pos], oj[pos], stream[pos] = b.outcome_i, b.outcome_j, b.rng_stream_id
    return pd.DataFrame(
        {
            "setting": setting,
            "outcome_i": oi,
            "outcome_j": oj,
            "trial_index": np.arange(n, dtype=np.int64),
            "rng_stream_id": stream,
        },
        columns=list(TRIAL_FIELDS),
    )


def records_to_frame(records):
    return pd.DataFrame(
        [(r.setting_id, r.outcome_i, r.outcome_j, r.trial_index, r.rng_stream_id) for r in records],
        columns=list(TRIAL_FIELDS),
    )


def write_trial_file(frame, path):
    """Versioned header line, then one tab-separated record per line."""
    with open(path, "w", newline="\n") as out:
        out.write(TRIAL_HEADER + "\n")
        frame.to_csv(out, sep="\t", header=False, index=False)
    return path
