"""
Correlators, marginals and the corrected noncontextual bounds.

All estimates derive from ``ContextCounts``, the integer table of joint
outcomes of one context. Counts merge by addition, so shards of a dataset
can be aggregated in any order with identical results.
"""
from dataclasses import dataclass, field

import numpy as np

from ksion.measurement.core import (
    BOOTSTRAP_STREAM,
    CONTEXTS,
    SETTING_IDS,
    context_id,
    counter_rng,
    stream_key,
)
from ksion.utils.errors import EstimationError, MissingContextError, ParameterError

NONCONTEXTUAL_BOUND = 2.0
ALGEBRAIC_MAX = 4.0
SEQUENTIAL_COEFFICIENT = 8.0

# Sign of each context's correlator in C.
CHSH_SIGNS = (1, 1, 1, -1)


def _outcome_index(values):
    """+1 -> 0, -1 -> 1."""
    values = np.asarray(values)
    if not np.all((values == 1) | (values == -1)):
        raise ParameterError("Outcomes must be +-1.")
    return (values == -1).astype(np.int64)


@dataclass
class ContextCounts:
    """
    Joint outcome counts of one context; ``table[a, b]`` counts trials with
    outcome_i = (+1, -1)[a] and outcome_j = (+1, -1)[b].
    """

    context: tuple
    table: np.ndarray = field(default_factory=lambda: np.zeros((2, 2), dtype=np.int64))

    def __post_init__(self):
        self.context = CONTEXTS[context_id(self.context)]
        self.table = np.asarray(self.table, dtype=np.int64).reshape(2, 2)
        if np.any(self.table < 0):
            raise ParameterError("Counts must be non-negative.")

    @classmethod
    def from_outcomes(cls, context, outcome_i, outcome_j):
        a, b = _outcome_index(outcome_i), _outcome_index(outcome_j)
        table = np.bincount(2 * a + b, minlength=4).reshape(2, 2)
        return cls(context, table)

    @classmethod
    def from_block(cls, block):
        return cls.from_outcomes(block.context, block.outcome_i, block.outcome_j)

    @classmethod
    def from_records(cls, records):
        records = list(records)
        if not records:
            raise EstimationError("No trial records given.")
        contexts = {tuple(r.setting) for r in records}
        if len(contexts) != 1:
            raise EstimationError("Records span several contexts: %s." % sorted(contexts))
        return cls.from_outcomes(
            contexts.pop(), [r.outcome_i for r in records], [r.outcome_j for r in records]
        )

    @classmethod
    def from_cells(cls, context, n_pp, n_mm, n_pm, n_mp):
        return cls(context, [[n_pp, n_pm], [n_mp, n_mm]])

    def __add__(self, other):
        if other.context != self.context:
            raise ParameterError("Cannot merge counts of %s and %s." % (self.context, other.context))
        return ContextCounts(self.context, self.table + other.table)

    @property
    def setting_id(self):
        return SETTING_IDS[CONTEXTS.index(self.context)]

    @property
    def n(self):
        return int(self.table.sum())

    def _mean(self, weights):
        if self.n == 0:
            raise EstimationError("Context %s has no trials." % (self.context,))
        return float((self.table * weights).sum() / self.n)

    def product_mean(self):
        return self._mean(np.array([[1, -1], [-1, 1]]))

    def marginal_i_mean(self):
        return self._mean(np.array([[1, 1], [-1, -1]]))

    def marginal_j_mean(self):
        return self._mean(np.array([[1, -1], [1, -1]]))

    def to_dict(self):
        t = self.table
        return {"n++": int(t[0, 0]), "n--": int(t[1, 1]), "n+-": int(t[0, 1]), "n-+": int(t[1, 0])}


def merge_counts(*shards):
    """Sum shards of counts per context."""
    merged = {}
    for shard in shards:
        for c in (shard.values() if isinstance(shard, dict) else [shard]):
            merged[c.context] = merged[c.context] + c if c.context in merged else c
    return merged


@dataclass(frozen=True)
class CorrelatorEstimate:
    mean: float
    sem: float
    n: int


def pm1_estimate(mean, n):
    """Mean and sample-variance SEM of a +-1 valued quantity over n trials."""
    if n < 2:
        raise EstimationError("Need at least 2 trials, got %d." % n)
    mean = float(np.clip(mean, -1.0, 1.0))
    return CorrelatorEstimate(mean, float(np.sqrt(max(1 - mean ** 2, 0.0) / (n - 1))), int(n))


def _as_counts(trials):
    if isinstance(trials, ContextCounts):
        return trials
    if hasattr(trials, "outcome_i") and hasattr(trials, "context"):
        return ContextCounts.from_block(trials)
    return ContextCounts.from_records(trials)


def correlator(trials):
    """
    Mean of outcome_i * outcome_j for one context, with its SEM.

    ``trials`` may be ContextCounts, a TrialBlock or a list of TrialRecords.
    """
    counts = _as_counts(trials)
    if counts.n == 0:
        raise EstimationError("No trials for context %s." % (counts.context,))
    return pm1_estimate(counts.product_mean(), counts.n)


def _by_context(estimates):
    if isinstance(estimates, dict):
        return {CONTEXTS[context_id(k)]: v for k, v in estimates.items()}
    estimates = list(estimates)
    if len(estimates) != len(CONTEXTS):
        raise MissingContextError("Need one estimate per context, got %d." % len(estimates))
    return dict(zip(CONTEXTS, estimates))


def chsh_statistic(estimates):
    """
    C = E01 + E12 + E23 - E30 with SEMs added in quadrature.

    ``estimates`` is a dict keyed by context (pair, id or index) or a
    sequence in context order.
    """
    by_context = _by_context(estimates)
    missing = [c for c in CONTEXTS if c not in by_context]
    if missing:
        raise MissingContextError("Missing contexts: %s." % (missing,))
    c = sum(s * by_context[ctx].mean for s, ctx in zip(CHSH_SIGNS, CONTEXTS))
    sem = np.sqrt(sum(by_context[ctx].sem ** 2 for ctx in CONTEXTS))
    return float(c), float(sem)


class MarginalTable:
    """
    <O_i>^(j): expectation of O_i when read out jointly with O_j, for the
    eight ordered pairs of the four contexts.
    """

    def __init__(self, entries=None):
        self.entries = dict(entries or {})

    @staticmethod
    def required_keys():
        return [(i, j) for (i, j) in CONTEXTS] + [(j, i) for (i, j) in CONTEXTS]

    def __getitem__(self, key):
        return self.entries[key]

    def __setitem__(self, key, val):
        self.entries[key] = val

    def is_complete(self):
        return all(k in self.entries for k in self.required_keys())

    def missing(self):
        return [k for k in self.required_keys() if k not in self.entries]

    def to_dict(self):
        return {"%d|%d" % k: {"mean": v.mean, "sem": v.sem} for k, v in sorted(self.entries.items())}


def marginal_table(counts):
    """MarginalTable from a dict of ContextCounts (missing contexts leave gaps)."""
    table = MarginalTable()
    for c in counts.values():
        i, j = c.context
        if c.n == 0:
            continue
        table[(i, j)] = pm1_estimate(c.marginal_i_mean(), c.n)
        table[(j, i)] = pm1_estimate(c.marginal_j_mean(), c.n)
    return table


def epsilon_fraction(f, algebraic_max=ALGEBRAIC_MAX, bound=NONCONTEXTUAL_BOUND):
    """Bound correction when outcome noncontextuality holds for a fraction f of trials."""
    if not 0.0 <= f <= 1.0:
        raise ParameterError("Fraction f=%r outside [0, 1]." % (f,))
    return (1.0 - f) * (algebraic_max - bound)


def _neighbours(i):
    return (i + 1) % 4, (i - 1) % 4


def epsilon_mnc(marginals):
    """
    Sum over i of |<O_i>^(i+1) - <O_i>^(i-1)|, with a linearized SEM.

    Every difference contributes its variance, including differences
    compatible with zero.
    """
    if not marginals.is_complete():
        raise MissingContextError("Marginal table is missing %s." % (marginals.missing(),))
    eps, var = 0.0, 0.0
    for i in range(4):
        up, down = _neighbours(i)
        a, b = marginals[(i, up)], marginals[(i, down)]
        eps += abs(a.mean - b.mean)
        var += a.sem ** 2 + b.sem ** 2
    return float(eps), float(np.sqrt(var))


def _marginal_differences(tables):
    """epsilon_mnc per resample from stacked count tables, shape (B, 4, 2, 2)."""
    n = tables.sum(axis=(2, 3))
    mi = (tables[:, :, 0, :].sum(axis=2) - tables[:, :, 1, :].sum(axis=2)) / n
    mj = (tables[:, :, :, 0].sum(axis=2) - tables[:, :, :, 1].sum(axis=2)) / n
    value = {}
    for k, (i, j) in enumerate(CONTEXTS):
        value[(i, j)] = mi[:, k]
        value[(j, i)] = mj[:, k]
    eps = 0.0
    for i in range(4):
        up, down = _neighbours(i)
        eps = eps + np.abs(value[(i, up)] - value[(i, down)])
    return eps


def bootstrap_epsilon_mnc(counts, n_resamples=1000, seed=0):
    """
    Bootstrap SEM of epsilon_mnc: each context's counts are resampled
    multinomially at their own size.

    Returns:
        (mean over resamples, standard deviation over resamples)
    """
    missing = [c for c in CONTEXTS if c not in counts or counts[c].n == 0]
    if missing:
        raise MissingContextError("Bootstrap needs all contexts, missing %s." % (missing,))
    if n_resamples < 2:
        raise ParameterError("Need at least 2 bootstrap resamples.")
    rng = counter_rng(stream_key(seed, BOOTSTRAP_STREAM), 0)
    stacked = np.zeros((n_resamples, 4, 2, 2), dtype=np.int64)
    for k, c in enumerate(CONTEXTS):
        cells = counts[c].table.reshape(-1)
        draws = rng.multinomial(cells.sum(), cells / cells.sum(), size=n_resamples)
        stacked[:, k] = draws.reshape(n_resamples, 2, 2)
    eps = _marginal_differences(stacked)
    return float(eps.mean()), float(eps.std(ddof=1))


def epsilon_sequential(mean_repeatability, coefficient=SEQUENTIAL_COEFFICIENT):
    """
    Linear correction coefficient * (1 - R) for models exploiting imperfect
    repeatability of sequential measurements.
    """
    if not 0.0 <= mean_repeatability <= 1.0:
        raise ParameterError("Repeatability %r outside [0, 1]." % (mean_repeatability,))
    return coefficient * (1.0 - mean_repeatability)


def violation_significance(c, sem_c, epsilon, bound=NONCONTEXTUAL_BOUND):
    """Distance of C above bound + epsilon in units of its SEM."""
    excess = c - bound - epsilon
    if sem_c < 0:
        raise ParameterError("SEM must be non-negative.")
    if sem_c == 0:
        if abs(excess) < 1e-12:
            return 0.0
        raise EstimationError("Zero SEM with C=%r off the bound %r." % (c, bound + epsilon))
    return float(excess / sem_c)
