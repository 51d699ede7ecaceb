"""
Sharpness test of a single observable: rotate, measure, rotate back, rotate
again, measure again, keeping only runs whose first reported outcome is dark.

The bright eigenstate is tested through a pi-pulse sandwich that maps it
onto the dark state before each readout, so both branches rely on the same
post-selection.
"""
from dataclasses import dataclass

import numpy as np
import pandas as pd

from ksion.measurement.core import (
    DRAWS_PER_TRIAL,
    REPEATABILITY_STREAM,
    bit_to_outcome,
    collapse_after_measurement,
    counter_rng,
    outcome_probability,
    stream_key,
)
from ksion.quantum.core import QuantumState, apply_local, basis_rotation, rotation
from ksion.utils.errors import EstimationError, ParameterError

BRANCHES = ("dark", "bright")
REPEATABILITY_FIELDS = (
    "observable",
    "branch",
    "first_outcome",
    "second_outcome",
    "post_selected",
    "run_index",
)
# Probabilities below this are rounding residue of the projection.
ROUNDOFF = 1e-12

REPEATABILITY_HEADER = "# ksion-repeatability v1: " + "\t".join(REPEATABILITY_FIELDS)


@dataclass(frozen=True)
class RepeatabilityRecord:
    observable: int
    first_outcome: int
    second_outcome: int
    post_selected: bool
    branch: str = "dark"
    run_index: int = 0


@dataclass
class RepeatabilityBatch:
    """Column store of the runs of one observable."""

    observable: int
    branch: np.ndarray
    first_outcome: np.ndarray
    second_outcome: np.ndarray
    post_selected: np.ndarray
    run_index: np.ndarray

    def __len__(self):
        return len(self.first_outcome)

    def records(self):
        for k in range(len(self)):
            yield RepeatabilityRecord(
                self.observable,
                int(self.first_outcome[k]),
                int(self.second_outcome[k]),
                bool(self.post_selected[k]),
                str(self.branch[k]),
                int(self.run_index[k]),
            )

    def to_frame(self):
        return pd.DataFrame(
            {
                "observable": np.full(len(self), self.observable, dtype=np.int64),
                "branch": self.branch,
                "first_outcome": self.first_outcome,
                "second_outcome": self.second_outcome,
                "post_selected": self.post_selected.astype(np.int8),
                "run_index": self.run_index,
            },
            columns=list(REPEATABILITY_FIELDS),
        )

    @classmethod
    def concatenate(cls, batches):
        batches = list(batches)
        return cls(
            batches[0].observable,
            *[np.concatenate([getattr(b, f) for b in batches]) for f in REPEATABILITY_FIELDS[1:]],
        )


@dataclass(frozen=True)
class RepeatabilityEstimate:
    observable: int
    value: float
    sem: float
    n_retained: int
    n_discarded: int
    batch: RepeatabilityBatch = None


def estimate_from_batch(batch):
    """R = fraction of post-selected runs whose two outcomes agree."""
    keep = np.asarray(batch.post_selected, dtype=bool)
    n = int(keep.sum())
    if n == 0:
        raise EstimationError(
            "All %d repeatability runs of observable %d were discarded." % (len(batch), batch.observable)
        )
    equal = batch.first_outcome[keep] == batch.second_outcome[keep]
    r = float(equal.mean())
    sem = float(np.sqrt(r * (1 - r) / (n - 1))) if n > 1 else 0.0
    return RepeatabilityEstimate(batch.observable, r, sem, n, len(batch) - n, batch)


def _prepare(state_prep):
    state = state_prep() if callable(state_prep) else state_prep
    assert isinstance(state, QuantumState), "state_prep must give a QuantumState."
    return state


def branch_probabilities(state, spec, branch):
    """
    Exact first-readout bit probabilities and second-readout probabilities
    conditioned on each true first bit, for one branch of the sequence.
    """
    if branch not in BRANCHES:
        raise ParameterError("Unknown branch %r." % (branch,))
    slot = spec.slot
    pulse = basis_rotation(spec)
    if branch == "bright":
        pulse = rotation(np.pi, 0.0) @ pulse
    rotated = apply_local(state, pulse, slot)
    first = np.array([outcome_probability(rotated, b, slot) for b in (0, 1)])
    first = np.clip(first, 0.0, 1.0)
    first[first < ROUNDOFF] = 0.0
    first /= first.sum()
    second = np.zeros((2, 2))
    for b in (0, 1):
        if first[b] <= 1e-15:
            second[b, b] = 1.0
            continue
        post = collapse_after_measurement(rotated, 1 - 2 * b, slot=slot)
        post = apply_local(post, pulse.conj().T, slot)
        post = apply_local(post, pulse, slot)
        p = np.clip([outcome_probability(post, c, slot) for c in (0, 1)], 0.0, 1.0)
        p[p < ROUNDOFF] = 0.0
        second[b] = p / p.sum()
    return first, second


def sample_branch(spec, state, noise, n_runs, seed, branch="dark", dark_outcome=1):
    first, second = branch_probabilities(state, spec, branch)
    confusion = noise.for_ion(spec.ion)
    key = stream_key(seed, REPEATABILITY_STREAM, spec.index, BRANCHES.index(branch))
    u = counter_rng(key, 0).random((n_runs, DRAWS_PER_TRIAL))
    b1 = (u[:, 0] >= first[0]).astype(np.int64)
    r1 = b1 ^ (u[:, 1] < confusion.flip_probability(b1))
    b2 = (u[:, 2] >= second[b1, 0]).astype(np.int64)
    r2 = b2 ^ (u[:, 3] < confusion.flip_probability(b2))
    if branch == "bright":
        # The pi pulse swaps which eigenvalue reads dark.
        v1, v2 = 1 - r1, 1 - r2
    else:
        v1, v2 = r1, r2
    return RepeatabilityBatch(
        spec.index,
        np.full(n_runs, branch, dtype=object),
        bit_to_outcome(v1, spec, dark_outcome),
        bit_to_outcome(v2, spec, dark_outcome),
        r1 == 0,
        np.arange(n_runs, dtype=np.int64),
    )


def repeatability_protocol(spec, state_prep, noise, n_runs, seed, dark_outcome=1, branches=BRANCHES):
    """
    Estimate the repeatability R_i of ``spec``'s observable.

    Args:
        spec (ObservableSpec): The observable under test.
        state_prep: QuantumState, or a callable returning one.
        noise (NoiseModel): Readout confusion per ion.
        n_runs (int): Runs per branch. Roughly half survive post-selection,
            so both branches together retain about ``n_runs``.
        seed (int): Master seed.
        branches: Which branches to run.

    Returns:
        RepeatabilityEstimate with the retained-run SEM sqrt(R(1-R)/(n-1)).

    Raises:
        EstimationError: if every run is discarded.
    """
    if int(n_runs) != n_runs or n_runs < 1:
        raise ParameterError("n_runs must be a positive integer, got %r." % (n_runs,))
    state = _prepare(state_prep)
    batch = RepeatabilityBatch.concatenate(
        sample_branch(spec, state, noise, int(n_runs), seed, b, dark_outcome) for b in branches
    )
    return estimate_from_batch(batch)


def mean_repeatability(estimates):
    """Average R over observables with the SEM combined in quadrature."""
    estimates = list(estimates)
    if not estimates:
        raise EstimationError("No repeatability estimates to average.")
    values = np.array([e.value for e in estimates])
    sems = np.array([e.sem for e in estimates])
    return float(values.mean()), float(np.sqrt(np.sum(sems ** 2)) / len(estimates))


def write_repeatability_file(batches, path):
    frame = pd.concat([b.to_frame() for b in batches], ignore_index=True)
    with open(path, "w", newline="\n") as out:
        out.write(REPEATABILITY_HEADER + "\n")
        frame.to_csv(out, sep="\t", header=False, index=False)
    return path
