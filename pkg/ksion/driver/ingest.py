"""
Reading trial and repeatability files back, with line-numbered errors.

Both formats are a versioned header line followed by one tab-separated
record per line (see readme.md). Line numbers count the header as line 1.
"""
import numpy as np
import pandas as pd

from ksion.measurement.core import CONTEXTS, SETTING_IDS
from ksion.measurement.repeatability import (
    BRANCHES,
    REPEATABILITY_FIELDS,
    REPEATABILITY_HEADER,
    RepeatabilityBatch,
)
from ksion.measurement.trials import TRIAL_FIELDS, TRIAL_HEADER, TrialBlock
from ksion.utils.errors import IngestError

OUTCOME_STRINGS = ("1", "-1")
# Non-negative integers short enough for int64.
INTEGER_PATTERN = r"\d{1,18}"


def _read_table(path, header, fields):
    """Split the body into string columns after checking header and field counts."""
    try:
        with open(path) as f:
            text = f.read()
    except OSError as e:
        raise IngestError("cannot read file: %s" % e, path=path)
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise IngestError("file is empty", line_number=1, path=path)
    if lines[0].rstrip("\r") != header:
        raise IngestError("expected header %r, found %r" % (header, lines[0]), line_number=1, path=path)

    body = pd.Series(lines[1:], dtype=object).str.rstrip("\r")
    if body.empty:
        return pd.DataFrame(columns=list(fields), dtype=object)
    n_fields = body.str.count("\t") + 1
    bad = np.flatnonzero(n_fields.to_numpy() != len(fields))
    if len(bad):
        k = int(bad[0])
        raise IngestError(
            "expected %d tab-separated fields, found %d" % (len(fields), n_fields.iloc[k]),
            line_number=k + 2,
            path=path,
        )
    table = body.str.split("\t", expand=True)
    table.columns = list(fields)
    return table


def _pm1_check(t, column):
    return (
        ~t[column].isin(OUTCOME_STRINGS),
        lambda k: "%s must be +1 or -1, got %r" % (column, t[column].iloc[k]),
    )


def _integer_check(t, column):
    return (
        ~t[column].str.fullmatch(INTEGER_PATTERN),
        lambda k: "%s must be an integer in [0, 10**18), got %r" % (column, t[column].iloc[k]),
    )


def _first_failure(checks, path):
    """Raise for the earliest line failing any (mask, message-fn) check."""
    worst = None
    for mask, describe in checks:
        rows = np.flatnonzero(np.asarray(mask))
        if len(rows) and (worst is None or rows[0] < worst[0]):
            worst = (int(rows[0]), describe)
    if worst is not None:
        k, describe = worst
        raise IngestError(describe(k), line_number=k + 2, path=path)


def ingest(path):
    """
    Validated trial blocks of a trial file, keyed by context.

    Contexts absent from the file are absent from the result; analyses that
    need all four refuse later.

    Raises:
        IngestError: naming the first malformed line (unknown setting id,
            outcome other than +-1, bad or repeated trial index).
    """
    t = _read_table(path, TRIAL_HEADER, TRIAL_FIELDS)
    if t.empty:
        return {}
    checks = [
        (~t.setting.isin(SETTING_IDS), lambda k: "unknown setting id %r" % t.setting.iloc[k]),
        _pm1_check(t, "outcome_i"),
        _pm1_check(t, "outcome_j"),
        _integer_check(t, "trial_index"),
        _integer_check(t, "rng_stream_id"),
    ]
    _first_failure(checks, path)
    trial_index = t.trial_index.astype(np.int64)
    _first_failure(
        [(trial_index.duplicated(), lambda k: "repeated trial_index %s" % t.trial_index.iloc[k])],
        path,
    )

    oi = t.outcome_i.astype(np.int8).to_numpy()
    oj = t.outcome_j.astype(np.int8).to_numpy()
    stream = t.rng_stream_id.astype(np.int64).to_numpy()
    blocks = {}
    for sid, context in zip(SETTING_IDS, CONTEXTS):
        rows = np.flatnonzero((t.setting == sid).to_numpy())
        if len(rows):
            blocks[context] = TrialBlock(context, oi[rows], oj[rows], stream[rows])
    return blocks


def ingest_repeatability(path):
    """RepeatabilityBatches of a repeatability file, one per observable, in index order."""
    t = _read_table(path, REPEATABILITY_HEADER, REPEATABILITY_FIELDS)
    if t.empty:
        return []
    checks = [
        (~t.observable.isin(("0", "1", "2", "3")), lambda k: "unknown observable %r" % t.observable.iloc[k]),
        (~t.branch.isin(BRANCHES), lambda k: "unknown branch %r" % t.branch.iloc[k]),
        _pm1_check(t, "first_outcome"),
        _pm1_check(t, "second_outcome"),
        (
            ~t.post_selected.isin(("0", "1")),
            lambda k: "post_selected must be 0 or 1, got %r" % t.post_selected.iloc[k],
        ),
        _integer_check(t, "run_index"),
    ]
    _first_failure(checks, path)
    obs = t.observable.astype(np.int64).to_numpy()
    batches = []
    for i in sorted(set(obs.tolist())):
        rows = obs == i
        batches.append(
            RepeatabilityBatch(
                i,
                t.branch.to_numpy()[rows].astype(object),
                t.first_outcome.astype(np.int8).to_numpy()[rows],
                t.second_outcome.astype(np.int8).to_numpy()[rows],
                t.post_selected.to_numpy()[rows] == "1",
                t.run_index.astype(np.int64).to_numpy()[rows],
            )
        )
    return batches
