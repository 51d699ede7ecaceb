"""
Reports from trial batches, and the files a report leaves behind.
"""
import json
import os.path as osp

from ksion.analysis.contextuality import build_report
from ksion.analysis.core import ContextCounts, merge_counts
from ksion.dynamics.ms_gate import parity_to_csv, trace_to_csv
from ksion.measurement.core import CONTEXTS, SETTING_IDS
from ksion.measurement.repeatability import RepeatabilityBatch, estimate_from_batch
from ksion.user_config import PACKAGE_DATA_DIR
from ksion.utils.errors import ParameterError
from ksion.utils.logx import Logger, StatsLogger

TABLE1_PATH = osp.join(PACKAGE_DATA_DIR, "table1.json")


def _as_counts(batches):
    if isinstance(batches, dict):
        batches = list(batches.values())
    shards = []
    for b in batches:
        shards.append(b if isinstance(b, ContextCounts) else ContextCounts.from_block(b))
    return merge_counts(*shards) if shards else {}


def _as_estimates(repeatability):
    if repeatability is None or isinstance(repeatability, tuple):
        return repeatability
    repeatability = list(repeatability)
    if not repeatability:
        return None
    return [
        estimate_from_batch(r) if isinstance(r, RepeatabilityBatch) else r for r in repeatability
    ]


def report(
    batches,
    config=None,
    repeatability=None,
    output_dir=None,
    trace=None,
    scan=None,
    extras=None,
    quiet=True,
    fraction_f=None,
):
    """
    ContextualityReport of a dataset, optionally written to ``output_dir``.

    Args:
        batches: TrialBlocks or ContextCounts, as a list or keyed by context.
        config (ExperimentConfig): Supplies the correction constants and the
            bootstrap settings. Defaults apply without it.
        repeatability: RepeatabilityBatches, RepeatabilityEstimates or a
            (mean R, SEM) pair. Empty or None leaves the fraction and
            sequential corrections uncomputed.
        output_dir: Where to write report.txt, report.json, correlators.txt,
            repeatability_summary.txt and the optional CSVs.
        trace (EvolutionTrace), scan (ParityScan): Written as CSV when given.
        extras (dict): Stored in the report's ``extras``.
    """
    kwargs = {}
    if config is not None:
        kwargs = dict(
            sequential_coefficient=config.epsilon.sequential_coefficient,
            bootstrap_resamples=config.bootstrap_resamples,
            seed=config.seed,
            bound=config.epsilon.bound,
            algebraic_max=config.epsilon.algebraic_max,
        )
    estimates = _as_estimates(repeatability)
    result = build_report(_as_counts(batches), estimates, fraction_f=fraction_f, **kwargs)
    if extras:
        result.extras.update(extras)
    if output_dir is not None:
        write_report_artifacts(result, output_dir, estimates, trace, scan, quiet=quiet)
    return result


def write_report_artifacts(result, output_dir, estimates=None, trace=None, scan=None, quiet=True):
    """Write the report files; returns a dict of name -> path."""
    files = {}
    logger = Logger(output_dir, output_fname="correlators.txt", quiet=quiet)
    for sid in SETTING_IDS:
        e = result.correlators[sid]
        logger.log_tabular("Setting", sid)
        logger.log_tabular("N", e["n"])
        logger.log_tabular("Correlator", e["mean"])
        logger.log_tabular("SemCorrelator", e["sem"])
        logger.log_tabular("MarginalI", result.marginals["%s|%s" % (sid[0], sid[1])]["mean"])
        logger.log_tabular("MarginalJ", result.marginals["%s|%s" % (sid[1], sid[0])]["mean"])
        logger.dump_tabular()
    logger.close()
    files["correlators"] = logger.output_path("correlators.txt")

    if isinstance(estimates, list) and estimates:
        stats = StatsLogger(output_dir, output_fname="repeatability_summary.txt", quiet=quiet)
        for est in estimates:
            stats.log_tabular("Observable", est.observable)
            if est.batch is not None:
                keep = est.batch.post_selected.astype(bool)
                agree = est.batch.first_outcome[keep] == est.batch.second_outcome[keep]
                stats.store(Repeat=agree.astype(float))
                stats.log_tabular("Repeat", with_min_and_max=False)
            else:
                stats.log_tabular("AverageRepeat", est.value)
                stats.log_tabular("StdRepeat", "")
            stats.log_tabular("SemRepeat", est.sem)
            stats.log_tabular("Retained", est.n_retained)
            stats.log_tabular("Discarded", est.n_discarded)
            stats.dump_tabular()
        stats.close()
        files["repeatability_summary"] = stats.output_path("repeatability_summary.txt")

    files["report_text"] = logger.save_text(result.to_text(), "report.txt")
    files["report_json"] = logger.save_json(result.to_dict(), "report.json")
    if trace is not None:
        files["evolution_trace"] = trace_to_csv(trace, logger.output_path("evolution_trace.csv"))
    if scan is not None:
        files["parity_scan"] = parity_to_csv(scan, logger.output_path("parity_scan.csv"))
    return files


def load_table1(path=None):
    """
    The published correlation table as ContextCounts, plus its repeatability
    summary.

    Returns:
        (counts keyed by context, dict with ``mean_repeatability``,
        ``mean_repeatability_sem`` and ``fraction_f``).
    """
    with open(path or TABLE1_PATH) as f:
        raw = json.load(f)
    counts = {}
    for sid, cells in raw["counts"].items():
        if sid not in SETTING_IDS:
            raise ParameterError("Unknown setting %r in the correlation table." % sid)
        context = CONTEXTS[SETTING_IDS.index(sid)]
        counts[context] = ContextCounts.from_cells(
            context, cells["n++"], cells["n--"], cells["n+-"], cells["n-+"]
        )
    return counts, raw["repeatability"]


def table1_report(path=None, output_dir=None, quiet=True):
    """The published analysis, recomputed from the shipped correlation table."""
    counts, rep = load_table1(path)
    return report(
        counts,
        repeatability=(rep["mean_repeatability"], rep["mean_repeatability_sem"]),
        output_dir=output_dir,
        quiet=quiet,
        fraction_f=rep.get("fraction_f"),
    )
