"""
The contextuality report: C with its SEM, the three corrected bounds and
the significance of the violation of each.
"""
from dataclasses import dataclass, field

from ksion.analysis.core import (
    ALGEBRAIC_MAX,
    NONCONTEXTUAL_BOUND,
    SEQUENTIAL_COEFFICIENT,
    ContextCounts,
    merge_counts,
    bootstrap_epsilon_mnc,
    chsh_statistic,
    correlator,
    epsilon_fraction,
    epsilon_mnc,
    epsilon_sequential,
    marginal_table,
    violation_significance,
)
from ksion.measurement.core import CONTEXTS, SETTING_IDS
from ksion.measurement.repeatability import mean_repeatability
from ksion.utils.errors import EstimationError, MissingContextError

EPSILON_MODELS = ("fraction", "mnc", "sequential")
NOT_COMPUTED = "not computed"


@dataclass
class ContextualityReport:
    """
    Everything the analysis derives from a dataset.

    ``epsilon`` and ``significance`` are keyed by model name; a model whose
    inputs are missing maps to None. ``significance["bound"]`` is measured
    against the uncorrected bound.
    """

    c: float
    sem_c: float
    correlators: dict
    marginals: dict
    counts: dict
    epsilon: dict = field(default_factory=dict)
    epsilon_sem: dict = field(default_factory=dict)
    significance: dict = field(default_factory=dict)
    mean_repeatability: float = None
    mean_repeatability_sem: float = None
    fraction_f: float = None
    repeatability: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "C": self.c,
            "sem_C": self.sem_c,
            "correlators": self.correlators,
            "marginals": self.marginals,
            "counts": self.counts,
            "epsilon": {k: self.epsilon.get(k) for k in EPSILON_MODELS},
            "epsilon_sem": self.epsilon_sem,
            "significance": self.significance,
            "mean_repeatability": self.mean_repeatability,
            "mean_repeatability_sem": self.mean_repeatability_sem,
            "fraction_f": self.fraction_f,
            "repeatability": self.repeatability,
            "extras": self.extras,
        }

    def to_text(self):
        lines = ["Contextuality report", "=" * 40]
        lines.append("%-10s %10s %10s %8s" % ("context", "E_ij", "SEM", "n"))
        for sid in SETTING_IDS:
            e = self.correlators[sid]
            lines.append("%-10s %10.4f %10.4f %8d" % ("{%s,%s}" % tuple(sid), e["mean"], e["sem"], e["n"]))
        lines.append("")
        lines.append("C = %.4f +- %.4f" % (self.c, self.sem_c))
        lines.append(
            "Against the bound %.1f: %.1f standard deviations"
            % (NONCONTEXTUAL_BOUND, self.significance["bound"])
        )
        if self.mean_repeatability is not None:
            lines.append(
                "Mean repeatability = %.4f +- %.4f (f = %.4f)"
                % (self.mean_repeatability, self.mean_repeatability_sem, self.fraction_f)
            )
        lines.append("")
        lines.append("%-12s %10s %10s %14s" % ("model", "epsilon", "SEM", "significance"))
        for model in EPSILON_MODELS:
            eps = self.epsilon.get(model)
            if eps is None:
                lines.append("%-12s %10s" % (model, NOT_COMPUTED))
                continue
            sem = self.epsilon_sem.get(model)
            sem_str = "%10.4f" % sem if sem is not None else "%10s" % "-"
            lines.append("%-12s %10.4f %s %13.1fs" % (model, eps, sem_str, self.significance[model]))
        if "mnc_bootstrap_sem" in self.epsilon_sem:
            lines.append("mnc bootstrap SEM: %.4f" % self.epsilon_sem["mnc_bootstrap_sem"])
        return "\n".join(lines) + "\n"


def build_report(
    counts,
    repeatability=None,
    sequential_coefficient=SEQUENTIAL_COEFFICIENT,
    bootstrap_resamples=0,
    seed=0,
    bound=NONCONTEXTUAL_BOUND,
    algebraic_max=ALGEBRAIC_MAX,
    fraction_f=None,
):
    """
    Assemble a ContextualityReport.

    Args:
        counts (dict): ContextCounts keyed by context pair; all four needed.
        repeatability: Optional list of RepeatabilityEstimate, or a
            (mean R, SEM) pair. Without it the fraction and sequential
            corrections are not computed.
        sequential_coefficient: Coefficient of the sequential correction.
        bootstrap_resamples: When positive, also bootstrap the SEM of the
            maximally-noncontextual correction.
        seed: Seed of the bootstrap stream.
        bound: Noncontextual bound of C.
        algebraic_max: Largest value C can take.
        fraction_f: Joint repeatability f used by the fraction correction.
            Defaults to the squared mean repeatability.
    """
    missing = [c for c in CONTEXTS if c not in counts or counts[c].n == 0]
    if missing:
        raise MissingContextError("Report needs all four contexts, missing %s." % (missing,))

    estimates = {c: correlator(counts[c]) for c in CONTEXTS}
    c_value, sem_c = chsh_statistic(estimates)
    table = marginal_table(counts)
    eps_mnc, sem_mnc = epsilon_mnc(table)

    epsilon = {"fraction": None, "mnc": eps_mnc, "sequential": None}
    epsilon_sem = {"mnc": sem_mnc}
    report = ContextualityReport(
        c=c_value,
        sem_c=sem_c,
        correlators={
            SETTING_IDS[k]: {"mean": e.mean, "sem": e.sem, "n": e.n}
            for k, e in enumerate(estimates[c] for c in CONTEXTS)
        },
        marginals=table.to_dict(),
        counts={counts[c].setting_id: counts[c].to_dict() for c in CONTEXTS},
        epsilon=epsilon,
        epsilon_sem=epsilon_sem,
    )

    if repeatability is not None:
        if isinstance(repeatability, tuple):
            r_bar, r_sem = repeatability
        else:
            r_bar, r_sem = mean_repeatability(repeatability)
            report.repeatability = {
                str(e.observable): {"R": e.value, "sem": e.sem, "n": e.n_retained}
                for e in repeatability
            }
        report.mean_repeatability, report.mean_repeatability_sem = r_bar, r_sem
        report.fraction_f = r_bar ** 2 if fraction_f is None else fraction_f
        epsilon["fraction"] = epsilon_fraction(report.fraction_f, algebraic_max, bound)
        epsilon["sequential"] = epsilon_sequential(r_bar, sequential_coefficient)
        epsilon_sem["fraction"] = 2 * (algebraic_max - bound) * r_bar * r_sem
        epsilon_sem["sequential"] = sequential_coefficient * r_sem

    if bootstrap_resamples:
        _, boot_sem = bootstrap_epsilon_mnc(counts, bootstrap_resamples, seed)
        epsilon_sem["mnc_bootstrap_sem"] = boot_sem

    report.significance = {"bound": _significance(c_value, sem_c, 0.0, bound)}
    for model in EPSILON_MODELS:
        report.significance[model] = _significance(c_value, sem_c, epsilon[model], bound)
    return report


def counts_from_blocks(blocks):
    """ContextCounts per context from TrialBlocks, merging repeated contexts."""
    return merge_counts(*[ContextCounts.from_block(b) for b in blocks])


def _significance(c, sem_c, epsilon, bound):
    """None when the correction is missing or a zero-SEM dataset sits off the bound."""
    if epsilon is None:
        return None
    try:
        return violation_significance(c, sem_c, epsilon, bound)
    except EstimationError:
        return None
