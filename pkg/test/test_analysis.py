import numpy as np
import pytest

from ksion.analysis.calibration import (
    TSIRELSON,
    calibrate_phases,
    depolarization_for_target,
    exact_chsh,
)
from ksion.analysis.contextuality import build_report
from ksion.analysis.core import (
    ContextCounts,
    CorrelatorEstimate,
    bootstrap_epsilon_mnc,
    chsh_statistic,
    correlator,
    epsilon_fraction,
    epsilon_mnc,
    epsilon_sequential,
    marginal_table,
    merge_counts,
    pm1_estimate,
    violation_significance,
)
from ksion.measurement.core import CONTEXTS, NoiseModel, ConfusionMatrix, exact_recorded_chsh
from ksion.quantum.core import QuantumState, apply_depolarizing
from ksion.utils.errors import EstimationError, MissingContextError, ParameterError

PUBLISHED_MARGINALS = {
    (0, 1): -0.0008,
    (1, 0): 0.1096,
    (1, 2): 0.1066,
    (2, 1): 0.1236,
    (2, 3): 0.1356,
    (3, 2): 0.1078,
    (3, 0): 0.1114,
    (0, 3): -0.0056,
}


def test_counts_from_outcomes():
    counts = ContextCounts.from_outcomes((0, 1), [1, 1, -1, -1, 1], [1, -1, -1, 1, 1])
    assert counts.to_dict() == {"n++": 2, "n--": 1, "n+-": 1, "n-+": 1}
    assert counts.product_mean() == pytest.approx(0.2)
    assert counts.marginal_i_mean() == pytest.approx(0.2)
    assert counts.marginal_j_mean() == pytest.approx(0.2)
    with pytest.raises(ParameterError):
        ContextCounts.from_outcomes((0, 1), [1, 0], [1, 1])


def test_counts_merge_in_any_order():
    a = ContextCounts.from_cells((1, 2), 5, 4, 1, 0)
    b = ContextCounts.from_cells((1, 2), 1, 2, 3, 4)
    c = ContextCounts.from_cells((2, 3), 1, 1, 1, 1)
    forward = merge_counts({a.context: a}, b, c)
    backward = merge_counts(c, b, a)
    assert forward.keys() == backward.keys()
    for key in forward:
        np.testing.assert_array_equal(forward[key].table, backward[key].table)
    assert forward[(1, 2)].n == 20
    with pytest.raises(ParameterError):
        a + c


def test_pm1_estimate():
    est = pm1_estimate(0.6, 101)
    assert est.sem == pytest.approx(np.sqrt(0.64 / 100))
    with pytest.raises(EstimationError):
        pm1_estimate(0.1, 1)


def test_correlator_of_empty_context():
    with pytest.raises(EstimationError):
        correlator(ContextCounts((0, 1)))


def test_table1_correlators(table1_counts):
    estimates = {c: correlator(table1_counts[c]) for c in CONTEXTS}
    means = [estimates[c].mean for c in CONTEXTS]
    np.testing.assert_allclose(means, [0.6164, 0.625, 0.6678, -0.6166], atol=1e-12)
    c, sem = chsh_statistic(estimates)
    assert c == pytest.approx(2.5258, abs=1e-9)
    assert sem == pytest.approx(0.0155, abs=5e-4)


def test_chsh_needs_every_context():
    est = CorrelatorEstimate(0.5, 0.01, 100)
    with pytest.raises(MissingContextError):
        chsh_statistic({(0, 1): est, (1, 2): est, (2, 3): est})
    with pytest.raises(MissingContextError):
        chsh_statistic([est, est])
    assert chsh_statistic([est] * 4)[0] == pytest.approx(1.0)


def test_table1_marginals_and_mnc(table1_counts):
    table = marginal_table(table1_counts)
    assert table.is_complete()
    for key, value in PUBLISHED_MARGINALS.items():
        assert table[key].mean == pytest.approx(value, abs=1e-12)
    eps, sem = epsilon_mnc(table)
    assert eps == pytest.approx(0.0234, abs=1e-9)
    assert sem == pytest.approx(0.028, abs=1e-3)
    assert table.to_dict()["0|1"]["mean"] == pytest.approx(-0.0008)


def test_mnc_needs_every_marginal(table1_counts):
    partial = {c: table1_counts[c] for c in CONTEXTS[:3]}
    table = marginal_table(partial)
    assert (3, 0) in table.missing()
    with pytest.raises(MissingContextError):
        epsilon_mnc(table)


def test_bootstrap_is_reproducible(table1_counts):
    first = bootstrap_epsilon_mnc(table1_counts, 200, seed=1)
    second = bootstrap_epsilon_mnc(table1_counts, 200, seed=1)
    assert first == second
    assert 0 < first[1] < 0.05
    with pytest.raises(ParameterError):
        bootstrap_epsilon_mnc(table1_counts, 1)


def test_epsilon_models():
    assert epsilon_fraction(0.97) == pytest.approx(0.06)
    assert epsilon_fraction(1.0) == 0.0
    assert epsilon_sequential(0.984) == pytest.approx(0.128)
    assert epsilon_sequential(1.0) == 0.0
    with pytest.raises(ParameterError):
        epsilon_fraction(1.1)
    with pytest.raises(ParameterError):
        epsilon_sequential(-0.1)


def test_significance():
    assert violation_significance(2.526, 0.016, 0.128) == pytest.approx(24.875)
    assert violation_significance(2.526, 0.016, 0.06) == pytest.approx(29.125)
    assert violation_significance(2.0, 0.0, 0.0) == 0.0
    with pytest.raises(EstimationError):
        violation_significance(2.1, 0.0, 0.0)
    with pytest.raises(ParameterError):
        violation_significance(2.1, -0.1, 0.0)


def test_report_of_table1(table1_counts):
    report = build_report(table1_counts, repeatability=(0.984, 0.004), fraction_f=0.97)
    assert report.c == pytest.approx(2.5258, abs=1e-9)
    assert report.epsilon["fraction"] == pytest.approx(0.06)
    assert report.epsilon["mnc"] == pytest.approx(0.0234, abs=1e-9)
    assert report.epsilon["sequential"] == pytest.approx(0.128)
    assert report.epsilon_sem["sequential"] == pytest.approx(0.032)
    for model in ("fraction", "mnc", "sequential"):
        assert report.significance[model] > 20
    assert report.significance["bound"] > report.significance["mnc"]
    assert "C = 2.5258" in report.to_text()


def test_report_fraction_defaults_to_squared_repeatability(table1_counts):
    report = build_report(table1_counts, repeatability=(0.984, 0.004))
    assert report.fraction_f == pytest.approx(0.984 ** 2)
    assert report.epsilon["fraction"] == pytest.approx(2 * (1 - 0.984 ** 2))


def test_report_without_repeatability(table1_counts):
    report = build_report(table1_counts, bootstrap_resamples=50, seed=3)
    assert report.epsilon["fraction"] is None
    assert report.significance["sequential"] is None
    assert "mnc_bootstrap_sem" in report.epsilon_sem
    assert "not computed" in report.to_text()
    assert report.to_dict()["epsilon"]["sequential"] is None


def test_report_rejects_missing_context(table1_counts):
    del table1_counts[(3, 0)]
    with pytest.raises(MissingContextError):
        build_report(table1_counts)


def test_uncalibrated_bell_state_shows_nothing(bell, specs):
    assert exact_chsh(bell, specs) == pytest.approx(0.0, abs=1e-12)


def test_calibration_reaches_tsirelson(bell, specs):
    calibration = calibrate_phases(bell, specs)
    assert calibration.sense_ba == -1
    assert calibration.achieved_c == pytest.approx(TSIRELSON, abs=1e-8)
    assert exact_chsh(bell, calibration.apply(specs)) == pytest.approx(TSIRELSON, abs=1e-8)
    assert not calibration.degenerate


def test_calibration_of_mixed_state_is_degenerate(specs):
    with pytest.warns(UserWarning):
        calibration = calibrate_phases(QuantumState.maximally_mixed(), specs)
    assert calibration.degenerate
    assert calibration.achieved_c == pytest.approx(0.0, abs=1e-12)


def test_depolarization_hits_target(bell, calibrated_specs):
    noise = NoiseModel(ConfusionMatrix(0.0096, 0.0225), ConfusionMatrix(0.0210, 0.0001))
    p = depolarization_for_target(bell, calibrated_specs, noise, 2.526)
    state = apply_depolarizing(bell, p)
    assert exact_recorded_chsh(state, calibrated_specs, noise) == pytest.approx(2.526, abs=1e-9)
    noiseless_p = depolarization_for_target(bell, calibrated_specs, NoiseModel.noiseless(), 2.526)
    assert noiseless_p == pytest.approx(1 - 2.526 / TSIRELSON, abs=1e-9)
    with pytest.raises(ParameterError):
        depolarization_for_target(bell, calibrated_specs, noise, 3.5)
