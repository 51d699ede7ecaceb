import json
import os.path as osp

import numpy as np
import pandas as pd
import pytest

from ksion.driver.config import ExperimentConfig, NoiseConfig, load_config, save_config
from ksion.driver.experiment import generate_trials, prepare_state, run_simulation
from ksion.driver.ingest import ingest, ingest_repeatability
from ksion.driver.report import report, table1_report
from ksion.measurement.core import CONTEXTS, NoiseModel, counter_rng
from ksion.measurement.repeatability import REPEATABILITY_HEADER
from ksion.measurement.strategies import NoncontextualStrategy
from ksion.measurement.trials import (
    TRIAL_HEADER,
    measure_trial,
    records_to_frame,
    trial_key,
    write_trial_file,
)
from ksion.utils.errors import IngestError, MissingContextError, ParameterError


def _write(path, lines):
    path.write_text("\n".join(lines) + "\n")
    return str(path)


def _trial_line(setting, oi, oj, index, stream=None):
    return "\t".join(str(x) for x in (setting, oi, oj, index, index if stream is None else stream))


# Configuration


def test_published_config_loads():
    config = load_config()
    assert config.state_source == "ms_gate"
    assert config.noise.depolarization is None
    assert config.noise.target_c == pytest.approx(2.526)
    assert config.ms_params().gate_time == pytest.approx(45.4)
    assert len(config.observable_specs()) == 4


def test_unknown_keys_are_rejected():
    with pytest.raises(ParameterError, match="bogus"):
        ExperimentConfig.from_dict({"bogus": 1})
    with pytest.raises(ParameterError, match="noise:x"):
        ExperimentConfig.from_dict({"noise": {"x": 1}})
    with pytest.raises(ParameterError):
        ExperimentConfig(ms={"detuning": 3}).validate()
    with pytest.raises(ParameterError):
        ExperimentConfig().override("noise:nothing", 1)


@pytest.mark.parametrize(
    "changes",
    [
        {"seed": -1},
        {"trials_per_setting": 0},
        {"state_source": "ion_trap"},
        {"dark_outcome": 0},
        {"workers": 0},
        {"noise": NoiseConfig(yb=[0.5])},
        {"noise": NoiseConfig(depolarization=None)},
        {"noise": NoiseConfig(depolarization=1.5)},
    ],
)
def test_invalid_configs(changes):
    with pytest.raises(ParameterError):
        ExperimentConfig(**changes).validate()


def test_overrides_and_hash():
    base = ExperimentConfig()
    changed = base.override("noise:depolarization", 0.2)
    assert changed.noise.depolarization == 0.2
    assert base.noise.depolarization == 0.0
    assert changed.config_hash != base.config_hash
    assert base.override("workers", 4).config_hash == base.config_hash
    assert base.override("exp_name", "other").config_hash == base.config_hash
    assert base.with_overrides({"seed": None}).config_hash == base.config_hash
    assert base.override("ms:nbar_oop", 0.1).ms == {"nbar_oop": 0.1}


def test_config_file_round_trip(tmp_path):
    config = ExperimentConfig(seed=3, noise=NoiseConfig(depolarization=0.05))
    path = save_config(config, str(tmp_path / "config.json"))
    assert load_config(path).config_hash == config.config_hash


def test_malformed_config_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text("{not json")
    with pytest.raises(ParameterError):
        load_config(str(path))


# Trial files


def test_ingest_reads_contexts(tmp_path):
    path = _write(
        tmp_path / "trials.txt",
        [
            TRIAL_HEADER,
            _trial_line("01", 1, -1, 0),
            _trial_line("12", -1, -1, 1),
            _trial_line("01", 1, 1, 2),
        ],
    )
    blocks = ingest(path)
    assert set(blocks) == {(0, 1), (1, 2)}
    np.testing.assert_array_equal(blocks[(0, 1)].outcome_j, [-1, 1])
    with pytest.raises(MissingContextError):
        report(blocks)


def test_single_trial_records_ingest_back(tmp_path, bell, calibrated_specs):
    noise = NoiseModel.noiseless()
    records = [
        measure_trial(bell, c, calibrated_specs, noise, counter_rng(trial_key(1, c), k),
                      trial_index=4 * k + n, rng_stream_id=k)
        for k in range(5)
        for n, c in enumerate(CONTEXTS)
    ]
    frame = records_to_frame(records)
    assert list(frame.setting[:4]) == ["01", "12", "23", "30"]
    blocks = ingest(write_trial_file(frame, str(tmp_path / "trials.txt")))
    for n, c in enumerate(CONTEXTS):
        np.testing.assert_array_equal(blocks[c].outcome_i, [r.outcome_i for r in records[n::4]])
        np.testing.assert_array_equal(blocks[c].rng_stream_id, np.arange(5))


def test_ingest_header_only(tmp_path):
    assert ingest(_write(tmp_path / "trials.txt", [TRIAL_HEADER])) == {}


@pytest.mark.parametrize(
    "lines,line_number",
    [
        (["# ksion-trials v2: setting"], 1),
        ([TRIAL_HEADER, _trial_line("01", 1, 1, 0), _trial_line("02", 1, 1, 1)], 3),
        ([TRIAL_HEADER, _trial_line("01", 1, 2, 0)], 2),
        ([TRIAL_HEADER, _trial_line("01", 1, 1, 0), _trial_line("12", 0, 1, 1)], 3),
        ([TRIAL_HEADER, _trial_line("01", 1, 1, 0), "12\t1\t1\t1"], 3),
        ([TRIAL_HEADER, _trial_line("01", 1, 1, 0), _trial_line("12", 1, 1, "x")], 3),
        ([TRIAL_HEADER, _trial_line("01", 1, 1, 0), _trial_line("12", 1, 1, "9" * 20)], 3),
        ([TRIAL_HEADER, _trial_line("01", 1, 1, 0, stream="9" * 20)], 2),
        (
            [
                TRIAL_HEADER,
                _trial_line("01", 1, 1, 0),
                _trial_line("23", 1, 1, 1),
                _trial_line("30", 1, 1, 1),
            ],
            4,
        ),
    ],
)
def test_ingest_errors_name_the_line(tmp_path, lines, line_number):
    path = _write(tmp_path / "trials.txt", lines)
    with pytest.raises(IngestError) as info:
        ingest(path)
    assert info.value.line_number == line_number
    assert ":%d" % line_number in str(info.value)


def test_repeatability_ingest_bounds_run_index(tmp_path):
    path = _write(
        tmp_path / "repeatability.txt",
        [REPEATABILITY_HEADER, "0\tdark\t1\t1\t1\t0", "0\tdark\t1\t1\t1\t" + "9" * 19],
    )
    with pytest.raises(IngestError) as info:
        ingest_repeatability(path)
    assert info.value.line_number == 3


def test_ingest_empty_file(tmp_path):
    path = tmp_path / "trials.txt"
    path.write_text("")
    with pytest.raises(IngestError) as info:
        ingest(str(path))
    assert info.value.line_number == 1


def test_ingest_missing_file(tmp_path):
    with pytest.raises(IngestError):
        ingest(str(tmp_path / "absent.txt"))


# Simulated runs


def test_prepare_ideal_state(small_config):
    prepared = prepare_state(small_config)
    assert prepared.depolarization == pytest.approx(0.1)
    assert prepared.calibration.sense_ba == -1
    assert prepared.trace is None


def test_prepare_solves_depolarization(small_config):
    config = small_config.override("noise:depolarization", None).override("noise:target_c", 2.4)
    prepared = prepare_state(config)
    assert 0 < prepared.depolarization < 1


def test_trials_do_not_depend_on_sharding(small_config):
    prepared = prepare_state(small_config)
    noise = small_config.noise_model()
    whole = generate_trials(prepared.state, prepared.specs, noise, 1000, seed=5)
    sharded = generate_trials(
        prepared.state, prepared.specs, noise, 1000, seed=5, block_size=300, workers=2
    )
    for c in CONTEXTS:
        np.testing.assert_array_equal(whole[c].outcome_i, sharded[c].outcome_i)
        np.testing.assert_array_equal(whole[c].outcome_j, sharded[c].outcome_j)


def test_run_is_reproducible(small_config):
    first = run_simulation(small_config, quiet=True)
    second = run_simulation(small_config, quiet=True)
    pd.testing.assert_frame_equal(first.trials, second.trials)
    assert first.report.c == second.report.c
    assert first.manifest.config_hash == second.manifest.config_hash
    other = run_simulation(small_config.override("seed", 8), quiet=True)
    assert not first.trials.equals(other.trials)


def test_run_matches_exact_value(small_config):
    result = run_simulation(small_config, quiet=True)
    exact = result.report.extras["exact_C"]
    assert abs(result.report.c - exact) < 5 * result.report.sem_c
    assert result.report.c > 2
    assert result.manifest.trial_counts == {"01": 2000, "12": 2000, "23": 2000, "30": 2000}
    assert len(result.repeatability) == 4


def test_run_files_reproduce_the_report(small_config, tmp_path):
    out = str(tmp_path / "run")
    result = run_simulation(small_config, output_dir=out, quiet=True)
    for name in ("trials.txt", "repeatability.txt", "report.json", "report.txt",
                 "correlators.txt", "repeatability_summary.txt", "config.json", "manifest.json"):
        assert osp.exists(osp.join(out, name)), name

    again = report(ingest(osp.join(out, "trials.txt")), small_config,
                   ingest_repeatability(osp.join(out, "repeatability.txt")))
    assert again.c == pytest.approx(result.report.c, abs=1e-12)
    assert again.sem_c == pytest.approx(result.report.sem_c, abs=1e-12)
    for model, eps in result.report.epsilon.items():
        assert again.epsilon[model] == pytest.approx(eps, abs=1e-12)
    assert again.mean_repeatability == pytest.approx(result.report.mean_repeatability)

    with open(osp.join(out, "manifest.json")) as f:
        manifest = json.load(f)
    assert manifest["config_hash"] == small_config.config_hash
    with open(osp.join(out, "report.json")) as f:
        saved = json.load(f)
    assert saved["C"] == pytest.approx(result.report.c)
    assert set(saved["epsilon"]) == {"fraction", "mnc", "sequential"}
    correlators = pd.read_csv(osp.join(out, "correlators.txt"), sep="\t", dtype={"Setting": str})
    assert list(correlators.Setting) == ["01", "12", "23", "30"]


def test_run_without_repeatability(small_config):
    result = run_simulation(small_config.override("repeatability_runs", 0), quiet=True)
    assert result.report.epsilon["sequential"] is None
    assert result.report.epsilon["mnc"] is not None


def test_ms_gate_run_reports_gate_quality():
    config = ExperimentConfig(
        trials_per_setting=500,
        repeatability_runs=0,
        state_source="ms_gate",
        trace_points=5,
        parity_points=9,
        noise=NoiseConfig(depolarization=0.0),
        ms={"n_max": 8, "max_step_us": 0.5},
    )
    result = run_simulation(config, quiet=True)
    extras = result.report.extras
    assert extras["bell_fidelity"] > 0.99
    assert extras["parity_contrast"] > 0.99
    assert extras["exact_C"] == pytest.approx(2 * np.sqrt(2), abs=1e-2)
    assert result.prepared.trace.populations.shape == (5, 4)


# Reports


def test_table1_report(tmp_path):
    result = table1_report(output_dir=str(tmp_path))
    assert result.c == pytest.approx(2.5258, abs=1e-9)
    assert result.sem_c == pytest.approx(0.0155, abs=5e-4)
    assert result.fraction_f == pytest.approx(0.97)
    assert result.epsilon["fraction"] == pytest.approx(0.06)
    assert result.epsilon["sequential"] == pytest.approx(0.128)
    with open(osp.join(str(tmp_path), "report.json")) as f:
        saved = json.load(f)
    assert saved["marginals"]["1|0"]["mean"] == pytest.approx(0.1096)
    assert saved["counts"]["30"]["n+-"] == 4334


def test_report_of_noncontextual_data():
    blocks = NoncontextualStrategy(noise=NoiseModel.noiseless()).sample(4000, seed=2)
    result = report(blocks)
    assert result.c <= 2 + 4 * result.sem_c
    assert result.significance["bound"] <= 4
