import json
import os.path as osp

import numpy as np
import pandas as pd
import pytest

from ksion.driver.config import ExperimentConfig, NoiseConfig
from ksion.utils import plot
from ksion.utils.errors import IngestError, ParameterError
from ksion.utils.logx import Logger, StatsLogger, dumps_json
from ksion.utils.parallel_tools import num_workers, parallel_map, statistics_scalar
from ksion.utils.run_utils import ExperimentGrid, call_experiment, setup_logger_kwargs, valid_str
from ksion.utils.serialization_utils import convert_json


def _square(x):
    return x * x


def test_num_workers():
    assert num_workers(None) == 1
    assert num_workers(3) == 3
    assert num_workers("auto") >= 1
    with pytest.raises(ParameterError):
        num_workers(0)


@pytest.mark.parametrize("n_jobs", [1, 2])
def test_parallel_map_keeps_order(n_jobs):
    assert parallel_map(_square, range(6), n_jobs) == [0, 1, 4, 9, 16, 25]


def test_statistics_scalar():
    mean, std, x_min, x_max = statistics_scalar([1.0, 2.0, 3.0], with_min_and_max=True)
    assert (mean, x_min, x_max) == (2.0, 1.0, 3.0)
    assert std == pytest.approx(np.sqrt(2 / 3))


def test_convert_json():
    out = convert_json({(0, 1): np.float64(0.5), "arr": np.arange(3), "z": 1 + 2j, "n": np.int8(3)})
    assert out == {"0,1": 0.5, "arr": [0, 1, 2], "z": {"re": 1.0, "im": 2.0}, "n": 3}
    assert json.loads(dumps_json(NoiseConfig()))["depolarization"] == 0.0


def test_errors_carry_location():
    err = IngestError("bad", line_number=4, path="trials.txt")
    assert str(err) == "trials.txt:4: bad"
    assert isinstance(err, ValueError)


def test_logger_writes_rows(tmp_path):
    logger = Logger(str(tmp_path), output_fname="rows.txt", quiet=True)
    for k in range(2):
        logger.log_tabular("Step", k)
        logger.log_tabular("Value", 0.5 * k)
        logger.dump_tabular()
    logger.close()
    table = pd.read_csv(tmp_path / "rows.txt", sep="\t")
    assert list(table.columns) == ["Step", "Value"]
    np.testing.assert_allclose(table.Value, [0.0, 0.5])

    with pytest.raises(AssertionError):
        logger.log_tabular("Other", 1)


def test_logger_without_output_dir():
    logger = Logger(quiet=True)
    assert logger.save_json({"a": 1}, "x.json") is None
    assert logger.output_path("x.json") is None
    logger.log_tabular("A", 1)
    logger.dump_tabular()


def test_logger_reuses_existing_output(tmp_path, capsys):
    (tmp_path / "rows.txt").write_text("old\n")
    logger = Logger(str(tmp_path), output_fname="rows.txt", quiet=True)
    logger.close()
    assert "already exists" in capsys.readouterr().out


def test_stats_logger(tmp_path):
    logger = StatsLogger(str(tmp_path), output_fname="stats.txt", quiet=True)
    logger.store(Repeat=np.array([1.0, 1.0, 0.0, 1.0]))
    logger.log_tabular("Repeat", with_min_and_max=True)
    logger.dump_tabular()
    logger.close()
    table = pd.read_csv(tmp_path / "stats.txt", sep="\t")
    assert list(table.columns) == ["AverageRepeat", "StdRepeat", "MaxRepeat", "MinRepeat"]
    assert table.AverageRepeat[0] == pytest.approx(0.75)


def test_save_config(tmp_path):
    logger = Logger(str(tmp_path), exp_name="demo", quiet=True)
    logger.save_config(ExperimentConfig().to_dict())
    with open(tmp_path / "config.json") as f:
        saved = json.load(f)
    assert saved["exp_name"] == "demo"
    assert saved["noise"]["yb"] == [0.0, 0.0]


def test_setup_logger_kwargs(tmp_path):
    kwargs = setup_logger_kwargs("sweep", 3, str(tmp_path))
    assert kwargs["output_dir"] == osp.join(str(tmp_path), "sweep", "sweep_s3")
    assert setup_logger_kwargs("sweep", None, str(tmp_path))["output_dir"] == osp.join(
        str(tmp_path), "sweep"
    )


def test_valid_str():
    assert valid_str("noise:depolarization") == "noise-depolarization"
    assert valid_str([0.1, 2]) == "0-1-2"


def test_grid_variants_and_names():
    eg = ExperimentGrid("scan")
    eg.add("noise:depolarization", [0.0, 0.1])
    eg.add("seed", [0, 1])
    eg.add("calibrate", [True, False])
    eg.add("trials_per_setting", 100, in_name=True)
    variants = eg.variants()
    assert len(variants) == 8
    assert variants[0] == {
        "noise:depolarization": 0.0,
        "seed": 0,
        "calibrate": True,
        "trials_per_setting": 100,
    }
    names = {eg.variant_name(v) for v in variants}
    assert names == {
        "scan_noi-dep0-0_cal_tri100",
        "scan_noi-dep0-0_tri100",
        "scan_noi-dep0-1_cal_tri100",
        "scan_noi-dep0-1_tri100",
    }
    assert ExperimentGrid().variants() == [{}]


def test_grid_runs_each_variant(tmp_path):
    base = ExperimentConfig(
        trials_per_setting=200,
        repeatability_runs=0,
        noise=NoiseConfig(depolarization=0.0),
    )
    eg = ExperimentGrid("tiny")
    eg.add("noise:depolarization", [0.0, 0.2], shorthand="dep")
    runs = eg.run(base, data_dir=str(tmp_path), quiet=True)
    assert [name for name, _, _ in runs] == ["tiny_dep0-0", "tiny_dep0-2"]
    clean, noisy = (result.report.extras["exact_C"] for _, _, result in runs)
    assert noisy == pytest.approx(0.8 * clean)
    assert osp.exists(osp.join(str(tmp_path), "tiny_dep0-0", "tiny_dep0-0_s0", "report.json"))


def test_call_experiment_writes_run(tmp_path):
    config = ExperimentConfig(trials_per_setting=100, repeatability_runs=20)
    result = call_experiment("single", config, data_dir=str(tmp_path), quiet=True)
    out = osp.join(str(tmp_path), "single", "single_s0")
    with open(osp.join(out, "config.json")) as f:
        assert json.load(f)["exp_name"] == "single"
    assert result.manifest.files["trials"] == osp.join(out, "trials.txt")


def test_plots_from_a_run(tmp_path):
    config = ExperimentConfig(
        trials_per_setting=200,
        repeatability_runs=0,
        state_source="ms_gate",
        trace_points=5,
        parity_points=9,
        ms={"n_max": 8, "max_step_us": 0.5},
    )
    call_experiment("plotted", config, data_dir=str(tmp_path), quiet=True)
    save_dir = str(tmp_path / "figures")
    saved = plot.main(
        [str(tmp_path / "plotted"), "--kind", "trace", "parity", "correlators",
         "--save-dir", save_dir, "--no-show"]
    )
    assert sorted(osp.basename(p) for p in saved) == ["correlators.png", "parity.png", "trace.png"]
    assert all(osp.exists(p) for p in saved)


def test_plot_without_data(tmp_path):
    assert plot.make_plots([str(tmp_path)], kinds=("trace",), show=False) == []
