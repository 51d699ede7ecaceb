from ksion.crosstalk.core import load_ion_levels
from ksion.crosstalk.estimator import crosstalk_budget
from ksion.driver.config import load_config
from ksion.driver.experiment import prepare_state, run_simulation
from ksion.driver.ingest import ingest, ingest_repeatability
from ksion.driver.report import report, table1_report
from ksion.measurement.core import CONTEXTS, SETTING_IDS
from ksion.measurement.repeatability import mean_repeatability, repeatability_protocol
from ksion.utils.errors import KsionError, ParameterError
from ksion.utils.logx import StatsLogger, colorize, dumps_json
from ksion.utils.run_utils import ExperimentGrid, setup_logger_kwargs
from ksion.utils import plot
import argparse
import json
import sys
from textwrap import dedent

DIV_LINE_WIDTH = 80

# Flags that override config file values, and the config path each sets.
OVERRIDES = {
    "seed": "seed",
    "trials": "trials_per_setting",
    "runs": "repeatability_runs",
    "workers": "workers",
    "exp_name": "exp_name",
}


def friendly_err(err_msg):
    # add whitespace to error message to make it more readable
    return "\n\n" + err_msg + "\n\n"


def _parse_value(s):
    # Sweep values are JSON where possible, so users can give numbers,
    # booleans, null and lists; anything else is kept as a string.
    try:
        return json.loads(s)
    except ValueError:
        return s


def _workers(s):
    return s if s == "auto" else int(s)


def _config(args):
    config = load_config(args.config)
    overrides = {path: getattr(args, flag, None) for flag, path in OVERRIDES.items()}
    return config.with_overrides(overrides).validate()


def _output_dir(args, config):
    if args.output_dir:
        return args.output_dir
    return setup_logger_kwargs(config.exp_name, config.seed, args.data_dir, args.datestamp)[
        "output_dir"
    ]


def cmd_simulate(args):
    config = _config(args)
    result = run_simulation(config, output_dir=_output_dir(args, config), quiet=args.quiet)
    if args.quiet:
        print(result.report.to_text())


def cmd_ingest(args):
    blocks = ingest(args.trials)
    print(colorize("%s is well formed." % args.trials, "green", bold=True))
    for sid, context in zip(SETTING_IDS, CONTEXTS):
        n = len(blocks[context]) if context in blocks else 0
        print("  {%s,%s}: %d trials" % (sid[0], sid[1], n))
    missing = [sid for sid, c in zip(SETTING_IDS, CONTEXTS) if c not in blocks]
    if missing:
        print(colorize("Contexts without trials: %s" % ", ".join(missing), "yellow"))


def cmd_analyze(args):
    config = load_config(args.config) if args.config else None
    blocks = ingest(args.trials)
    rep = ingest_repeatability(args.repeatability) if args.repeatability else None
    result = report(blocks, config, rep, output_dir=args.output_dir)
    print(result.to_text())


def cmd_repeatability(args):
    config = _config(args)
    prepared = prepare_state(config)
    noise = config.noise_model()
    logger = StatsLogger(args.output_dir, output_fname="repeatability_summary.txt")
    estimates = []
    for spec in prepared.specs:
        if args.observable is not None and spec.index not in args.observable:
            continue
        est = repeatability_protocol(
            spec, prepared.state, noise, config.repeatability_runs, config.seed, config.dark_outcome
        )
        estimates.append(est)
        logger.log_tabular("Observable", est.observable)
        logger.log_tabular("R", est.value)
        logger.log_tabular("SemR", est.sem)
        logger.log_tabular("Retained", est.n_retained)
        logger.log_tabular("Discarded", est.n_discarded)
        logger.dump_tabular()
    r_bar, r_sem = mean_repeatability(estimates)
    logger.log("Mean repeatability %.4f +- %.4f" % (r_bar, r_sem))


def cmd_crosstalk(args):
    params = load_ion_levels(args.levels)
    print(crosstalk_budget(params, args.target_rabi).to_text())


def cmd_report(args):
    if args.table1:
        result = table1_report(output_dir=args.output_dir)
    else:
        if not args.trials:
            raise ParameterError("Give a trial file or --table1.")
        config = load_config(args.config) if args.config else None
        rep = ingest_repeatability(args.repeatability) if args.repeatability else None
        result = report(ingest(args.trials), config, rep, output_dir=args.output_dir)
    if args.json:
        print(dumps_json(result.to_dict()))
    else:
        print(result.to_text())


def cmd_sweep(args):
    config = _config(args)
    eg = ExperimentGrid(name=args.exp_name or config.exp_name)
    for key, *vals in args.grid:
        eg.add(key, [_parse_value(v) for v in vals])
    eg.run(config, data_dir=args.data_dir, datestamp=args.datestamp, quiet=args.quiet)


def cmd_plot(args):
    plot.main(args.plot_args)


def _add_config_flags(p):
    p.add_argument(
        "--config", help="experiment config JSON (default: ksion/data/published_config.json)"
    )
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int, help="trials per context")
    p.add_argument("--runs", type=int, help="repeatability runs per branch")
    p.add_argument("--workers", type=_workers)
    p.add_argument("--exp-name", dest="exp_name")


def _add_output_flags(p):
    p.add_argument("--output-dir", dest="output_dir")
    p.add_argument("--data-dir", dest="data_dir")
    p.add_argument("--datestamp", "--dt", action="store_true")
    p.add_argument("--quiet", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="python -m ksion.run",
        description="Simulate and analyze two-ion contextuality experiments.",
    )
    sub = parser.add_subparsers(dest="cmd")

    p = sub.add_parser("simulate", help="run a full simulated experiment")
    _add_config_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ingest", help="validate a trial file")
    p.add_argument("trials")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("analyze", help="analyze a trial file")
    p.add_argument("trials")
    p.add_argument("--repeatability")
    p.add_argument("--config")
    p.add_argument("--output-dir", dest="output_dir")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("repeatability", help="simulate repeatability runs only")
    _add_config_flags(p)
    p.add_argument("--observable", type=int, nargs="*", choices=range(4))
    p.add_argument("--output-dir", dest="output_dir")
    p.set_defaults(func=cmd_repeatability)

    p = sub.add_parser("crosstalk", help="wrong-ion crosstalk budget")
    p.add_argument("--levels", help="optical table JSON (default: shipped table)")
    p.add_argument("--target-rabi", dest="target_rabi", type=float)
    p.set_defaults(func=cmd_crosstalk)

    p = sub.add_parser("report", help="report of a dataset or of the published table")
    p.add_argument("trials", nargs="?")
    p.add_argument("--table1", action="store_true")
    p.add_argument("--repeatability")
    p.add_argument("--config")
    p.add_argument("--output-dir", dest="output_dir")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("sweep", help="run simulations over a grid of config values")
    _add_config_flags(p)
    _add_output_flags(p)
    p.add_argument(
        "--grid", nargs="+", action="append", default=[], metavar="KEY VAL",
        help="config path followed by its values, e.g. --grid noise:depolarization 0 0.05",
    )
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("plot", help="plot traces, parity scans or correlators of runs")
    p.add_argument("plot_args", nargs=argparse.REMAINDER)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None):
    """
    Command-line entry point. Returns the process exit status: 0 on success,
    1 on any ksion error (argument errors exit with 2 through argparse).
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.cmd is None:
        parser.print_help()
        return 0
    if args.cmd == "sweep":
        for entry in args.grid:
            if len(entry) < 2:
                parser.error("--grid needs a key and at least one value")
    try:
        args.func(args)
    except KsionError as e:
        msg = (
            "=" * DIV_LINE_WIDTH
            + dedent(
                """

            %s failed:

                %s

            """
            )
            % (args.cmd, e)
            + "=" * DIV_LINE_WIDTH
        )
        print(colorize(friendly_err(msg), "red", bold=True), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
