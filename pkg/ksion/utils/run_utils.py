import itertools
import os.path as osp
import string
import time

import numpy as np
from tqdm import trange

from ksion.driver.experiment import run_simulation
from ksion.user_config import (
    DEFAULT_DATA_DIR,
    DEFAULT_SHORTHAND,
    FORCE_DATESTAMP,
    WAIT_BEFORE_LAUNCH,
)
from ksion.utils.logx import colorize, dumps_json
from ksion.utils.serialization_utils import convert_json

DIV_LINE_WIDTH = 80
NAME_CHARS = "-_" + string.ascii_letters + string.digits


def setup_logger_kwargs(exp_name, seed=None, data_dir=None, datestamp=False):
    """
    Output directory and experiment name for one run, as Logger kwargs.

    Runs of one experiment share ``data_dir/exp_name``; each seed gets its
    own subfolder ``exp_name_s<seed>``. With ``datestamp`` (or
    ``FORCE_DATESTAMP`` in ``ksion/user_config.py``) the experiment folder is
    prefixed with the date and the seed folder with date and time.

    Args:

        exp_name (string): Name for experiment.

        seed (int): Master seed of the run, or None for no seed subfolder.

        data_dir (string): Root of all outputs. Defaults to
            ``DEFAULT_DATA_DIR``.

        datestamp (bool): Stamp the folder names with the current time.

    Returns:

        dict with ``output_dir`` and ``exp_name``.
    """
    datestamp = datestamp or FORCE_DATESTAMP
    parts = [(time.strftime("%Y-%m-%d_") if datestamp else "") + exp_name]
    if seed is not None:
        stamp = time.strftime("%Y-%m-%d_%H-%M-%S-") if datestamp else ""
        parts.append("%s%s_s%d" % (stamp, exp_name, seed))
    output_dir = osp.join(data_dir or DEFAULT_DATA_DIR, *parts)
    return dict(output_dir=output_dir, exp_name=exp_name)


def call_experiment(exp_name, config, data_dir=None, datestamp=False, quiet=False):
    """
    Simulate one experiment and write its files under ``data_dir``.

    The config's ``exp_name`` is replaced by ``exp_name`` and its seed picks
    the output subfolder (see ``setup_logger_kwargs``).

    Returns:

        The SimulationResult of ``run_simulation``.
    """
    config = config.override("exp_name", exp_name)
    output_dir = setup_logger_kwargs(exp_name, config.seed, data_dir, datestamp)["output_dir"]
    if not quiet:
        print(colorize("Simulating %s with config:\n" % exp_name, color="cyan", bold=True))
        print(dumps_json(config.to_dict()) + "\n")

    result = run_simulation(config, output_dir=output_dir, quiet=quiet)

    if not quiet:
        line = "=" * DIV_LINE_WIDTH
        plot_cmd = colorize("python -m ksion.run plot " + output_dir, "green")
        print("\n%s\nRun finished. Plot it with:\n\n    %s\n\n%s\n" % (line, plot_cmd, line))
    return result


def all_bools(vals):
    return all(isinstance(v, bool) for v in vals)


def valid_str(v):
    """
    A filesystem-safe lowercase string for a value, list or named object.

    Lists and tuples are joined with '-'; any character other than '-',
    '_' or alphanumeric becomes '-'.
    """
    if hasattr(v, "__name__"):
        return valid_str(v.__name__)
    if isinstance(v, (tuple, list)):
        return "-".join(valid_str(x) for x in v)
    return "".join(c if c in NAME_CHARS else "-" for c in str(v).lower())


class ExperimentGrid:
    """
    Sweep of simulated experiments over ranges of configuration values.

    Keys are config paths with colons separating nested sections, for
    example ``noise:depolarization`` or ``ms:nbar_oop``. Every combination
    of values is one variant, run into its own output directory.
    """

    def __init__(self, name=""):
        assert isinstance(name, str), "Grid name must be a string."
        self._name = name
        self.keys = []
        self.vals = []
        self.shs = []
        self.in_names = []

    @staticmethod
    def _default_shorthand(key):
        # First three alphanumeric-prefix letters of every colon part.
        return "-".join(
            "".join(c for c in part[:3] if c.isalnum()) for part in key.split(":")
        )

    def add(self, key, vals, shorthand=None, in_name=False):
        """
        Sweep config path ``key`` over ``vals`` (a value or list of values).

        Args:
            key (string): Config path such as ``noise:depolarization``.

            vals: The values to try.

            shorthand (string): Name used for the key in variant names.
                Generated from the key when ``DEFAULT_SHORTHAND`` is on.

            in_name (bool): Name the key in variant names even when it takes
                a single value.
        """
        assert isinstance(key, str), "Config path must be a string."
        assert shorthand is None or isinstance(shorthand, str), "Shorthand must be a string."
        if shorthand is None and DEFAULT_SHORTHAND:
            shorthand = self._default_shorthand(key)
        self.keys.append(key)
        self.vals.append(vals if isinstance(vals, list) else [vals])
        self.shs.append(shorthand)
        self.in_names.append(in_name)

    def variant_name(self, variant):
        """
        Experiment name of a variant: the grid name plus ``<shorthand><value>``
        for every swept key, joined by underscores.

        Seeds never enter the name, so seeds of one variant share a folder.
        Boolean keys appear as a bare shorthand, and only when True.
        """
        parts = [self._name]
        for k, v, sh, inn in zip(self.keys, self.vals, self.shs, self.in_names):
            if k == "seed" or (len(v) == 1 and not inn):
                continue
            label = valid_str(sh if sh is not None else k)
            if all_bools(v):
                if variant[k]:
                    parts.append(label)
            else:
                parts.append(label + valid_str(variant[k]))
        return "_".join(p for p in parts if p)

    def variants(self):
        """Every combination of values, as dicts from config path to value."""
        return [dict(zip(self.keys, combo)) for combo in itertools.product(*self.vals)]

    def print(self):
        """Print the swept keys, their values and the number of runs."""
        line = "=" * DIV_LINE_WIDTH
        print(line)
        print(colorize("ExperimentGrid [%s] sweeps:\n" % self._name, color="green", bold=True))
        for k, v, sh in zip(self.keys, self.vals, self.shs):
            print(" ", colorize(k.ljust(40), color="cyan", bold=True), "[%s]" % sh if sh else "")
            for val in v:
                print("\t" + str(convert_json(val)))
            print()
        n_runs = int(np.prod([len(v) for v in self.vals]))
        n_seeds = len(self.vals[self.keys.index("seed")]) if "seed" in self.keys else 1
        print(" Runs, counting seeds: ".ljust(40), n_runs)
        print(" Distinct configs: ".ljust(40), n_runs // n_seeds)
        print(line)

    def _countdown(self):
        print(colorize(
            "\nLaunching in %g s (WAIT_BEFORE_LAUNCH in ksion/user_config.py).\n"
            % WAIT_BEFORE_LAUNCH,
            color="cyan",
            bold=True,
        ))
        steps = 100
        for _ in trange(steps, desc="Launching in...", leave=False, ncols=DIV_LINE_WIDTH,
                        mininterval=0.25, bar_format="{desc}: {bar}| {remaining}"):
            time.sleep(WAIT_BEFORE_LAUNCH / steps)

    def run(self, base_config, data_dir=None, datestamp=False, quiet=False):
        """
        Simulate every variant of ``base_config``.

        Returns:
            A list of (variant name, variant, SimulationResult).
        """
        self.print()
        variants = self.variants()
        names = sorted({self.variant_name(v) for v in variants})
        print(colorize("Variants:", color="green", bold=True))
        print("\n".join(names) + "\n")
        if WAIT_BEFORE_LAUNCH > 0:
            self._countdown()

        results = []
        for var in variants:
            exp_name = self.variant_name(var) or base_config.exp_name
            config = base_config.with_overrides(var)
            results.append((exp_name, var, call_experiment(exp_name, config, data_dir, datestamp, quiet)))

        print(colorize("Sweep summary:\n", color="cyan", bold=True))
        for exp_name, var, result in results:
            r = result.report
            seed = var.get("seed", base_config.seed)
            print("%-40s s%-4s C = %.4f +- %.4f" % (exp_name, seed, r.c, r.sem_c))
        return results
