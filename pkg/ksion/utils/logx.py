"""

Some simple logging functionality, inspired by rllab's logging.

Logs to a tab-separated-values file (path/to/output_directory/<output_fname>)
and writes JSON artifacts next to it.

"""
import json
import os.path as osp, atexit, os

import numpy as np

from ksion.utils.parallel_tools import statistics_scalar
from ksion.utils.serialization_utils import convert_json

color2num = dict(
    gray=30,
    red=31,
    green=32,
    yellow=33,
    blue=34,
    magenta=35,
    cyan=36,
    white=37,
    crimson=38,
)


def colorize(string, color, bold=False, highlight=False):
    """
    Colorize a string.

    This function was originally written by John Schulman.
    """
    attr = []
    num = color2num[color]
    if highlight:
        num += 10
    attr.append(str(num))
    if bold:
        attr.append("1")
    return "\x1b[%sm%s\x1b[0m" % (";".join(attr), string)


def dumps_json(obj):
    """The JSON layout used for every artifact ksion writes."""
    return json.dumps(
        convert_json(obj),
        default=lambda o: "<not serializable>",
        separators=(",", ":\t"),
        indent=4,
        sort_keys=True,
    )


class Logger:
    """
    A general-purpose logger.

    Makes it easy to save diagnostics, configurations and result documents
    of a run. With ``output_dir=None`` nothing is written to disk and the
    logger only prints.
    """

    def __init__(self, output_dir=None, output_fname="progress.txt", exp_name=None, quiet=False):
        """
        Initialize a Logger.

        Args:
            output_dir (string): A directory for saving results to. If
                ``None``, the logger prints only.

            output_fname (string): Name for the tab-separated-value file
                holding rows written by ``dump_tabular``.

            exp_name (string): Experiment name, stored in the saved config.

            quiet (bool): Suppress the stdout echo of tables and configs.
        """
        self.output_dir = output_dir
        self.output_fname = output_fname
        self.output_file = None
        self.quiet = quiet
        if self.output_dir is not None:
            if osp.exists(osp.join(self.output_dir, output_fname)):
                print(
                    "Warning: Log dir %s already exists! Storing info there anyway."
                    % self.output_dir
                )
            os.makedirs(self.output_dir, exist_ok=True)
        self.first_row = True
        self.log_headers = []
        self.log_current_row = {}
        self.exp_name = exp_name

    def _open(self):
        if self.output_file is None and self.output_dir is not None:
            self.output_file = open(osp.join(self.output_dir, self.output_fname), "w")
            atexit.register(self.output_file.close)
            self.log("Logging data to %s" % self.output_file.name)

    def close(self):
        if self.output_file is not None:
            self.output_file.close()

    def log(self, msg, color="green"):
        """Print a colorized message to stdout."""
        if not self.quiet:
            print(colorize(msg, color, bold=True))

    def log_tabular(self, key, val):
        """
        Log a value of some diagnostic.

        Call this only once for each diagnostic quantity per row. After
        using ``log_tabular`` to store values for each diagnostic, call
        ``dump_tabular`` to write them out to file and stdout.
        """
        if self.first_row:
            self.log_headers.append(key)
        else:
            assert key in self.log_headers, (
                "Trying to introduce a new key %s that you didn't include in the first row"
                % key
            )
        assert key not in self.log_current_row, (
            "You already set %s this row. Maybe you forgot to call dump_tabular()"
            % key
        )
        self.log_current_row[key] = val

    def save_config(self, config):
        """
        Log an experiment configuration.

        Serializes ``config`` to ``config.json``, writing as informative a
        string as possible for anything that is not JSON-native.
        """
        config_json = convert_json(config)
        if self.exp_name is not None and isinstance(config_json, dict):
            config_json["exp_name"] = self.exp_name
        output = dumps_json(config_json)
        if not self.quiet:
            print(colorize("Saving config:\n", color="cyan", bold=True))
            print(output)
        if self.output_dir is not None:
            with open(osp.join(self.output_dir, "config.json"), "w") as out:
                out.write(output)

    def save_json(self, obj, fname):
        """Write ``obj`` as a JSON document in the output directory."""
        if self.output_dir is None:
            return None
        path = osp.join(self.output_dir, fname)
        with open(path, "w") as out:
            out.write(dumps_json(obj))
        return path

    def save_text(self, text, fname):
        if self.output_dir is None:
            return None
        path = osp.join(self.output_dir, fname)
        with open(path, "w") as out:
            out.write(text)
        return path

    def output_path(self, fname):
        return None if self.output_dir is None else osp.join(self.output_dir, fname)

    def dump_tabular(self):
        """
        Write all of the diagnostics from the current row.

        Writes both to stdout, and to the output file.
        """
        vals = []
        key_lens = [len(key) for key in self.log_headers]
        max_key_len = max(15, max(key_lens))
        keystr = "%" + "%d" % max_key_len
        fmt = "| " + keystr + "s | %15s |"
        n_slashes = 22 + max_key_len
        if not self.quiet:
            print("-" * n_slashes)
        for key in self.log_headers:
            val = self.log_current_row.get(key, "")
            valstr = "%8.4g" % val if hasattr(val, "__float__") else val
            if not self.quiet:
                print(fmt % (key, valstr))
            vals.append(val)
        if not self.quiet:
            print("-" * n_slashes, flush=True)
        self._open()
        if self.output_file is not None:
            if self.first_row:
                self.output_file.write("\t".join(self.log_headers) + "\n")
            self.output_file.write("\t".join(map(str, vals)) + "\n")
            self.output_file.flush()
        self.log_current_row.clear()
        self.first_row = False


class StatsLogger(Logger):
    """
    A variant of Logger that accumulates samples and logs their statistics.

    Each time a quantity is produced, use

    .. code-block:: python

        stats_logger.store(NameOfQuantity=quantity_value)

    and when a row is complete, use

    .. code-block:: python

        stats_logger.log_tabular(NameOfQuantity, **options)

    to record its mean (and optionally std / min / max).
    """

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.stats_dict = dict()

    def store(self, **kwargs):
        """
        Save something into the logger's current state.

        Provide an arbitrary number of keyword arguments with numerical
        values.
        """
        for k, v in kwargs.items():
            self.stats_dict.setdefault(k, []).append(v)

    def _values(self, key):
        v = self.stats_dict[key]
        return (
            np.concatenate(v)
            if isinstance(v[0], np.ndarray) and len(v[0].shape) > 0
            else v
        )

    def log_tabular(self, key, val=None, with_min_and_max=False, average_only=False):
        """
        Log a value or possibly the mean/std/min/max values of a diagnostic.

        Args:
            key (string): The name of the diagnostic. If values were saved
                with ``store``, the key here has to match.

            val: A value for the diagnostic. If you have previously saved
                values for this key via ``store``, do *not* provide a ``val``.

            with_min_and_max (bool): If true, log min and max values.

            average_only (bool): If true, do not log the standard deviation.
        """
        if val is not None:
            super().log_tabular(key, val)
        else:
            stats = statistics_scalar(self._values(key), with_min_and_max=with_min_and_max)
            super().log_tabular(key if average_only else "Average" + key, stats[0])
            if not (average_only):
                super().log_tabular("Std" + key, stats[1])
            if with_min_and_max:
                super().log_tabular("Max" + key, stats[3])
                super().log_tabular("Min" + key, stats[2])
            self.stats_dict[key] = []

    def get_stats(self, key, with_min_and_max=False):
        """
        Mean/std (and optionally min/max) of a stored diagnostic.
        """
        return statistics_scalar(self._values(key), with_min_and_max=with_min_and_max)
