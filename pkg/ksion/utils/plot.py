import seaborn as sns
import pandas as pd
import matplotlib.pyplot as plt
import json
import os
import os.path as osp

from ksion.dynamics.ms_gate import POPULATION_LABELS

DIV_LINE_WIDTH = 50

# Which file each plot kind reads, and how it is laid out.
PLOT_FILES = {
    "trace": ("evolution_trace.csv", ","),
    "parity": ("parity_scan.csv", ","),
    "correlators": ("correlators.txt", "\t"),
}


def plot_trace(data, **kwargs):
    """Populations against time, one line per population and run."""
    long = data.melt(
        id_vars=["time_us", "Condition1"],
        value_vars=list(POPULATION_LABELS),
        var_name="Population",
        value_name="Probability",
    )
    sns.set(style="darkgrid", font_scale=1.5)
    sns.lineplot(data=long, x="time_us", y="Probability", hue="Population", style="Condition1", **kwargs)
    plt.xlabel("time (us)")
    plt.legend(loc="best").set_draggable(True)
    plt.tight_layout(pad=0.5)


def plot_parity(data, **kwargs):
    sns.set(style="darkgrid", font_scale=1.5)
    sns.lineplot(data=data, x="phase_rad", y="parity", hue="Condition1", marker="o", **kwargs)
    plt.xlabel("analysis phase (rad)")
    plt.ylim(-1.05, 1.05)
    plt.legend(loc="best").set_draggable(True)
    plt.tight_layout(pad=0.5)


def plot_correlators(data, **kwargs):
    sns.set(style="darkgrid", font_scale=1.5)
    ax = sns.pointplot(
        data=data, x="Setting", y="Correlator", hue="Condition1", linestyle="none", **kwargs
    )
    for k, (_, row) in enumerate(data.iterrows()):
        ax.errorbar(k % 4, row["Correlator"], yerr=row["SemCorrelator"], fmt="none", color="k")
    plt.legend(loc="best").set_draggable(True)
    plt.tight_layout(pad=0.5)


PLOTTERS = {"trace": plot_trace, "parity": plot_parity, "correlators": plot_correlators}


def get_datasets(logdir, kind, condition=None):
    """
    Recursively look through logdir for files of the given kind written by
    a simulated run.

    Runs are labeled by the ``exp_name`` in their config.json.
    """
    fname, sep = PLOT_FILES[kind]
    datasets = []
    for root, _, files in os.walk(logdir):
        if fname in files:
            exp_name = None
            try:
                with open(os.path.join(root, "config.json")) as f:
                    config = json.load(f)
                exp_name = config.get("exp_name")
            except (OSError, ValueError):
                print("No file named config.json")
            condition1 = condition or exp_name or "exp"
            try:
                exp_data = pd.read_csv(os.path.join(root, fname), sep=sep, dtype={"Setting": str})
            except (OSError, ValueError, pd.errors.ParserError):
                print("Could not read from %s" % os.path.join(root, fname))
                continue
            exp_data.insert(len(exp_data.columns), "Condition1", condition1)
            datasets.append(exp_data)
    return datasets


def get_all_datasets(all_logdirs, kind, legend=None, select=None, exclude=None):
    """
    For every entry in all_logdirs,
        1) check if the entry is a real directory and if it is,
           pull data from it;

        2) if not, check to see if the entry is a prefix for a
           real directory, and pull data from that.
    """
    logdirs = []
    for logdir in all_logdirs:
        if osp.isdir(logdir):
            logdirs += [logdir]
        else:
            basedir = osp.dirname(logdir) or "."
            prefix = logdir.split(os.sep)[-1]
            listdir = os.listdir(basedir)
            logdirs += sorted([osp.join(basedir, x) for x in listdir if prefix in x])

    if select is not None:
        logdirs = [log for log in logdirs if all(x in log for x in select)]
    if exclude is not None:
        logdirs = [log for log in logdirs if all(not (x in log) for x in exclude)]

    # Verify logdirs
    print("Plotting from...\n" + "=" * DIV_LINE_WIDTH + "\n")
    for logdir in logdirs:
        print(logdir)
    print("\n" + "=" * DIV_LINE_WIDTH)

    # Make sure the legend is compatible with the logdirs
    assert not (legend) or (len(legend) == len(logdirs)), \
        "Must give a legend title for each set of experiments."

    data = []
    if legend:
        for log, leg in zip(logdirs, legend):
            data += get_datasets(log, kind, leg)
    else:
        for log in logdirs:
            data += get_datasets(log, kind)
    return data


def make_plots(all_logdirs, kinds=("trace", "parity"), legend=None, select=None,
               exclude=None, save_dir=None, show=True):
    """
    One figure per plot kind that has data. With ``save_dir`` each figure is
    written as ``<kind>.png``.

    Returns:
        The list of saved file paths.
    """
    saved = []
    for kind in kinds:
        data = get_all_datasets(all_logdirs, kind, legend, select, exclude)
        if not data:
            print("No %s data found." % kind)
            continue
        plt.figure()
        PLOTTERS[kind](pd.concat(data, ignore_index=True))
        if save_dir is not None:
            os.makedirs(save_dir, exist_ok=True)
            path = osp.join(save_dir, kind + ".png")
            plt.savefig(path)
            saved.append(path)
    if show:
        plt.show()
    else:
        plt.close("all")
    return saved


def main(argv=None):
    import argparse
    parser = argparse.ArgumentParser()
    parser.add_argument('logdir', nargs='*')
    parser.add_argument('--legend', '-l', nargs='*')
    parser.add_argument('--kind', '-k', nargs='*', default=['trace', 'parity'],
                        choices=sorted(PLOTTERS))
    parser.add_argument('--select', nargs='*')
    parser.add_argument('--exclude', nargs='*')
    parser.add_argument('--save-dir')
    parser.add_argument('--no-show', action='store_true')
    args = parser.parse_args(argv)
    """

    Args:
        logdir (strings): As many run directories (or prefixes to run
            directories, which the plotter will autocomplete internally) as
            you'd like to plot from.

        legend (strings): Optional way to specify legend for the plot. The
            plotter legend will automatically use the ``exp_name`` from the
            config.json file, unless you tell it otherwise through this flag.

        kind (strings): ``trace`` (populations during the gate), ``parity``
            (parity scan after the gate) and/or ``correlators`` (the four
            context correlators with their SEM).

        select (strings): Optional selection rule: the plotter will only show
            curves from logdirs that contain all of these substrings.

        exclude (strings): Optional exclusion rule: plotter will only show
            curves from logdirs that do not contain these substrings.

    """

    return make_plots(args.logdir, args.kind, args.legend, select=args.select,
                      exclude=args.exclude, save_dir=args.save_dir, show=not args.no_show)


if __name__ == "__main__":
    main()
