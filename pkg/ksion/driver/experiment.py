"""
End-to-end simulated runs: state preparation, trial generation,
repeatability runs, analysis and the files of a run.
"""
from dataclasses import dataclass, field
import os.path as osp
import time

import numpy as np

from ksion.analysis.calibration import calibrate_phases, depolarization_for_target
from ksion.driver.report import report, write_report_artifacts
from ksion.dynamics.ms_gate import (
    bell_fidelity,
    fidelity_bound,
    gate_phase,
    ms_evolution_trace,
    ms_evolve,
    parity_scan,
)
from ksion.measurement.core import CONTEXTS, SETTING_IDS, context_probabilities, exact_recorded_chsh
from ksion.measurement.repeatability import repeatability_protocol, write_repeatability_file
from ksion.measurement.trials import TrialBlock, interleave, sample_context, write_trial_file
from ksion.quantum.core import apply_depolarizing, bell_state
from ksion.utils.logx import Logger, colorize
from ksion.utils.parallel_tools import parallel_map
from ksion.version import __version__


@dataclass
class PreparedState:
    """The state handed to the measurement layer and how it was obtained."""

    state: object
    noiseless: object
    specs: tuple
    depolarization: float
    calibration: object = None
    trace: object = None
    scan: object = None


@dataclass
class RunManifest:
    config_hash: str
    version: str
    seed: int
    started: str
    finished: str = None
    trial_counts: dict = field(default_factory=dict)
    files: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "config_hash": self.config_hash,
            "version": self.version,
            "seed": self.seed,
            "started": self.started,
            "finished": self.finished,
            "trial_counts": self.trial_counts,
            "files": self.files,
        }


@dataclass
class SimulationResult:
    report: object
    manifest: RunManifest
    trials: object
    blocks: dict
    repeatability: list
    prepared: PreparedState


def _now():
    return time.strftime("%Y-%m-%dT%H:%M:%S")


def prepare_state(config):
    """
    Build the two-qubit state, calibrate the local phase frames and apply
    the configured (or solved-for) depolarization.
    """
    trace = scan = None
    if config.state_source == "ideal":
        noiseless = bell_state(config.ideal_chi)
    else:
        params = config.ms_params()
        noiseless = ms_evolve(params, convergence_check=config.convergence_check)
        times = np.linspace(0.0, params.gate_time, config.trace_points)
        trace = ms_evolution_trace(params, times, convergence_check=config.convergence_check)
        phases = np.linspace(0.0, 2 * np.pi, config.parity_points)
        scan = parity_scan(noiseless, phases)

    specs = config.observable_specs()
    calibration = None
    if config.calibrate:
        calibration = calibrate_phases(noiseless, specs)
        specs = calibration.apply(specs)

    p = config.noise.depolarization
    if p is None:
        p = depolarization_for_target(
            noiseless, specs, config.noise_model(), config.noise.target_c, config.dark_outcome
        )
    state = apply_depolarizing(noiseless, p)
    return PreparedState(state, noiseless, specs, float(p), calibration, trace, scan)


def _sample_job(job):
    state, context, specs, noise, n, seed, start, dark_outcome, probs = job
    return sample_context(state, context, specs, noise, n, seed, start, dark_outcome, probs)


def generate_trials(
    state, specs, noise, n_per_context, seed, dark_outcome=1, block_size=None, workers=None
):
    """
    All four contexts' trials as TrialBlocks keyed by context.

    Each context is cut into blocks of ``block_size`` trials that are drawn
    independently; the outcomes do not depend on the cut or on ``workers``.
    """
    block_size = block_size or n_per_context
    jobs = []
    for context in CONTEXTS:
        probs = context_probabilities(state, context, specs)
        for start in range(0, n_per_context, block_size):
            n = min(block_size, n_per_context - start)
            jobs.append((state, context, specs, noise, n, seed, start, dark_outcome, probs))
    results = parallel_map(_sample_job, jobs, workers)
    return {
        context: TrialBlock.concatenate([b for b in results if b.context == context])
        for context in CONTEXTS
    }


def run_simulation(config, output_dir=None, quiet=False):
    """
    Simulate a complete experiment described by ``config``.

    Args:
        config (ExperimentConfig): Validated before use.
        output_dir (string): Where to write the run's files. With ``None``
            nothing is written.
        quiet (bool): Suppress progress printing.

    Returns:
        SimulationResult with the ContextualityReport, the RunManifest, the
        interleaved trial table and the per-context blocks.
    """
    config.validate()
    logger = Logger(output_dir, output_fname="progress.txt", exp_name=config.exp_name, quiet=quiet)
    manifest = RunManifest(config.config_hash, __version__, config.seed, _now())
    logger.save_config(config.to_dict())

    logger.log("Preparing the %s state" % config.state_source, color="cyan")
    prepared = prepare_state(config)
    noise = config.noise_model()

    logger.log("Sampling %d trials per context" % config.trials_per_setting, color="cyan")
    blocks = generate_trials(
        prepared.state,
        prepared.specs,
        noise,
        config.trials_per_setting,
        config.seed,
        config.dark_outcome,
        config.block_size,
        config.workers,
    )
    trials = interleave(blocks.values(), config.seed)
    manifest.trial_counts = {SETTING_IDS[k]: len(blocks[c]) for k, c in enumerate(CONTEXTS)}

    estimates = []
    if config.repeatability_runs > 0:
        logger.log("Running %d repeatability runs per branch" % config.repeatability_runs, color="cyan")
        estimates = [
            repeatability_protocol(
                spec, prepared.state, noise, config.repeatability_runs, config.seed, config.dark_outcome
            )
            for spec in prepared.specs
        ]

    extras = {
        "state_source": config.state_source,
        "depolarization": prepared.depolarization,
        "exact_C": exact_recorded_chsh(prepared.state, prepared.specs, noise, config.dark_outcome),
        "calibration": prepared.calibration.to_dict() if prepared.calibration else None,
    }
    if prepared.scan is not None:
        pops = prepared.noiseless.populations()
        extras.update(
            {
                "p00_plus_p11": float(pops[0] + pops[3]),
                "parity_contrast": prepared.scan.contrast,
                "fidelity_bound": fidelity_bound(
                    min(float(pops[0] + pops[3]), 1.0), prepared.scan.contrast
                ),
                "bell_fidelity": bell_fidelity(prepared.noiseless),
                "gate_phase": gate_phase(prepared.noiseless),
            }
        )
    result = report(blocks, config, estimates, extras=extras)

    if output_dir is not None:
        manifest.files["trials"] = write_trial_file(trials, osp.join(output_dir, "trials.txt"))
        if estimates:
            manifest.files["repeatability"] = write_repeatability_file(
                [e.batch for e in estimates], osp.join(output_dir, "repeatability.txt")
            )
        files = write_report_artifacts(
            result, output_dir, estimates, prepared.trace, prepared.scan, quiet=True
        )
        manifest.files.update(files)
        manifest.files["config"] = osp.join(output_dir, "config.json")
        manifest.files["manifest"] = osp.join(output_dir, "manifest.json")
    manifest.finished = _now()
    logger.save_json(manifest.to_dict(), "manifest.json")

    if not quiet:
        print(result.to_text())
        if output_dir is not None:
            print(colorize("Results written to %s" % output_dir, "green", bold=True))
    return SimulationResult(result, manifest, trials, blocks, estimates, prepared)
