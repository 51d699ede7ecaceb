"""
Experiment configuration: one JSON document with nested sections.

``ksion/data/published_config.json`` carries the published settings; any field
may be overridden with a colon path such as ``noise:depolarization``.
"""
from copy import deepcopy
from dataclasses import asdict, dataclass, field, fields
import hashlib
import json

import numpy as np

from ksion.analysis.core import ALGEBRAIC_MAX, NONCONTEXTUAL_BOUND, SEQUENTIAL_COEFFICIENT
from ksion.dynamics.core import MsParams
from ksion.measurement.core import ConfusionMatrix, NoiseModel
from ksion.quantum.core import ObservableSpec
from ksion.user_config import DEFAULT_BLOCK_SIZE, DEFAULT_CONFIG_PATH, DEFAULT_WORKERS
from ksion.utils.errors import ParameterError

STATE_SOURCES = ("ideal", "ms_gate")
FIG5_PHASES = [5 * np.pi / 4, 3 * np.pi / 2, 3 * np.pi / 4, np.pi]
# Execution settings that never change a run's outputs.
RUNTIME_KEYS = ("workers", "block_size", "exp_name")


@dataclass
class NoiseConfig:
    """Confusion pairs are (P(report 1 | 0), P(report 0 | 1))."""

    yb: list = field(default_factory=lambda: [0.0, 0.0])
    ba: list = field(default_factory=lambda: [0.0, 0.0])
    depolarization: float = 0.0
    target_c: float = None

    def validate(self):
        for name in ("yb", "ba"):
            pair = getattr(self, name)
            if len(pair) != 2:
                raise ParameterError("noise:%s needs two probabilities, got %r." % (name, pair))
            ConfusionMatrix.from_pair(pair)
        if self.depolarization is not None and not 0.0 <= self.depolarization <= 1.0:
            raise ParameterError("noise:depolarization=%r outside [0, 1]." % (self.depolarization,))
        if self.depolarization is None and self.target_c is None:
            raise ParameterError("Set noise:depolarization or noise:target_c.")


@dataclass
class ObservablesConfig:
    phases: list = field(default_factory=lambda: list(FIG5_PHASES))
    convention_signs: list = field(default_factory=lambda: [1, 1, 1, 1])

    def validate(self):
        if len(self.phases) != 4 or len(self.convention_signs) != 4:
            raise ParameterError("Exactly four observable phases and signs are required.")


@dataclass
class EpsilonConfig:
    bound: float = NONCONTEXTUAL_BOUND
    algebraic_max: float = ALGEBRAIC_MAX
    sequential_coefficient: float = SEQUENTIAL_COEFFICIENT

    def validate(self):
        if not self.algebraic_max > self.bound:
            raise ParameterError("epsilon:algebraic_max must exceed epsilon:bound.")
        if self.sequential_coefficient < 0:
            raise ParameterError("epsilon:sequential_coefficient must be non-negative.")


SECTIONS = {
    "noise": NoiseConfig,
    "observables": ObservablesConfig,
    "epsilon": EpsilonConfig,
}


@dataclass
class ExperimentConfig:
    """
    Everything a simulated run depends on.

    ``ms`` holds MsParams keyword arguments and is only used with
    ``state_source="ms_gate"``; ``ideal_chi`` sets the Bell phase of the
    ``"ideal"`` source.
    """

    seed: int = 0
    trials_per_setting: int = 10000
    repeatability_runs: int = 1000
    state_source: str = "ideal"
    ideal_chi: float = np.pi / 2
    dark_outcome: int = 1
    calibrate: bool = True
    bootstrap_resamples: int = 0
    workers: int = DEFAULT_WORKERS
    block_size: int = DEFAULT_BLOCK_SIZE
    exp_name: str = "ksion"
    parity_points: int = 33
    trace_points: int = 201
    convergence_check: bool = False
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    observables: ObservablesConfig = field(default_factory=ObservablesConfig)
    epsilon: EpsilonConfig = field(default_factory=EpsilonConfig)
    ms: dict = field(default_factory=dict)

    def validate(self):
        if self.seed is None:
            raise ParameterError("A master seed is required for simulated runs.")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ParameterError("seed must be a non-negative integer, got %r." % (self.seed,))
        for name in ("trials_per_setting", "repeatability_runs", "block_size"):
            val = getattr(self, name)
            if int(val) != val or val < (0 if name == "repeatability_runs" else 1):
                raise ParameterError("%s must be a positive integer, got %r." % (name, val))
        if self.state_source not in STATE_SOURCES:
            raise ParameterError(
                "state_source must be one of %s, got %r." % (STATE_SOURCES, self.state_source)
            )
        if self.dark_outcome not in (1, -1):
            raise ParameterError("dark_outcome must be +1 or -1.")
        if self.bootstrap_resamples < 0:
            raise ParameterError("bootstrap_resamples must be non-negative.")
        if self.workers != "auto" and (int(self.workers) != self.workers or self.workers < 1):
            raise ParameterError("workers must be a positive integer or 'auto'.")
        for name in SECTIONS:
            getattr(self, name).validate()
        self.ms_params()
        return self

    def noise_model(self):
        return NoiseModel(
            yb=ConfusionMatrix.from_pair(self.noise.yb),
            ba=ConfusionMatrix.from_pair(self.noise.ba),
        )

    def ms_params(self):
        allowed = {f.name for f in fields(MsParams)}
        unknown = sorted(set(self.ms) - allowed)
        if unknown:
            raise ParameterError("Unknown ms key(s): %s." % ", ".join(unknown))
        return MsParams(**self.ms)

    def observable_specs(self):
        return tuple(
            ObservableSpec(index=i, phase=float(phi), convention_sign=int(sign))
            for i, (phi, sign) in enumerate(
                zip(self.observables.phases, self.observables.convention_signs)
            )
        )

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        """Build a config, rejecting any key it does not know."""
        d = deepcopy(d)
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ParameterError("Unknown config key(s): %s." % ", ".join(unknown))
        for name, section_cls in SECTIONS.items():
            if name in d:
                section = d[name]
                if not isinstance(section, dict):
                    raise ParameterError("Config section %r must be an object." % name)
                allowed = {f.name for f in fields(section_cls)}
                extra = sorted(set(section) - allowed)
                if extra:
                    raise ParameterError(
                        "Unknown config key(s): %s." % ", ".join("%s:%s" % (name, k) for k in extra)
                    )
                d[name] = section_cls(**section)
        return cls(**d)

    def override(self, key, value):
        """
        Copy of this config with the colon path ``key`` set to ``value``.
        """
        d = self.to_dict()
        parts = key.split(":")
        target = d
        for p in parts[:-1]:
            if p not in target or not isinstance(target[p], dict):
                raise ParameterError("Unknown config key %r." % key)
            target = target[p]
        if parts[-1] not in target and parts[0] != "ms":
            raise ParameterError("Unknown config key %r." % key)
        target[parts[-1]] = value
        return ExperimentConfig.from_dict(d)

    def with_overrides(self, overrides):
        config = self
        for k, v in overrides.items():
            if v is not None:
                config = config.override(k, v)
        return config

    def canonical_json(self):
        """Sorted-key JSON of every field that can change the outputs."""
        d = {k: v for k, v in self.to_dict().items() if k not in RUNTIME_KEYS}
        return json.dumps(d, sort_keys=True, separators=(",", ":"))

    @property
    def config_hash(self):
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()


def load_config(path=None):
    """Read and validate a config file; ``None`` loads the shipped default config."""
    path = path or DEFAULT_CONFIG_PATH
    try:
        with open(path) as f:
            raw = json.load(f)
    except json.JSONDecodeError as e:
        raise ParameterError("%s is not valid JSON: %s" % (path, e))
    if not isinstance(raw, dict):
        raise ParameterError("%s must hold a JSON object." % path)
    return ExperimentConfig.from_dict(raw).validate()


def save_config(config, path):
    with open(path, "w") as out:
        json.dump(config.to_dict(), out, sort_keys=True, indent=4)
        out.write("\n")
    return path
