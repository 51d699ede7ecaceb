"""
Optical parameters of the two ion species, loaded from ``data/ion_levels.json``.
"""
from dataclasses import dataclass
import json
import os.path as osp

from ksion.user_config import PACKAGE_DATA_DIR
from ksion.utils.errors import ParameterError

ION_LEVELS_PATH = osp.join(PACKAGE_DATA_DIR, "ion_levels.json")
LEVELS = ("P1/2", "P3/2")
LASERS = ("355", "532")
THZ_TO_MHZ = 1e6
K_TOLERANCE = 0.01


@dataclass(frozen=True)
class ExcitedLevel:
    name: str
    linewidth_mhz: float
    saturation_intensity: float
    detuning_thz: dict
    k: float

    @property
    def k_computed(self):
        """gamma^2 / I_sat."""
        return self.linewidth_mhz ** 2 / self.saturation_intensity

    def detuning_mhz(self, laser):
        laser = str(laser)
        if laser not in self.detuning_thz:
            raise ParameterError("No %s nm detuning for level %s." % (laser, self.name))
        return self.detuning_thz[laser] * THZ_TO_MHZ


@dataclass(frozen=True)
class IonOpticalParams:
    ion: str
    prefactor: float
    levels: tuple

    def level(self, name):
        for lv in self.levels:
            if lv.name == name:
                return lv
        raise ParameterError("Ion %s has no level %s." % (self.ion, name))

    def check_k(self, tol=K_TOLERANCE):
        """Relative mismatch between stored and recomputed k, per level."""
        mismatch = {lv.name: abs(lv.k_computed - lv.k) / lv.k for lv in self.levels}
        bad = {k: v for k, v in mismatch.items() if v > tol}
        if bad:
            raise ParameterError("Ion %s: stored k off by %s." % (self.ion, bad))
        return mismatch


@dataclass(frozen=True)
class OpticalTable:
    ions: dict
    qubit_splitting_mhz: dict
    comb_shift_mhz: dict
    repetition_rate_mhz: float
    target_rabi_mhz: float
    driving_laser: dict

    def __getitem__(self, ion):
        if ion not in self.ions:
            raise ParameterError("Unknown ion %r." % (ion,))
        return self.ions[ion]

    def wrong_laser(self, ion):
        """The laser meant for the other ion."""
        own = self.driving_laser[ion]
        return next(l for l in LASERS if l != own)


def _level_from_dict(name, d):
    return ExcitedLevel(
        name=name,
        linewidth_mhz=float(d["linewidth_mhz"]),
        saturation_intensity=float(d["saturation_intensity"]),
        detuning_thz={str(k): float(v) for k, v in d["detuning_thz"].items()},
        k=float(d["k"]),
    )


def load_ion_levels(path=None, check=True):
    """Read the optical table; with ``check`` the stored k values are verified."""
    with open(path or ION_LEVELS_PATH) as f:
        raw = json.load(f)
    ions = {}
    for ion, spec in raw["ions"].items():
        levels = tuple(_level_from_dict(n, spec["levels"][n]) for n in LEVELS)
        ions[ion] = IonOpticalParams(ion, float(spec["prefactor"]), levels)
        if check:
            ions[ion].check_k()
    return OpticalTable(
        ions=ions,
        qubit_splitting_mhz={k: float(v) for k, v in raw["qubit_splitting_mhz"].items()},
        comb_shift_mhz={str(k): float(v) for k, v in raw["comb_shift_mhz"].items()},
        repetition_rate_mhz=float(raw["repetition_rate_mhz"]),
        target_rabi_mhz=float(raw["target_rabi_mhz"]),
        driving_laser={k: str(v) for k, v in raw["driving_laser"].items()},
    )
