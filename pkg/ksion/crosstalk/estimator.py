"""
Raman coupling strengths and the wrong-ion crosstalk budget.

All Rabi frequencies are Omega/2pi in MHz and intensities in mW/cm^2.
"""
from dataclasses import dataclass, field

import numpy as np

from ksion.crosstalk.core import load_ion_levels
from ksion.utils.errors import ParameterError

NEGLIGIBLE_TRANSFER = 1e-4
VERDICT_NEGLIGIBLE = "This amount of crosstalk is negligible"
VERDICT_SIGNIFICANT = "This amount of crosstalk is NOT negligible"


def _table(params):
    return params if params is not None else load_ion_levels()


def rabi_per_intensity(ion, laser, params=None):
    """Signed prefactor/12 * (-k1/Delta1 + k2/Delta2), MHz per mW/cm^2."""
    ion_params = _table(params)[ion]
    p12, p32 = ion_params.level("P1/2"), ion_params.level("P3/2")
    d1, d2 = p12.detuning_mhz(laser), p32.detuning_mhz(laser)
    if d1 == 0 or d2 == 0:
        raise ParameterError("Zero detuning for %s with the %s nm laser." % (ion, laser))
    return ion_params.prefactor / 12.0 * (-p12.k / d1 + p32.k / d2)


def raman_rabi(ion, laser, intensity, params=None):
    """|Omega|/2pi (MHz) of the two-photon Raman coupling at ``intensity``."""
    if intensity < 0:
        raise ParameterError("Intensity must be non-negative, got %r." % (intensity,))
    return abs(intensity * rabi_per_intensity(ion, laser, params))


def intensity_for_rabi(ion, laser, rabi_mhz, params=None):
    """Intensity giving |Omega|/2pi = ``rabi_mhz``."""
    if not rabi_mhz > 0:
        raise ParameterError("Target Rabi frequency must be positive, got %r." % (rabi_mhz,))
    return rabi_mhz / abs(rabi_per_intensity(ion, laser, params))


def max_population_transfer(rabi_mhz, detuning_mhz):
    """Peak off-resonant transfer Omega^2 / (Delta^2 + Omega^2)."""
    denom = detuning_mhz ** 2 + rabi_mhz ** 2
    if denom == 0:
        raise ParameterError("Rabi frequency and detuning cannot both be zero.")
    return rabi_mhz ** 2 / denom


def comb_detuning(qubit_splitting, comb_shift, rep_rate=None):
    """
    Detuning of a comb-pair Raman transition from a qubit (MHz).

    Without ``rep_rate`` this is |splitting - shift|. With it, the closest
    comb line wins: min over integer m of |splitting - shift - m * rep_rate|.
    """
    offset = qubit_splitting - comb_shift
    if rep_rate is None:
        return abs(offset)
    if not rep_rate > 0:
        raise ParameterError("Repetition rate must be positive.")
    m = np.round(offset / rep_rate)
    return float(min(abs(offset - k * rep_rate) for k in (m - 1, m, m + 1)))


@dataclass
class CrosstalkBudget:
    """Driving intensities, wrong-ion couplings and transfer bounds."""

    target_rabi_mhz: float
    intensities: dict
    wrong_ion_rabi: dict
    comb_detunings: dict
    detuning_mhz: float
    max_transfer: dict
    verdict: str
    rows: list = field(default_factory=list)

    def to_dict(self):
        return {
            "target_rabi_mhz": self.target_rabi_mhz,
            "intensities": self.intensities,
            "wrong_ion_rabi": self.wrong_ion_rabi,
            "comb_detunings": self.comb_detunings,
            "detuning_mhz": self.detuning_mhz,
            "max_transfer": self.max_transfer,
            "verdict": self.verdict,
        }

    def to_text(self):
        lines = ["Crosstalk budget", "=" * 40]
        lines.append("Target coupling on the intended ion: %.3f MHz" % self.target_rabi_mhz)
        for laser, intensity in sorted(self.intensities.items()):
            lines.append("I_%s = %.3e mW/cm^2" % (laser, intensity))
        lines.append("")
        lines.append("%-12s %12s %14s %12s" % ("pairing", "|Omega| MHz", "comb Delta MHz", "P_max"))
        for key in sorted(self.wrong_ion_rabi):
            lines.append(
                "%-12s %12.4g %14.4g %12.3e"
                % (key, self.wrong_ion_rabi[key], self.comb_detunings[key], self.max_transfer[key])
            )
        lines.append("P_max uses the common detuning %.2f MHz." % self.detuning_mhz)
        lines.append(self.verdict + ".")
        return "\n".join(lines) + "\n"


def crosstalk_budget(params=None, target_rabi=None, threshold=NEGLIGIBLE_TRANSFER):
    """
    Full wrong-ion crosstalk budget.

    Each laser is set to the intensity that drives its own ion at
    ``target_rabi``; the same intensity then drives the other ion. The
    transfer bound uses the smallest comb detuning over both pairings.
    """
    table = _table(params)
    target = table.target_rabi_mhz if target_rabi is None else target_rabi
    intensities = {
        laser: intensity_for_rabi(ion, laser, target, table)
        for ion, laser in table.driving_laser.items()
    }
    wrong, detunings = {}, {}
    for ion in table.driving_laser:
        laser = table.wrong_laser(ion)
        key = "%s,%s" % (ion, laser)
        wrong[key] = raman_rabi(ion, laser, intensities[laser], table)
        detunings[key] = comb_detuning(
            table.qubit_splitting_mhz[ion], table.comb_shift_mhz[laser], table.repetition_rate_mhz
        )
    common = min(detunings.values())
    transfer = {k: max_population_transfer(v, common) for k, v in wrong.items()}
    verdict = VERDICT_NEGLIGIBLE if max(transfer.values()) < threshold else VERDICT_SIGNIFICANT
    return CrosstalkBudget(target, intensities, wrong, detunings, common, transfer, verdict)
