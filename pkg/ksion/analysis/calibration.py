"""
Local phase-frame calibration.

The analysis pulses act in each ion's own phase frame, which the base
phases alone do not pin down. ``calibrate_phases`` finds the frame offsets
(and the relative rotation sense of the Ba frame) that maximize the exact C
of a given state.
"""
from dataclasses import dataclass
import warnings

import numpy as np
from scipy.optimize import minimize

from ksion.analysis.core import CHSH_SIGNS
from ksion.measurement.core import CONTEXTS, ordered_pair, exact_recorded_chsh
from ksion.quantum.core import YB, QuantumState, correlation_tensor
from ksion.utils.errors import ParameterError

TWO_PI = 2 * np.pi
GRID_POINTS = 64
DEGENERATE_RANGE = 1e-9
TSIRELSON = 2 * np.sqrt(2)


@dataclass(frozen=True)
class FrameCalibration:
    offset_yb: float
    offset_ba: float
    sense_ba: int
    achieved_c: float
    degenerate: bool = False

    def apply(self, specs):
        out = []
        for s in specs:
            if s.ion == YB:
                out.append(s.with_frame(self.offset_yb))
            else:
                out.append(s.with_frame(self.offset_ba, self.sense_ba * s.phase_sense))
        return tuple(out)

    def to_dict(self):
        return {
            "offset_yb": self.offset_yb,
            "offset_ba": self.offset_ba,
            "sense_ba": self.sense_ba,
            "achieved_c": self.achieved_c,
            "degenerate": self.degenerate,
        }


def _bloch_xy(phase, sign):
    """In-plane Bloch vector of the observable and its derivative in phase."""
    vec = sign * np.stack([-np.sin(phase), np.cos(phase)], axis=-1)
    dvec = sign * np.stack([-np.cos(phase), -np.sin(phase)], axis=-1)
    return vec, dvec


class ChshLandscape:
    """
    Exact C of a state as a function of the two frame offsets, for a fixed
    Ba rotation sense, with its analytic gradient.
    """

    def __init__(self, state, specs, sense_ba=1):
        self.t = correlation_tensor(state)[:2, :2]
        self.pairs = []
        for sign, context in zip(CHSH_SIGNS, CONTEXTS):
            s_yb, s_ba, _ = ordered_pair(context, specs)
            self.pairs.append(
                (
                    sign,
                    s_yb.phase_sense * s_yb.phase,
                    s_yb.convention_sign,
                    sense_ba * s_ba.phase_sense * s_ba.phase,
                    s_ba.convention_sign,
                )
            )

    def grid(self, offsets):
        """C on the outer grid offsets x offsets (rows Yb, columns Ba)."""
        total = np.zeros((len(offsets), len(offsets)))
        for sign, p_yb, c_yb, p_ba, c_ba in self.pairs:
            n_yb, _ = _bloch_xy(p_yb + offsets, c_yb)
            n_ba, _ = _bloch_xy(p_ba + offsets, c_ba)
            total += sign * (n_yb @ self.t @ n_ba.T)
        return total

    def value_and_grad(self, x):
        o_yb, o_ba = x
        value, grad = 0.0, np.zeros(2)
        for sign, p_yb, c_yb, p_ba, c_ba in self.pairs:
            n_yb, d_yb = _bloch_xy(p_yb + o_yb, c_yb)
            n_ba, d_ba = _bloch_xy(p_ba + o_ba, c_ba)
            value += sign * (n_yb @ self.t @ n_ba)
            grad[0] += sign * (d_yb @ self.t @ n_ba)
            grad[1] += sign * (n_yb @ self.t @ d_ba)
        return float(value), grad


def exact_chsh(state, specs):
    """Noiseless C of ``state`` for the given observable specs."""
    return exact_recorded_chsh(state, specs)


def _grid_argmax(values):
    best = values.max()
    threshold = best - 1e-9 * max(1.0, abs(best))
    flat = int(np.flatnonzero(values.reshape(-1) >= threshold)[0])
    return np.unravel_index(flat, values.shape)


def calibrate_phases(state, specs, grid_points=GRID_POINTS):
    """
    Frame offsets (radians) for the Yb and Ba ions that maximize exact C.

    A ``grid_points`` x ``grid_points`` grid over both offsets, for each Ba
    rotation sense, locates the global basin; BFGS with the analytic gradient
    refines it.

    Returns:
        FrameCalibration. When C does not depend on the offsets the result is
        flagged degenerate with offsets (0, 0).
    """
    if not isinstance(state, QuantumState) or state.dims != (2, 2):
        raise ParameterError("Phase calibration needs a two-qubit QuantumState.")
    assert len(specs) == 4, "Need the four observable specs."
    offsets = TWO_PI * np.arange(grid_points) / grid_points

    best = None
    for sense in (1, -1):
        landscape = ChshLandscape(state, specs, sense)
        values = landscape.grid(offsets)
        spread = float(values.max() - values.min())
        if best is None or values.max() > best[1].max() + 1e-9:
            best = (sense, values, landscape, spread)
    sense, values, landscape, spread = best

    if spread < DEGENERATE_RANGE:
        warnings.warn("C does not depend on the frame offsets; calibration is degenerate.")
        c0, _ = ChshLandscape(state, specs, 1).value_and_grad((0.0, 0.0))
        return FrameCalibration(0.0, 0.0, 1, float(c0), degenerate=True)

    k_yb, k_ba = _grid_argmax(values)
    x0 = np.array([offsets[k_yb], offsets[k_ba]])

    def objective(x):
        val, grad = landscape.value_and_grad(x)
        return -val, -grad

    res = minimize(objective, x0, jac=True, method="BFGS", options={"gtol": 1e-10})
    x = res.x if -res.fun >= values[k_yb, k_ba] else x0
    achieved, _ = landscape.value_and_grad(x)
    assert achieved <= TSIRELSON + 1e-9, "C=%g exceeds the Tsirelson bound." % achieved
    o_yb, o_ba = np.mod(x, TWO_PI)
    return FrameCalibration(float(o_yb), float(o_ba), sense, float(achieved))


def depolarization_for_target(state, specs, noise, target_c, dark_outcome=1):
    """
    White-noise probability p with recorded C((1-p) rho + p I/4) = target_c.

    C is affine in p, so two exact evaluations fix it.
    """
    c_pure = exact_recorded_chsh(state, specs, noise, dark_outcome)
    c_mixed = exact_recorded_chsh(QuantumState.maximally_mixed(state.dims), specs, noise, dark_outcome)
    if abs(c_pure - c_mixed) < 1e-12:
        raise ParameterError("C does not depend on depolarization; cannot reach %r." % target_c)
    p = (c_pure - target_c) / (c_pure - c_mixed)
    if not -1e-12 <= p <= 1 + 1e-12:
        raise ParameterError(
            "Target C=%r is outside the reachable range [%g, %g]." % (target_c, c_mixed, c_pure)
        )
    return float(np.clip(p, 0.0, 1.0))
