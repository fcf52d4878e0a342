"""Error vector magnitude: empirical estimate and closed-form predictors.

EVM here is a power ratio, distortion energy over desired-signal energy, on
complex baseband samples. dB values are ``10 log10`` of that ratio.
"""
import math
from dataclasses import dataclass

import numpy as np


def to_db(ratio):
    return 10.0 * np.log10(ratio)


def from_db(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def empirical_evm(desired, received):
    desired = np.asarray(desired, dtype=complex)
    received = np.asarray(received, dtype=complex)
    if desired.shape != received.shape:
        raise ValueError("desired and received must have the same shape")
    if desired.size == 0:
        raise ValueError("need at least one sample")
    signal = np.sum(np.abs(desired) ** 2)
    if signal == 0:
        raise ZeroDivisionError("EVM undefined: desired signal has zero energy")
    return float(np.sum(np.abs(received - desired) ** 2) / signal)


def _check(antennas, step, signal_power):
    if antennas < 1:
        raise ValueError("antennas must be >= 1")
    if step <= 0 or signal_power <= 0:
        raise ValueError("step and signal_power must be > 0")


def predict_conventional_bounds(antennas, step, signal_power):
    """(best, worst) EVM of ditherless DACs: errors uncorrelated across the
    array versus fully coherent."""
    _check(antennas, step, signal_power)
    per_antenna = step * step / 6.0 / signal_power
    return antennas * per_antenna, antennas * antennas * per_antenna


def predict_dithered(antennas, step, signal_power):
    _check(antennas, step, signal_power)
    return antennas * step * step / (3.0 * signal_power)


def predict_dithered_from_resolution(antennas, bits, peak2rms):
    """Dithered EVM with the step set from ``bits`` and the linear
    full-scale-to-RMS power ratio ``peak2rms``."""
    if antennas < 1 or bits < 1 or peak2rms <= 0:
        raise ValueError("need antennas >= 1, bits >= 1, peak2rms > 0")
    return peak2rms / (3.0 * antennas * 4.0 ** (bits - 1))


def resolution_tradeoff(antennas):
    """Step-size ratio and bit savings of dithered over conventional DACs at
    equal worst-case EVM. Savings are real-valued; floor them for hardware."""
    if antennas < 1:
        raise ValueError("antennas must be >= 1")
    half = antennas / 2.0
    return math.sqrt(half), math.log2(half) / 2.0


def worst_case_gain_db(antennas):
    return 10.0 * math.log10(antennas / 2.0)


@dataclass(frozen=True)
class EvmReport:
    empirical_evm: float
    sample_count: int
    analytic_min: float
    analytic_max: float
    analytic_dithered: float
    clipped_samples: int

    @property
    def empirical_evm_db(self):
        return float(to_db(self.empirical_evm))
