"""Uniform mid-rise quantizer modelling one real DAC, and its complex pair.

Codes are odd multiples of ``step / 2``. Ties at integer multiples of the
step round away from zero and zero maps to ``+step / 2``, which keeps the
quantizer exactly odd-symmetric. Inputs are accepted as scalars or numpy
arrays; complex samples are ordinary Python/numpy complex numbers.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np


class Saturation(str, Enum):
    ASSUME_IN_RANGE = "assume_in_range"
    SATURATE_AND_COUNT = "saturate_and_count"


class RangeError(ValueError):
    """Input lies outside the DAC dynamic range."""


@dataclass(frozen=True)
class QuantizerConfig:
    bits: int
    step: float
    saturation: Saturation = Saturation.SATURATE_AND_COUNT

    def __post_init__(self):
        if int(self.bits) != self.bits or self.bits < 1:
            raise ValueError(f"bits must be an integer >= 1, got {self.bits!r}")
        if not np.isfinite(self.step) or self.step <= 0:
            raise ValueError(f"step must be finite and > 0, got {self.step!r}")
        object.__setattr__(self, "saturation", Saturation(self.saturation))

    @property
    def levels(self):
        return 2 ** self.bits

    @property
    def top_index(self):
        """Index of the largest code, which sits at (top_index + 0.5) * step."""
        return 2 ** (self.bits - 1) - 1

    @property
    def full_scale(self):
        return (2 ** (self.bits - 1) - 0.5) * self.step

    @property
    def range_limit(self):
        """Half-width of the nominal input range, ``(2^(N-1) - 1) * step``."""
        return (2 ** (self.bits - 1) - 1) * self.step

    def in_range(self, x):
        x = np.asarray(x, dtype=float)
        return (x >= -self.range_limit) & (x < self.range_limit)

    def codes(self):
        k = np.arange(-2 ** (self.bits - 1), 2 ** (self.bits - 1))
        return (k + 0.5) * self.step


@dataclass
class ClipCounter:
    """Caller-owned tally of saturated real DAC conversions."""

    count: int = 0

    def add(self, n):
        self.count += int(n)


@dataclass(frozen=True)
class QuantizationError:
    value: np.ndarray
    clipped: np.ndarray


def _check_finite(x):
    if not np.all(np.isfinite(x)):
        raise ValueError("quantizer input must be finite")


def _quantize(x, cfg):
    """Return (codes, clipped mask) for a float array, no range policy."""
    k = np.floor(np.abs(x) / cfg.step)
    clipped = k > cfg.top_index
    k = np.minimum(k, cfg.top_index)
    out = (k + 0.5) * cfg.step
    return np.where(x < 0, -out, out), clipped


def quantize_real(x, cfg, counter=None):
    """Quantize real samples.

    Under ``SATURATE_AND_COUNT`` inputs beyond the top code's cell clamp to
    ``+/-full_scale`` and are tallied in ``counter``. Under
    ``ASSUME_IN_RANGE`` any input outside ``[-(2^(N-1)-1) step,
    (2^(N-1)-1) step)`` raises :class:`RangeError`.
    """
    x = np.asarray(x, dtype=float)
    _check_finite(x)
    if cfg.saturation is Saturation.ASSUME_IN_RANGE and not np.all(cfg.in_range(x)):
        raise RangeError(f"input outside +/-{cfg.range_limit:g} for a {cfg.bits}-bit DAC")
    out, clipped = _quantize(x, cfg)
    if counter is not None:
        counter.add(np.count_nonzero(clipped))
    return out[()] if out.ndim == 0 else out


def quantize_complex(x, cfg, counter=None):
    x = np.asarray(x, dtype=complex)
    re = quantize_real(x.real, cfg, counter)
    im = quantize_real(x.imag, cfg, counter)
    return re + 1j * im


def quantization_error(x, cfg, counter=None):
    """Complex quantization error ``Q(x) - x`` with a per-sample clip flag."""
    x = np.asarray(x, dtype=complex)
    _check_finite(x.real)
    _check_finite(x.imag)
    if cfg.saturation is Saturation.ASSUME_IN_RANGE:
        if not (np.all(cfg.in_range(x.real)) and np.all(cfg.in_range(x.imag))):
            raise RangeError(f"input outside +/-{cfg.range_limit:g} for a {cfg.bits}-bit DAC")
    re, clip_re = _quantize(x.real, cfg)
    im, clip_im = _quantize(x.imag, cfg)
    if counter is not None:
        counter.add(np.count_nonzero(clip_re) + np.count_nonzero(clip_im))
    return QuantizationError(value=(re + 1j * im) - x, clipped=clip_re | clip_im)


def neighbor_codes(x, cfg):
    """The two codes bracketing ``x``: ``x_L <= x < x_U`` and ``x_U - x_L = step``."""
    x = np.asarray(x, dtype=float)
    _check_finite(x)
    if not np.all(cfg.in_range(x)):
        raise RangeError(f"input outside +/-{cfg.range_limit:g} for a {cfg.bits}-bit DAC")
    # floor, not truncation: the two agree for x >= -step/2 and only floor
    # brackets x below that.
    x_lower = cfg.step * np.floor((x + 0.5 * cfg.step) / cfg.step) - 0.5 * cfg.step
    return x_lower, x_lower + cfg.step
