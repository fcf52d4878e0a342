"""Non-subtractive dither and the equivalent model of a dithered DAC.

A dithered quantizer output is split into a deterministic transfer curve
``F(x) = E[Q(x + w) | x]`` and a zero-mean equivalent noise
``n = Q(x + w) - F(x)``. Dither is added before the DAC and never removed.
"""
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import special

from .quantizer import RangeError, Saturation, _quantize, neighbor_codes

MIN_PAIRED_SAMPLES = 10_000
TAIL_MASS = 1e-12
# Gaussian half-width beyond which the two tails together hold < TAIL_MASS.
_GAUSS_TAIL_SIGMAS = float(np.sqrt(2.0) * special.erfcinv(TAIL_MASS))


class UnsupportedConfigurationError(ValueError):
    pass


class DitherFamily(str, Enum):
    NONE = "none"
    UNIFORM = "uniform"
    GAUSSIAN = "gaussian"
    TRIANGULAR = "triangular"


@dataclass(frozen=True)
class DitherSpec:
    """Per-component dither law.

    ``param`` is the full width for ``uniform`` (support ``[-w/2, w/2)``),
    the standard deviation for ``gaussian`` and the half-width for
    ``triangular``. Real and imaginary parts are drawn independently.
    """

    family: DitherFamily = DitherFamily.NONE
    param: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "family", DitherFamily(self.family))
        if self.family is DitherFamily.NONE:
            object.__setattr__(self, "param", 0.0)
        elif not np.isfinite(self.param) or self.param <= 0:
            raise ValueError(f"{self.family.value} dither needs param > 0, got {self.param!r}")

    @classmethod
    def none(cls):
        return cls(DitherFamily.NONE)

    @classmethod
    def uniform(cls, width):
        return cls(DitherFamily.UNIFORM, width)

    @classmethod
    def gaussian(cls, sigma):
        return cls(DitherFamily.GAUSSIAN, sigma)

    @classmethod
    def triangular(cls, halfwidth):
        return cls(DitherFamily.TRIANGULAR, halfwidth)

    def scaled(self, factor):
        return DitherSpec(self.family, self.param * factor)

    @property
    def variance(self):
        """Per-component variance."""
        p = self.param
        return {
            DitherFamily.NONE: 0.0,
            DitherFamily.UNIFORM: p * p / 12.0,
            DitherFamily.GAUSSIAN: p * p,
            DitherFamily.TRIANGULAR: p * p / 6.0,
        }[self.family]

    def support(self):
        """Integration interval; Gaussian tails are cut where mass < 1e-12."""
        p = self.param
        if self.family is DitherFamily.UNIFORM:
            return -0.5 * p, 0.5 * p
        if self.family is DitherFamily.TRIANGULAR:
            return -p, p
        if self.family is DitherFamily.GAUSSIAN:
            return -_GAUSS_TAIL_SIGMAS * p, _GAUSS_TAIL_SIGMAS * p
        return 0.0, 0.0

    def kinks(self):
        """Interior points where the density is not smooth."""
        return (0.0,) if self.family is DitherFamily.TRIANGULAR else ()

    def pdf(self, w):
        w = np.asarray(w, dtype=float)
        p = self.param
        if self.family is DitherFamily.UNIFORM:
            return np.where((w >= -0.5 * p) & (w < 0.5 * p), 1.0 / p, 0.0)
        if self.family is DitherFamily.TRIANGULAR:
            return np.clip(p - np.abs(w), 0.0, None) / (p * p)
        if self.family is DitherFamily.GAUSSIAN:
            return np.exp(-0.5 * (w / p) ** 2) / (p * np.sqrt(2.0 * np.pi))
        raise UnsupportedConfigurationError("'none' dither is a point mass without a density")

    def sample_real(self, rng, size):
        p = self.param
        if self.family is DitherFamily.NONE:
            return np.zeros(size)
        if self.family is DitherFamily.UNIFORM:
            return (rng.random(size) - 0.5) * p
        if self.family is DitherFamily.TRIANGULAR:
            return (rng.random(size) + rng.random(size) - 1.0) * p
        return rng.normal(0.0, p, size)


def is_matched_uniform(spec, cfg, rtol=1e-12):
    return (spec.family is DitherFamily.UNIFORM
            and abs(spec.param - cfg.step) <= rtol * cfg.step)


def draw_dither(spec, rng, size=None):
    """Complex dither with independent real and imaginary components."""
    shape = () if size is None else size
    re = spec.sample_real(rng, shape)
    im = spec.sample_real(rng, shape)
    out = re + 1j * im
    return complex(out) if size is None else out


def dithered_quantize(x, spec, cfg, rng, counter=None):
    """``Q(x + w)`` with fresh dither; the dither is not subtracted."""
    x = np.asarray(x, dtype=complex)
    if cfg.saturation is Saturation.ASSUME_IN_RANGE:
        if not (np.all(cfg.in_range(x.real)) and np.all(cfg.in_range(x.imag))):
            raise RangeError(f"input outside +/-{cfg.range_limit:g} for a {cfg.bits}-bit DAC")
    w = draw_dither(spec, rng, x.shape)
    # The range check above is on the desired signal; the dithered sum may
    # legitimately sit half a step further out, so it is saturated, not rejected.
    out_re, clip_re = _quantize((x + w).real, cfg)
    out_im, clip_im = _quantize((x + w).imag, cfg)
    if counter is not None:
        counter.add(np.count_nonzero(clip_re) + np.count_nonzero(clip_im))
    out = out_re + 1j * out_im
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class TransferCurve:
    grid: np.ndarray
    values: np.ndarray
    method: str
    stderr: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.grid.ndim != 1 or np.any(np.diff(self.grid) <= 0):
            raise ValueError("transfer curve grid must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("transfer curve values must be finite")


def _as_grid(grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("grid must be a non-empty 1-D sequence")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    return grid


def transfer_function_closed_form_uniform(grid, cfg, dither=None):
    """F(x) for uniform dither of width exactly one step, from the two
    neighbouring codes and their selection probabilities."""
    if dither is not None and not is_matched_uniform(dither, cfg):
        raise UnsupportedConfigurationError(
            "closed form holds only for uniform dither whose width equals the step")
    grid = _as_grid(grid)
    x_lower, x_upper = neighbor_codes(grid, cfg)
    p_lower = (x_upper - grid) / cfg.step
    p_upper = (grid - x_lower) / cfg.step
    values = x_lower * p_lower + x_upper * p_upper
    return TransferCurve(grid, values, "closed_form_uniform")


def _staircase(x, cfg):
    return _quantize(np.asarray(x, dtype=float), cfg)[0]


def _piecewise_quadrature(grid, spec, cfg, nodes):
    """Integrate Q(x + w) p(w) over the dither support, split wherever the
    staircase jumps or the density has a kink. Q is constant on each piece,
    so each piece contributes code * (Gauss-Legendre integral of p)."""
    lo, hi = spec.support()
    step = cfg.step
    xi, wi = np.polynomial.legendre.leggauss(nodes)
    first = np.floor((grid + lo) / step)
    n_pieces = int(np.ceil((hi - lo) / step)) + 1
    j = first[:, None] + np.arange(n_pieces)[None, :]
    a = np.maximum(lo, j * step - grid[:, None])
    b = np.minimum(hi, (j + 1) * step - grid[:, None])
    b = np.maximum(a, b)
    # Density kinks split pieces further; kinks are fixed in w, not in x.
    edges = [a, b]
    for k in spec.kinks():
        edges.append(np.clip(np.full_like(a, k), a, b))
    edges = np.sort(np.stack(edges, axis=-1), axis=-1)
    left = edges[..., :-1]
    right = edges[..., 1:]
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    w = mid[..., None] + half[..., None] * xi
    mass = np.sum(spec.pdf(w) * wi, axis=-1) * half
    code = _staircase(grid[:, None, None] + mid, cfg)
    return np.sum(code * mass, axis=(1, 2))


def _converged_quadrature(grid, spec, cfg, tol, max_nodes):
    nodes = 8
    prev = _piecewise_quadrature(grid, spec, cfg, nodes)
    while True:
        nodes *= 2
        cur = _piecewise_quadrature(grid, spec, cfg, nodes)
        if np.max(np.abs(cur - prev)) <= tol:
            return cur
        if nodes >= max_nodes:
            raise ArithmeticError(f"quadrature did not reach tol={tol:g} with {nodes} nodes")
        prev = cur


def transfer_function_numeric(grid, spec, cfg, tol=1e-9, max_nodes=512, chunk=2048):
    """F(x) by quadrature of the convolution of the staircase with the dither
    density. Node count doubles until two successive estimates agree to ``tol``."""
    grid = _as_grid(grid)
    if spec.family is DitherFamily.NONE:
        return TransferCurve(grid, _staircase(grid, cfg), "numeric_convolution")
    values = np.concatenate([
        _converged_quadrature(grid[i:i + chunk], spec, cfg, tol, max_nodes)
        for i in range(0, grid.size, chunk)
    ])
    return TransferCurve(grid, values, "numeric_convolution")


def transfer_function_monte_carlo(grid, spec, cfg, rng, draws=100_000):
    """Sample-mean estimate of F(x) with its standard error."""
    grid = _as_grid(grid)
    values = np.empty_like(grid)
    stderr = np.empty_like(grid)
    for i, x in enumerate(grid):
        out = _staircase(x + spec.sample_real(rng, draws), cfg)
        values[i] = out.mean()
        stderr[i] = out.std(ddof=1) / np.sqrt(draws)
    return TransferCurve(grid, values, "monte_carlo", stderr)


def transfer_values(x, spec, cfg):
    """Real transfer function evaluated on arbitrary (unsorted) points."""
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    uniq, inverse = np.unique(flat, return_inverse=True)
    if is_matched_uniform(spec, cfg) and np.all(cfg.in_range(uniq)):
        vals = transfer_function_closed_form_uniform(uniq, cfg).values
    else:
        vals = transfer_function_numeric(uniq, spec, cfg).values
    return vals[inverse].reshape(x.shape)


def equivalent_noise(x, spec, cfg, rng, counter=None):
    """``Q(x + w) - F(x)`` componentwise.

    Only defined for an actual dither; the ditherless error is available
    from :func:`ditherdac.quantizer.quantization_error`.
    """
    if spec.family is DitherFamily.NONE:
        raise UnsupportedConfigurationError(
            "equivalent noise needs a dither; use quantization_error for the ditherless DAC")
    x = np.asarray(x, dtype=complex)
    out = dithered_quantize(x, spec, cfg, rng, counter)
    f = transfer_values(x.real, spec, cfg) + 1j * transfer_values(x.imag, spec, cfg)
    return out - f


@dataclass(frozen=True)
class EquivalentNoiseStats:
    mean: complex
    variance: float
    input_correlation: complex
    pairwise_correlation: complex
    sample_count: int
    mean_z: float
    input_z: float
    pairwise_z: float

    def passes(self, z_limit=3.0):
        return max(self.mean_z, self.input_z, self.pairwise_z) < z_limit


def _correlation(a, b):
    """Normalised complex correlation E[a* b] / sqrt(E|a|^2 E|b|^2)."""
    energy = np.sqrt(np.mean(np.abs(a) ** 2) * np.mean(np.abs(b) ** 2))
    if energy == 0:
        return 0j
    return complex(np.mean(np.conj(a) * b) / energy)


def noise_property_test(x, noise_a, noise_b):
    """Sample statistics of equivalent noise at two antennas.

    ``x`` is the desired input at antenna a; ``noise_a`` and ``noise_b`` are
    the paired equivalent noises. z-scores are against the null of zero mean,
    zero noise-input correlation and zero cross-antenna correlation. For a
    normalised complex correlation the null scale is ``1/sqrt(n)``.
    """
    x = np.asarray(x, dtype=complex).ravel()
    noise_a = np.asarray(noise_a, dtype=complex).ravel()
    noise_b = np.asarray(noise_b, dtype=complex).ravel()
    n = noise_a.size
    if not x.size == noise_b.size == n:
        raise ValueError("x, noise_a and noise_b must have equal length")
    if n < MIN_PAIRED_SAMPLES:
        raise ValueError(f"need at least {MIN_PAIRED_SAMPLES} paired samples, got {n}")
    mean = complex(noise_a.mean())
    sd_re = noise_a.real.std(ddof=1)
    sd_im = noise_a.imag.std(ddof=1)
    z_parts = [abs(mean.real) / (sd_re / np.sqrt(n)) if sd_re > 0 else 0.0,
               abs(mean.imag) / (sd_im / np.sqrt(n)) if sd_im > 0 else 0.0]
    rho_in = _correlation(noise_a, x)
    rho_pair = _correlation(noise_a, noise_b)
    return EquivalentNoiseStats(
        mean=mean,
        variance=float(np.mean(np.abs(noise_a - mean) ** 2)),
        input_correlation=rho_in,
        pairwise_correlation=rho_pair,
        sample_count=n,
        mean_z=float(max(z_parts)),
        input_z=float(abs(rho_in) * np.sqrt(n)),
        pairwise_z=float(abs(rho_pair) * np.sqrt(n)),
    )
