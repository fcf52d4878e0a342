"""Seeded Monte Carlo experiments: step calibration, the single-user chain,
angle and resolution sweeps.

Trials are cut into fixed blocks of ``TRIAL_BLOCK`` samples regardless of
the worker count. Each block is computed independently from counter-based
streams and blocks are merged with ``math.fsum`` in block order, so tables
are byte-identical for any number of workers.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import evm
from .channel import ChannelScene, steering_vector
from .dither import DitherSpec
from .kernels import chain_block

TRIAL_BLOCK = 1024
DEFAULT_ANGLES = tuple(range(-90, 91, 3))
DEFAULT_SEED = 0x5EED_DAC0


def calibrate_step(bits, peak2rms_linear, per_antenna_power):
    """Quantizer step putting full scale ``2^(N-1) * step`` at
    ``peak2rms_linear`` times the per-antenna complex power."""
    if bits < 1 or peak2rms_linear <= 0 or per_antenna_power <= 0:
        raise ValueError("need bits >= 1, peak2rms_linear > 0, per_antenna_power > 0")
    return math.sqrt(peak2rms_linear * per_antenna_power) / 2.0 ** (bits - 1)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines a run. ``dither.param`` is in units of the
    calibrated step; angles are in degrees; ``signal_power`` is E|y|^2."""

    scene: ChannelScene = field(default_factory=lambda: ChannelScene(100))
    bits: int = 6
    peak2rms_db: float = 15.0
    samples: int = 10_000
    angle_grid: tuple = DEFAULT_ANGLES
    M_grid: tuple = (1, 10, 100)
    N_grid: tuple = (2, 3, 4, 5, 6, 7, 8)
    master_seed: int = DEFAULT_SEED
    dither: DitherSpec = field(default_factory=lambda: DitherSpec.uniform(1.0))
    signal_power: float = 1.0

    def __post_init__(self):
        if int(self.samples) != self.samples or self.samples < 1:
            raise ValueError(f"samples must be an integer >= 1, got {self.samples!r}")
        if int(self.bits) != self.bits or self.bits < 1:
            raise ValueError(f"bits must be an integer >= 1, got {self.bits!r}")
        if not self.peak2rms_db > 0:
            raise ValueError(f"peak2rms_db must be > 0 dB, got {self.peak2rms_db!r}")
        if not self.signal_power > 0:
            raise ValueError(f"signal_power must be > 0, got {self.signal_power!r}")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        for name in ("angle_grid", "M_grid", "N_grid"):
            grid = tuple(getattr(self, name))
            if not grid:
                raise ValueError(f"{name} must be non-empty")
            object.__setattr__(self, name, grid)
        if any(not -90 <= a <= 90 for a in self.angle_grid):
            raise ValueError("angle_grid entries must lie in [-90, 90] degrees")
        if any(int(m) != m or m < 1 for m in self.M_grid):
            raise ValueError("M_grid entries must be integers >= 1")
        if any(int(n) != n or n < 1 for n in self.N_grid):
            raise ValueError("N_grid entries must be integers >= 1")

    @property
    def peak2rms(self):
        return 10.0 ** (self.peak2rms_db / 10.0)

    def step_for(self, antennas, bits):
        return calibrate_step(bits, self.peak2rms, self.signal_power / antennas ** 2)

    def to_dict(self):
        d = asdict(self)
        d["scene"] = {"antennas": self.scene.antennas, "users": list(self.scene.users),
                      "geometry": self.scene.geometry}
        d["dither"] = {"family": self.dither.family.value, "param": self.dither.param}
        for name in ("angle_grid", "M_grid", "N_grid"):
            d[name] = list(d[name])
        return d


@dataclass(frozen=True)
class SweepRow:
    angle_deg: float
    antennas: int
    bits: int
    step: float
    evm_conventional_db: float
    evm_dithered_db: float
    evm_analytic_db: float
    evm_conventional_min_db: float
    evm_conventional_max_db: float
    clipped_conventional: int
    clipped_dithered: int
    samples: int


def _blocks(samples):
    return [(t0, min(TRIAL_BLOCK, samples - t0)) for t0 in range(0, samples, TRIAL_BLOCK)]


def _run_tasks(tasks, workers):
    """Evaluate ``chain_block`` argument tuples, preserving order."""
    if workers <= 1 or len(tasks) == 1:
        return [chain_block(*t) for t in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda t: chain_block(*t), tasks))


@dataclass(frozen=True)
class _Point:
    alpha: float
    antennas: int
    bits: int
    dithered: bool


def _run_points(cfg, points, workers, backend):
    """EVM report for each point; all blocks of all points share one pool."""
    tasks = []
    spans = []
    for p in points:
        step = cfg.step_for(p.antennas, p.bits)
        top = 2 ** (p.bits - 1) - 1
        dither = cfg.dither.scaled(step) if p.dithered else DitherSpec.none()
        steer = steering_vector(p.alpha, p.antennas)
        first = len(tasks)
        for t0, n in _blocks(cfg.samples):
            tasks.append((cfg.master_seed, t0, n, steer, step, top, dither.family,
                          dither.param, cfg.signal_power, backend))
        spans.append((first, len(tasks), step))
    results = _run_tasks(tasks, workers)
    reports = []
    for p, (a, b, step) in zip(points, spans):
        part = results[a:b]
        err = math.fsum(r[0] for r in part)
        sig = math.fsum(r[1] for r in part)
        lo, hi = evm.predict_conventional_bounds(p.antennas, step, cfg.signal_power)
        reports.append(evm.EvmReport(
            empirical_evm=err / sig,
            sample_count=cfg.samples,
            analytic_min=lo,
            analytic_max=hi,
            analytic_dithered=evm.predict_dithered(p.antennas, step, cfg.signal_power),
            clipped_samples=sum(r[2] for r in part),
        ))
    return reports


def simulate_chain(cfg, alpha, dithered, workers=1, backend=None):
    """Single-user chain at direction ``alpha`` (radians) for the scene's
    array size and ``cfg.bits``."""
    if len(cfg.scene.users) != 1:
        raise ValueError("simulate_chain supports a single user")
    point = _Point(float(alpha), cfg.scene.antennas, cfg.bits, bool(dithered))
    return _run_points(cfg, [point], workers, backend)[0]


def _rows(cfg, keys, workers, backend):
    points = []
    for alpha, m, n in keys:
        points.append(_Point(alpha, m, n, False))
        points.append(_Point(alpha, m, n, True))
    reports = _run_points(cfg, points, workers, backend)
    rows = []
    for i, (alpha, m, n) in enumerate(keys):
        conv, dith = reports[2 * i], reports[2 * i + 1]
        rows.append(SweepRow(
            angle_deg=float(np.rad2deg(alpha)),
            antennas=m,
            bits=n,
            step=cfg.step_for(m, n),
            evm_conventional_db=conv.empirical_evm_db,
            evm_dithered_db=dith.empirical_evm_db,
            evm_analytic_db=float(evm.to_db(
                evm.predict_dithered_from_resolution(m, n, cfg.peak2rms))),
            evm_conventional_min_db=float(evm.to_db(conv.analytic_min)),
            evm_conventional_max_db=float(evm.to_db(conv.analytic_max)),
            clipped_conventional=conv.clipped_samples,
            clipped_dithered=dith.clipped_samples,
            samples=cfg.samples,
        ))
    return rows


def angle_sweep(cfg, workers=1, backend=None):
    """Conventional, dithered and analytic EVM at every angle of the grid."""
    keys = [(float(np.deg2rad(a)), cfg.scene.antennas, cfg.bits) for a in cfg.angle_grid]
    return _rows(cfg, keys, workers, backend)


def resolution_sweep(cfg, workers=1, backend=None, alpha=0.0):
    """Worst-case-direction EVM over the (M, N) grid."""
    keys = [(alpha, int(m), int(n)) for m in cfg.M_grid for n in cfg.N_grid]
    return _rows(cfg, keys, workers, backend)
