"""Statistical self-checks across quantizer, dither model, array and EVM
predictors, collected into a pass/fail report."""
import math
from dataclasses import dataclass, field

import numpy as np

from . import evm
from .channel import ChannelScene, coherence_mismatch, worst_case_error_check
from .dither import (DitherSpec, equivalent_noise, noise_property_test,
                     transfer_function_closed_form_uniform, transfer_function_numeric)
from .harness import ExperimentConfig, calibrate_step
from .quantizer import QuantizerConfig, quantization_error, quantize_complex, quantize_real


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    statistic: float
    threshold: float
    samples: int
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def add(self, name, statistic, threshold, samples, detail="", passed=None):
        ok = statistic < threshold if passed is None else passed
        self.checks.append(CheckResult(name, bool(ok), float(statistic), float(threshold),
                                       int(samples), detail))

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _rng(seed, tag):
    return np.random.default_rng([seed, tag])


def uniform_error_variance(cfg, samples, rng):
    """Per-component quantization error variance for inputs uniform over
    the whole code range."""
    span = 2 ** (cfg.bits - 1) * cfg.step
    x = rng.uniform(-span, span, samples) + 1j * rng.uniform(-span, span, samples)
    q = quantization_error(x, cfg).value
    return float(np.var(q.real)), float(np.mean(q.real))


def validation_suite(cfg=None, samples=1_000_000, pair_samples=100_000,
                     shared_dither=False):
    """Run every invariant check; failures are report entries, not errors.

    ``shared_dither`` deliberately reuses one dither stream on both antennas
    of the whiteness check, which must then fail.
    """
    cfg = ExperimentConfig() if cfg is None else cfg
    seed = cfg.master_seed
    report = ValidationReport()
    power = 1.0
    step = calibrate_step(cfg.bits, cfg.peak2rms, power)
    qcfg = QuantizerConfig(cfg.bits, step)
    dither = DitherSpec.uniform(step)

    # Symmetries, including tie points at integer multiples of the step.
    rng = _rng(seed, 1)
    span = 2 ** (cfg.bits - 1) * step
    x = np.concatenate([rng.uniform(-span, span, 100_000),
                        step * np.arange(1, 2 ** (cfg.bits - 1))])
    odd = np.array_equal(quantize_real(-x, qcfg), -quantize_real(x, qcfg))
    report.add("quantizer_odd_symmetry", 0.0 if odd else 1.0, 0.5, x.size, passed=odd)
    z = x[:50_000] + 1j * x[50_000:100_000]
    rot = np.array_equal(quantize_complex(1j * z, qcfg), 1j * quantize_complex(z, qcfg))
    report.add("quantizer_quarter_rotation", 0.0 if rot else 1.0, 0.5, z.size, passed=rot)

    var, mean = uniform_error_variance(qcfg, samples, _rng(seed, 2))
    report.add("error_variance_step2_over_12", abs(var / (step ** 2 / 12) - 1), 0.01, samples)
    report.add("error_mean_zero", abs(mean), 3 * (step / math.sqrt(12)) / math.sqrt(samples),
               samples)

    rng = _rng(seed, 3)
    y = math.sqrt(power / 2) * (rng.standard_normal(samples) + 1j * rng.standard_normal(samples))
    noise = equivalent_noise(y, dither, qcfg, rng)
    conventional = quantization_error(y, qcfg).value
    var_d = float(np.mean(np.abs(noise) ** 2))
    var_c = float(np.mean(np.abs(conventional) ** 2))
    report.add("dithered_variance_step2_over_3", abs(var_d / (step ** 2 / 3) - 1), 0.01, samples)
    report.add("dither_penalty_ratio_2", abs(var_d / var_c / 2 - 1), 0.05, samples,
               detail=f"ratio={var_d / var_c:.6f}")

    grid = np.linspace(-qcfg.range_limit, qcfg.range_limit, 10_001)[:-1]
    closed = transfer_function_closed_form_uniform(grid, qcfg, dither).values
    numeric = transfer_function_numeric(grid, dither, qcfg).values
    report.add("transfer_identity", float(np.max(np.abs(closed - grid))), 1e-12, grid.size,
               passed=np.max(np.abs(closed - grid)) <= 1e-12)
    report.add("transfer_numeric_vs_closed", float(np.max(np.abs(numeric - closed))), 1e-9,
               grid.size, passed=np.max(np.abs(numeric - closed)) <= 1e-9)

    rng = _rng(seed, 4)
    n = pair_samples
    x = math.sqrt(power / 2) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    rng_a = _rng(seed, 5)
    rng_b = _rng(seed, 5) if shared_dither else _rng(seed, 6)
    stats = noise_property_test(x, equivalent_noise(x, dither, qcfg, rng_a),
                                equivalent_noise(x, dither, qcfg, rng_b))
    report.add("noise_mean_z", stats.mean_z, 3.0, n)
    report.add("noise_input_correlation_z", stats.input_z, 3.0, n)
    report.add("noise_whiteness_z", stats.pairwise_z, 3.0, n,
               detail=f"|rho|={abs(stats.pairwise_correlation):.3e}")

    rng = _rng(seed, 7)
    draws = 1000
    coherent = True
    for alpha in (0.0, math.pi / 2, -math.pi / 2):
        scene = ChannelScene(cfg.scene.antennas, (alpha,))
        m = scene.antennas
        sig = math.sqrt(power / 2) * (rng.standard_normal(draws)
                                      + 1j * rng.standard_normal(draws))
        wc_step = calibrate_step(cfg.bits, cfg.peak2rms, power / m ** 2)
        coherent &= worst_case_error_check(scene, sig, QuantizerConfig(cfg.bits, wc_step))
    report.add("worst_case_coherence", 0.0 if coherent else 1.0, 0.5, draws, passed=coherent)
    scene = ChannelScene(max(cfg.scene.antennas, 2), (0.3,))
    mismatch = coherence_mismatch(scene, sig, QuantizerConfig(
        cfg.bits, calibrate_step(cfg.bits, cfg.peak2rms, power / scene.antennas ** 2)))
    report.add("generic_direction_not_coherent", -mismatch, 0.0, draws,
               detail=f"max mismatch {mismatch:.3e}")

    worst = 0.0
    grid = np.random.default_rng([seed, 8])
    for _ in range(100):
        m = int(grid.integers(1, 20_000))
        bits = int(grid.integers(1, 17))
        p2r = float(10 ** grid.uniform(0.1, 3))
        sp = float(10 ** grid.uniform(-3, 3))
        d = calibrate_step(bits, p2r, sp / m ** 2)
        lo, hi = evm.predict_conventional_bounds(m, d, sp)
        dith = evm.predict_dithered(m, d, sp)
        res = evm.predict_dithered_from_resolution(m, bits, p2r)
        worst = max(worst, abs(dith / (2 * lo) - 1), abs(hi / (m * lo) - 1),
                    abs(res / dith - 1))
    report.add("predictor_consistency", worst, 1e-12, 100, passed=worst <= 1e-12)
    return report
