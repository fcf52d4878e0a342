import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ditherdac import evm
from ditherdac.harness import calibrate_step


def test_empirical_examples():
    d = np.array([1 + 1j, -2 + 0.5j, 0.3j])
    assert evm.empirical_evm(d, d) == 0.0
    assert evm.empirical_evm(d, 2 * d) == pytest.approx(1.0)


def test_empirical_errors():
    with pytest.raises(ZeroDivisionError):
        evm.empirical_evm(np.zeros(3), np.ones(3))
    with pytest.raises(ValueError):
        evm.empirical_evm(np.ones(3), np.ones(4))
    with pytest.raises(ValueError):
        evm.empirical_evm([], [])


@given(st.complex_numbers(min_magnitude=1e-3, max_magnitude=1e3))
def test_scale_invariance(c):
    g = np.random.default_rng(0)
    d = g.standard_normal(50) + 1j * g.standard_normal(50)
    r = d + 0.1 * (g.standard_normal(50) + 1j * g.standard_normal(50))
    assert evm.empirical_evm(c * d, c * r) == pytest.approx(evm.empirical_evm(d, r), rel=1e-9)


def test_conventional_bounds_examples():
    lo, hi = evm.predict_conventional_bounds(1, 0.4, 2.0)
    assert lo == hi == pytest.approx(0.16 / 12)
    lo, hi = evm.predict_conventional_bounds(1000, 1.0, 1.0)
    assert lo == pytest.approx(166.666666667)
    assert hi == pytest.approx(166666.666667)


def test_dithered_examples():
    assert evm.predict_dithered(2, 1.0, 1.0) == pytest.approx(2 / 3)
    value = evm.predict_dithered_from_resolution(1000, 6, 10 ** 1.5)
    assert value == pytest.approx(1.0294e-5, rel=1e-4)
    assert evm.to_db(value) == pytest.approx(-49.874, abs=1e-3)


def test_resolution_scalings():
    base = evm.predict_dithered_from_resolution(100, 5, 30.0)
    assert evm.to_db(base / evm.predict_dithered_from_resolution(400, 5, 30.0)) == pytest.approx(
        20 * math.log10(2))
    assert evm.to_db(base / evm.predict_dithered_from_resolution(100, 6, 30.0)) == pytest.approx(
        20 * math.log10(2))


def test_tradeoff_examples():
    assert evm.resolution_tradeoff(2) == (1.0, 0.0)
    assert evm.resolution_tradeoff(512) == (16.0, 4.0)
    assert evm.worst_case_gain_db(1000) == pytest.approx(26.9897, abs=1e-4)


@given(st.integers(1, 100_000), st.floats(1e-4, 1e2), st.floats(1e-4, 1e4))
def test_consistency_chain(m, step, power):
    lo, hi = evm.predict_conventional_bounds(m, step, power)
    dith = evm.predict_dithered(m, step, power)
    assert dith == pytest.approx(2 * lo, rel=1e-12)
    assert hi == pytest.approx(m * lo, rel=1e-12)
    assert dith == pytest.approx(2 / m * hi, rel=1e-12)


@given(st.integers(1, 100_000), st.integers(1, 16), st.floats(1.01, 1e3), st.floats(1e-3, 1e3))
def test_resolution_form_matches_step_form(m, bits, p2r, power):
    step = calibrate_step(bits, p2r, power / m ** 2)
    assert evm.predict_dithered(m, step, power) == pytest.approx(
        evm.predict_dithered_from_resolution(m, bits, p2r), rel=1e-12)


def test_db_roundtrip():
    assert evm.from_db(evm.to_db(0.123)) == pytest.approx(0.123)


def test_report_db():
    r = evm.EvmReport(0.01, 10, 1.0, 2.0, 2.0, 0)
    assert r.empirical_evm_db == pytest.approx(-20.0)
