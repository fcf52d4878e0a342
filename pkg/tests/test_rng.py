import numpy as np
import pytest

from ditherdac import rng
from ditherdac._backend import NUMBA_AVAILABLE


def numpy_philox_block(key, counter):
    """First block numpy's Philox emits; it increments the counter first."""
    c = np.array(counter, dtype=np.uint64)
    c[0] -= np.uint64(1)
    bg = np.random.Philox(key=np.array(key, dtype=np.uint64), counter=c)
    return bg.random_raw(4)


@pytest.mark.parametrize("key,counter", [
    ((0, 0), (1, 0, 0, 0)),
    ((5, 7), (3, 3, 4, 5)),
    ((2 ** 64 - 1, 2 ** 63), (2 ** 40 + 1, 2 ** 64 - 1, 17, 2 ** 32)),
    ((123456789, 1), (10_000, 999, 1, 0)),
])
def test_philox_matches_numpy(key, counter):
    expected = numpy_philox_block(key, counter)
    assert np.array_equal(rng.philox4x64(counter, key), expected)


@pytest.mark.skipif(not NUMBA_AVAILABLE, reason="numba missing")
def test_compiled_philox_matches_numpy():
    key, counter = (0xDEADBEEF, 2), (77, 5, 1, 0)
    words = rng._philox_scalar(*(np.uint64(c) for c in counter), *(np.uint64(k) for k in key))
    assert [int(w) for w in words] == [int(w) for w in numpy_philox_block(key, counter)]


def test_to_unit_range():
    u = rng.to_unit(np.array([0, 2 ** 64 - 1], dtype=np.uint64))
    assert u[0] == 0.0
    assert u[1] < 1.0


def test_antenna_uniforms_pairs_share_a_block():
    block = rng.uniforms(3, rng.ROLE_DITHER, 10, 2)
    even = rng.antenna_uniforms(3, rng.ROLE_DITHER, 10, 4)
    odd = rng.antenna_uniforms(3, rng.ROLE_DITHER, 10, 5)
    assert np.array_equal(even, block[:2])
    assert np.array_equal(odd, block[2:])


def test_user_signal_statistics():
    n = 1_000_000
    y = rng.generate_user_signal(n, 2.5, master_seed=11)
    assert abs(np.mean(np.abs(y) ** 2) / 2.5 - 1) < 0.01
    rho = np.corrcoef(y.real, y.imag)[0, 1]
    assert abs(rho) < 3 / np.sqrt(n)


@pytest.mark.parametrize("backend", ["numpy", "numba"])
def test_user_signal_independent_of_workers(backend):
    if backend == "numba" and not NUMBA_AVAILABLE:
        pytest.skip("numba missing")
    a = rng.generate_user_signal(50_000, 1.0, 99, workers=1, backend=backend)
    b = rng.generate_user_signal(50_000, 1.0, 99, workers=8, chunk=4096, backend=backend)
    assert a.tobytes() == b.tobytes()


def test_user_signal_random_access():
    full = rng.generate_user_signal(1000, 1.0, 5)
    tail = rng.generate_user_signal(300, 1.0, 5, start=700)
    assert np.array_equal(full[700:], tail)


@pytest.mark.skipif(not NUMBA_AVAILABLE, reason="numba missing")
def test_backends_agree_to_rounding():
    a = rng.generate_user_signal(10_000, 1.0, 4, backend="numba")
    b = rng.generate_user_signal(10_000, 1.0, 4, backend="numpy")
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-14)


def test_seeds_and_roles_give_different_streams():
    a = rng.uniforms(1, rng.ROLE_SIGNAL, np.arange(100))
    b = rng.uniforms(2, rng.ROLE_SIGNAL, np.arange(100))
    c = rng.uniforms(1, rng.ROLE_DITHER, np.arange(100))
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_bad_seed():
    with pytest.raises(ValueError):
        rng.split_key(-1, 1)
    with pytest.raises(ValueError):
        rng.generate_user_signal(0, 1.0, 1)
