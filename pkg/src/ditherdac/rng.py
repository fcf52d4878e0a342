"""Counter-based random streams for the Monte Carlo harness.

Every random number is a pure function of ``(master_seed, role, trial,
antenna)``: Philox4x64-10 keyed by ``(master_seed, role)`` is evaluated at
counter ``(trial, antenna // 2, lane, 0)``. One block yields four words;
even antennas take words 0-1 and odd antennas words 2-3. The user signal
uses words 0-1 of ``(trial, 0, 0, 0)`` under its own role key. Trials can
therefore be split across any number of workers, in any order, and still
draw exactly the same numbers.

The block function is bit-compatible with :class:`numpy.random.Philox`; a
numpy Philox whose counter is one below ours produces the same four words on
its first draw (numpy increments before generating).
"""
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ._backend import jit, resolve

ROLE_SIGNAL = 1
ROLE_DITHER = 2

_MASK32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_S11 = np.uint64(11)
_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_TO_UNIT = 2.0 ** -53
_U64 = (1 << 64) - 1


def _philox_rounds(c0, c1, c2, c3, k0, k1):
    # mulhi via 32-bit limbs is written out inline so the same source
    # compiles under numba and runs on uint64 arrays under numpy.
    m0_lo = _M0 & _MASK32
    m0_hi = _M0 >> _S32
    m1_lo = _M1 & _MASK32
    m1_hi = _M1 >> _S32
    for r in range(10):
        if r > 0:
            k0 = k0 + _W0
            k1 = k1 + _W1
        b_lo = c0 & _MASK32
        b_hi = c0 >> _S32
        p1 = m0_lo * b_hi
        p2 = m0_hi * b_lo
        mid = ((m0_lo * b_lo) >> _S32) + (p1 & _MASK32) + (p2 & _MASK32)
        hi0 = m0_hi * b_hi + (p1 >> _S32) + (p2 >> _S32) + (mid >> _S32)
        lo0 = _M0 * c0
        b_lo = c2 & _MASK32
        b_hi = c2 >> _S32
        p1 = m1_lo * b_hi
        p2 = m1_hi * b_lo
        mid = ((m1_lo * b_lo) >> _S32) + (p1 & _MASK32) + (p2 & _MASK32)
        hi1 = m1_hi * b_hi + (p1 >> _S32) + (p2 >> _S32) + (mid >> _S32)
        lo1 = _M1 * c2
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


_philox_scalar = jit(_philox_rounds)


def split_key(master_seed, role):
    if not 0 <= master_seed <= _U64:
        raise ValueError("master_seed must fit in an unsigned 64-bit integer")
    return np.uint64(master_seed), np.uint64(role)


def philox4x64(counter, key):
    """Evaluate Philox4x64-10 on an array of counters.

    ``counter`` has shape ``(..., 4)`` and ``key`` shape ``(2,)``; returns
    uint64 words of shape ``(..., 4)``.
    """
    counter = np.asarray(counter, dtype=np.uint64)
    key = np.asarray(key, dtype=np.uint64)
    c = [np.atleast_1d(counter[..., i]).copy() for i in range(4)]
    k0 = np.full(c[0].shape, key[0], dtype=np.uint64)
    k1 = np.full(c[0].shape, key[1], dtype=np.uint64)
    out = np.stack(_philox_rounds(*c, k0, k1), axis=-1)
    return out.reshape(counter.shape)


def to_unit(words):
    """Map uint64 words to doubles on [0, 1) using the top 53 bits."""
    return (np.asarray(words, dtype=np.uint64) >> _S11) * _TO_UNIT


def uniforms(master_seed, role, trials, slots=0, lane=0):
    """The four U[0, 1) doubles of block ``(trial, slot, lane, 0)``."""
    k0, k1 = split_key(master_seed, role)
    t, m = np.broadcast_arrays(np.asarray(trials, dtype=np.uint64),
                               np.asarray(slots, dtype=np.uint64))
    zero = np.zeros(t.shape, dtype=np.uint64)
    counter = np.stack([t, m, np.full(t.shape, lane, dtype=np.uint64), zero], axis=-1)
    return to_unit(philox4x64(counter, (k0, k1)))


def antenna_uniforms(master_seed, role, trials, antennas, lane=0):
    """Two U[0, 1) doubles per (trial, antenna), shape ``(..., 2)``."""
    antennas = np.asarray(antennas, dtype=np.uint64)
    block = uniforms(master_seed, role, trials, antennas >> np.uint64(1), lane)
    odd = (antennas & np.uint64(1)).astype(bool)
    odd = np.broadcast_to(odd, block.shape[:-1])[..., None]
    return np.where(odd, block[..., 2:], block[..., :2])


def complex_normal(u0, u1, power):
    """Box-Muller: circular complex Gaussian with E|z|^2 = power."""
    radius = np.sqrt(-power * np.log1p(-u0))
    theta = 2.0 * np.pi * u1
    return radius * np.cos(theta) + 1j * (radius * np.sin(theta))


def _signal_numba(master_seed, start, count, power, out):
    k0 = np.uint64(master_seed)
    k1 = np.uint64(ROLE_SIGNAL)
    zero = np.uint64(0)
    for i in range(count):
        w0, w1, _, _ = _philox_scalar(np.uint64(start + i), zero, zero, zero, k0, k1)
        u0 = (w0 >> _S11) * _TO_UNIT
        u1 = (w1 >> _S11) * _TO_UNIT
        radius = np.sqrt(-power * np.log1p(-u0))
        theta = 2.0 * np.pi * u1
        out[i] = complex(radius * np.cos(theta), radius * np.sin(theta))


_signal_numba_jit = jit(_signal_numba)


def _signal_chunk(master_seed, start, count, power, backend):
    if backend == "numba":
        out = np.empty(count, dtype=np.complex128)
        _signal_numba_jit(master_seed, start, count, power, out)
        return out
    u = uniforms(master_seed, ROLE_SIGNAL, np.arange(start, start + count, dtype=np.uint64))
    return complex_normal(u[:, 0], u[:, 1], power)


def generate_user_signal(count, signal_power, master_seed, start=0, workers=1,
                         chunk=65536, backend=None):
    """Draw the Gaussian user signal for trials ``start .. start+count-1``.

    The output depends only on the seed and the trial indices, never on
    ``workers`` or ``chunk``.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if signal_power <= 0:
        raise ValueError("signal_power must be > 0")
    backend = resolve(backend)
    starts = range(start, start + count, chunk)
    jobs = [(s, min(chunk, start + count - s)) for s in starts]
    if workers <= 1 or len(jobs) == 1:
        parts = [_signal_chunk(master_seed, s, n, signal_power, backend) for s, n in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(
                lambda job: _signal_chunk(master_seed, job[0], job[1], signal_power, backend),
                jobs))
    return np.concatenate(parts)
