"""Fused transmit chain kernels: signal draw, matched precoding, dither,
quantization and line-of-sight aggregation for a block of trials.

Each kernel returns the block's error energy, signal energy and the number
of saturated real DAC conversions. The numba kernel loops sample by sample;
the numpy kernel materialises ``rows x antennas`` tiles.
"""
import numpy as np

from ._backend import jit, resolve
from .dither import DitherFamily
from .rng import (ROLE_DITHER, ROLE_SIGNAL, _S11, _TO_UNIT, _philox_scalar, antenna_uniforms,
                  complex_normal, uniforms)

FAMILY_CODE = {
    DitherFamily.NONE: 0,
    DitherFamily.UNIFORM: 1,
    DitherFamily.GAUSSIAN: 2,
    DitherFamily.TRIANGULAR: 3,
}

# Elements per numpy tile; bounds peak memory of the fallback path.
_TILE = 1 << 16


def _chain_block_loop(seed, t0, count, steer_re, steer_im, step, top, family, param,
                      signal_power):
    k0 = np.uint64(seed)
    k_sig = np.uint64(ROLE_SIGNAL)
    k_dit = np.uint64(ROLE_DITHER)
    zero = np.uint64(0)
    one = np.uint64(1)
    d2 = d3 = e0 = e1 = e2 = e3 = zero
    v2 = v3 = 0.0
    antennas = steer_re.shape[0]
    err_energy = 0.0
    sig_energy = 0.0
    clips = 0
    for i in range(count):
        t = np.uint64(t0 + i)
        w0, w1, _, _ = _philox_scalar(t, zero, zero, zero, k0, k_sig)
        u0 = (w0 >> _S11) * _TO_UNIT
        u1 = (w1 >> _S11) * _TO_UNIT
        radius = np.sqrt(-signal_power * np.log1p(-u0))
        theta = 2.0 * np.pi * u1
        y_re = radius * np.cos(theta)
        y_im = radius * np.sin(theta)
        ym_re = y_re / antennas
        ym_im = y_im / antennas
        acc_re = 0.0
        acc_im = 0.0
        for m in range(antennas):
            c_re = steer_re[m]
            c_im = steer_im[m]
            x_re = c_re * ym_re + c_im * ym_im
            x_im = c_re * ym_im - c_im * ym_re
            if family != 0:
                if (m & 1) == 0:
                    slot = np.uint64(m >> 1)
                    d0, d1, d2, d3 = _philox_scalar(t, slot, zero, zero, k0, k_dit)
                    if family == 3:
                        e0, e1, e2, e3 = _philox_scalar(t, slot, one, zero, k0, k_dit)
                    v0 = (d0 >> _S11) * _TO_UNIT
                    v1 = (d1 >> _S11) * _TO_UNIT
                    if family == 3:
                        v2 = (e0 >> _S11) * _TO_UNIT
                        v3 = (e1 >> _S11) * _TO_UNIT
                else:
                    v0 = (d2 >> _S11) * _TO_UNIT
                    v1 = (d3 >> _S11) * _TO_UNIT
                    if family == 3:
                        v2 = (e2 >> _S11) * _TO_UNIT
                        v3 = (e3 >> _S11) * _TO_UNIT
                if family == 1:
                    x_re += (v0 - 0.5) * param
                    x_im += (v1 - 0.5) * param
                elif family == 2:
                    r = param * np.sqrt(-2.0 * np.log1p(-v0))
                    x_re += r * np.cos(2.0 * np.pi * v1)
                    x_im += r * np.sin(2.0 * np.pi * v1)
                else:
                    x_re += (v0 + v2 - 1.0) * param
                    x_im += (v1 + v3 - 1.0) * param
            k = np.floor(abs(x_re) / step)
            if k > top:
                k = top
                clips += 1
            q_re = (k + 0.5) * step
            if x_re < 0:
                q_re = -q_re
            k = np.floor(abs(x_im) / step)
            if k > top:
                k = top
                clips += 1
            q_im = (k + 0.5) * step
            if x_im < 0:
                q_im = -q_im
            acc_re += c_re * q_re - c_im * q_im
            acc_im += c_re * q_im + c_im * q_re
        e_re = acc_re - y_re
        e_im = acc_im - y_im
        err_energy += e_re * e_re + e_im * e_im
        sig_energy += y_re * y_re + y_im * y_im
    return err_energy, sig_energy, clips


_chain_block_numba = jit(_chain_block_loop)


def dither_tile(seed, trials, antennas, family, param):
    """Complex dither for every (trial, antenna), as the numba kernel draws it."""
    u = antenna_uniforms(seed, ROLE_DITHER, trials, antennas)
    if family == 1:
        return (u[..., 0] - 0.5) * param + 1j * ((u[..., 1] - 0.5) * param)
    if family == 2:
        r = param * np.sqrt(-2.0 * np.log1p(-u[..., 0]))
        return r * np.cos(2.0 * np.pi * u[..., 1]) + 1j * (r * np.sin(2.0 * np.pi * u[..., 1]))
    v = antenna_uniforms(seed, ROLE_DITHER, trials, antennas, lane=1)
    return ((u[..., 0] + v[..., 0] - 1.0) * param
            + 1j * ((u[..., 1] + v[..., 1] - 1.0) * param))


def _quantize_tile(x, step, top):
    k = np.floor(np.abs(x) / step)
    clipped = k > top
    k = np.minimum(k, top)
    out = (k + 0.5) * step
    return np.where(x < 0, -out, out), np.count_nonzero(clipped)


def _chain_block_numpy(seed, t0, count, steer_re, steer_im, step, top, family, param,
                       signal_power):
    antennas = steer_re.shape[0]
    steer = steer_re + 1j * steer_im
    antenna_idx = np.arange(antennas, dtype=np.uint64)
    rows = max(1, _TILE // antennas)
    err_energy = 0.0
    sig_energy = 0.0
    clips = 0
    for r0 in range(0, count, rows):
        t = np.arange(t0 + r0, t0 + min(count, r0 + rows), dtype=np.uint64)
        u = uniforms(seed, ROLE_SIGNAL, t)
        y = complex_normal(u[:, 0], u[:, 1], signal_power)
        x = np.conj(steer)[None, :] * (y / antennas)[:, None]
        if family != 0:
            x = x + dither_tile(seed, t[:, None], antenna_idx[None, :], family, param)
        q_re, c_re = _quantize_tile(x.real, step, top)
        q_im, c_im = _quantize_tile(x.imag, step, top)
        clips += c_re + c_im
        acc = np.sum(steer[None, :] * (q_re + 1j * q_im), axis=1)
        err_energy += float(np.sum(np.abs(acc - y) ** 2))
        sig_energy += float(np.sum(np.abs(y) ** 2))
    return err_energy, sig_energy, clips


def chain_block(seed, t0, count, steer, step, top, family, param, signal_power,
                backend=None):
    """Run trials ``t0 .. t0+count-1`` of the transmit chain.

    ``steer`` is the user's steering vector, ``top`` the quantizer's largest
    code index and ``family``/``param`` the dither in absolute units.
    """
    steer = np.asarray(steer, dtype=complex)
    steer_re = np.ascontiguousarray(steer.real)
    steer_im = np.ascontiguousarray(steer.imag)
    code = FAMILY_CODE[DitherFamily(family)]
    args = (int(seed), int(t0), int(count), steer_re, steer_im, float(step), float(top),
            code, float(param), float(signal_power))
    if resolve(backend) == "numba":
        err, sig, clips = _chain_block_numba(*args)
    else:
        err, sig, clips = _chain_block_numpy(*args)
    return float(err), float(sig), int(clips)
