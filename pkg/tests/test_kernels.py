import numpy as np
import pytest

from ditherdac import kernels
from ditherdac._backend import NUMBA_AVAILABLE
from ditherdac.channel import ChannelScene, matched_precode, receive
from ditherdac.harness import calibrate_step
from ditherdac.quantizer import ClipCounter, QuantizerConfig, quantize_complex
from ditherdac.rng import generate_user_signal

BACKENDS = ["numpy"] + (["numba"] if NUMBA_AVAILABLE else [])


def reference_chain(seed, t0, count, scene, cfg, family, param, power):
    """The same trials assembled from the public, array-at-a-time API."""
    y = generate_user_signal(count, power, seed, start=t0, backend="numpy")
    x = matched_precode(y, scene)
    if family != "none":
        t = np.arange(t0, t0 + count, dtype=np.uint64)[:, None]
        m = np.arange(scene.antennas, dtype=np.uint64)[None, :]
        x = x + kernels.dither_tile(seed, t, m, kernels.FAMILY_CODE[family], param)
    counter = ClipCounter()
    out = receive(scene, 0, quantize_complex(x, cfg, counter))
    return np.sum(np.abs(out - y) ** 2), np.sum(np.abs(y) ** 2), counter.count


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("family", ["none", "uniform", "gaussian", "triangular"])
@pytest.mark.parametrize("alpha", [0.0, 0.37, -np.pi / 2])
def test_kernel_matches_reference(backend, family, alpha):
    m, bits, power = 13, 4, 1.7
    scene = ChannelScene(m, (alpha,))
    step = calibrate_step(bits, 10 ** 1.5, power / m ** 2)
    cfg = QuantizerConfig(bits, step)
    param = 0.0 if family == "none" else step
    ref = reference_chain(21, 100, 300, scene, cfg, family, param, power)
    got = kernels.chain_block(21, 100, 300, scene.steering_matrix()[0], step, cfg.top_index,
                              family, param, power, backend=backend)
    assert got[0] == pytest.approx(ref[0], rel=1e-10)
    assert got[1] == pytest.approx(ref[1], rel=1e-12)
    assert got[2] == ref[2]


@pytest.mark.parametrize("backend", BACKENDS)
def test_kernel_counts_clips(backend):
    m, bits = 4, 2
    scene = ChannelScene(m)
    step = calibrate_step(bits, 1.0, 1.0 / m ** 2)  # 0 dB: clips constantly
    cfg = QuantizerConfig(bits, step)
    ref = reference_chain(3, 0, 500, scene, cfg, "uniform", step, 1.0)
    got = kernels.chain_block(3, 0, 500, scene.steering_matrix()[0], step, cfg.top_index,
                              "uniform", step, 1.0, backend=backend)
    assert got[2] == ref[2] > 0


@pytest.mark.skipif(not NUMBA_AVAILABLE, reason="numba missing")
def test_backends_agree():
    steer = ChannelScene(257, (0.2,)).steering_matrix()[0]
    args = (5, 0, 2048, steer, 0.01, 31, "uniform", 0.01, 1.0)
    a = kernels.chain_block(*args, backend="numba")
    b = kernels.chain_block(*args, backend="numpy")
    assert a[0] == pytest.approx(b[0], rel=1e-10)
    assert a[2] == b[2]


@pytest.mark.parametrize("backend", BACKENDS)
def test_kernel_repeatable(backend):
    steer = ChannelScene(50, (0.1,)).steering_matrix()[0]
    args = (8, 77, 333, steer, 0.02, 31, "triangular", 0.02, 1.0)
    assert (kernels.chain_block(*args, backend=backend)
            == kernels.chain_block(*args, backend=backend))
