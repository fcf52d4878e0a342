"""Compare the numba and pure-numpy backends on the hot kernels.

    python3 benchmarks/bench_backends.py [--antennas 1000] [--trials 4096] [--repeat 3]

Reports the best-of-N wall time per kernel, the cost per antenna-sample and
the speedup, and checks that both backends agree on the error energy.
"""
import argparse
import time

import numpy as np

from ditherdac import kernels
from ditherdac._backend import NUMBA_AVAILABLE
from ditherdac.channel import ChannelScene
from ditherdac.harness import calibrate_step
from ditherdac.rng import generate_user_signal


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--antennas", type=int, default=1000)
    ap.add_argument("--trials", type=int, default=4096)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)
    if not NUMBA_AVAILABLE:
        raise SystemExit("numba is not installed; nothing to compare")

    m, t = args.antennas, args.trials
    steer = ChannelScene(m, (0.3,)).steering_matrix()[0]
    step = calibrate_step(6, 10 ** 1.5, 1.0 / m ** 2)
    top = 2 ** 5 - 1

    cases = {}
    for family in ("none", "uniform", "gaussian", "triangular"):
        param = 0.0 if family == "none" else step

        def run(backend, family=family, param=param):
            return kernels.chain_block(args.seed, 0, t, steer, step, top, family, param,
                                       1.0, backend=backend)
        cases[f"chain/{family}"] = (run, m * t)

    def signal(backend):
        return generate_user_signal(t * 64, 1.0, args.seed, backend=backend)
    cases["signal"] = (signal, t * 64)

    for run, _ in cases.values():  # compile outside the timings
        run("numba")

    print(f"antennas={m} trials={t} repeat={args.repeat}")
    print(f"{'kernel':<18}{'numba s':>10}{'numpy s':>10}{'numba ns/el':>13}"
          f"{'numpy ns/el':>13}{'speedup':>9}  agree")
    for name, (run, elements) in cases.items():
        t_nb, r_nb = best_of(lambda: run("numba"), args.repeat)
        t_np, r_np = best_of(lambda: run("numpy"), args.repeat)
        if isinstance(r_nb, tuple):
            agree = np.isclose(r_nb[0], r_np[0], rtol=1e-10) and r_nb[2] == r_np[2]
        else:
            agree = np.allclose(r_nb, r_np, rtol=0, atol=1e-14)
        print(f"{name:<18}{t_nb:>10.4f}{t_np:>10.4f}{1e9 * t_nb / elements:>13.1f}"
              f"{1e9 * t_np / elements:>13.1f}{t_np / t_nb:>9.1f}  {bool(agree)}")


if __name__ == "__main__":
    main()
