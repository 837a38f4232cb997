"""Time the numba kernels against their pure-numpy twins on sweep-sized inputs.

    python3 benchmarks/bench_kernels.py [--trials 4096] [--repeat 5]

Both versions are imported directly, so ``FADEKEY_BACKEND`` does not matter
here. The first numba call (compilation or cache load) is excluded.
"""

import argparse
import math
import time

import numpy as np

from fadekey import kernels, special_math
from fadekey.fading import draw_angles


def best_of(func, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = func()
        times.append(time.perf_counter() - t0)
    return min(times), out


def sweep_inputs(rng, trials, n_paths, side):
    main = np.exp(1j * rng.uniform(-math.pi, math.pi, (trials, n_paths)))
    pointing = 0.002 * rng.standard_normal((trials, n_paths))
    beta = rng.uniform(-math.pi, math.pi, (side, trials, n_paths))
    phasor = np.exp(1j * rng.uniform(-math.pi, math.pi, (side, trials, n_paths)))
    return main, pointing, beta, phasor


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--trials", type=int, default=4096, help="trials per block")
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    rng = np.random.default_rng(0)

    cases = []
    for n_paths in (6, 20):
        ins = sweep_inputs(rng, args.trials, n_paths, n_paths - 1)
        call = lambda f, ins=ins, n=n_paths: f(*ins, n, math.pi * 1.0 / 0.1, False)
        cases.append((f"eve_envelope N={n_paths}", lambda c=call: c(kernels.eve_envelope_numba),
                      lambda c=call: c(kernels.eve_envelope_numpy)))

    aoa, phase = draw_angles(rng, (1000, 6), "clarke")
    cases.append(("envelope_series 1000x1100", lambda: kernels.envelope_series_numba(aoa, phase, 0.1, 1100),
                  lambda: kernels.envelope_series_numpy(aoa, phase, 0.1, 1100)))

    xs = rng.uniform(-50, 50, 1_000_000)
    cases.append(("bessel j0 1e6", lambda: special_math._map_numba(0, xs), lambda: special_math.j0_numpy(xs)))
    cases.append(("jinc 1e6", lambda: special_math._map_numba(2, xs), lambda: special_math.jinc_numpy(xs)))

    print(f"{'kernel':28} {'numba ms':>10} {'numpy ms':>10} {'speedup':>8} {'max |diff|':>11}")
    for name, fast, slow in cases:
        fast()  # compile / load cache
        t_fast, a = best_of(fast, args.repeat)
        t_slow, b = best_of(slow, args.repeat)
        diff = float(np.max(np.abs(a - b)))
        print(f"{name:28} {1e3 * t_fast:10.2f} {1e3 * t_slow:10.2f} {t_slow / t_fast:8.1f} {diff:11.2e}")


if __name__ == "__main__":
    main()
