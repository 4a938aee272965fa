"""Timing table: compiled vs numpy kernels, and fast vs direct transforms.

    python3 bench/bench_kernels.py [--repeat 3] [--lam 1.0]
"""

import argparse
import time

import numpy as np

from ttfa import fock, kernels, modspace, twist
from ttfa.fixtures import default_base_grid, gaussian_mixture


def best(fn, repeat):
    ts = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t0)
    return min(ts)


def with_backend(name, fn, repeat):
    prev = kernels.use_backend(name)
    try:
        return best(fn, repeat)
    finally:
        kernels.use_backend(prev)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--lam", type=float, default=1.0)
    args = ap.parse_args()
    lam, rep = args.lam, args.repeat

    base = default_base_grid(1)
    f, g = gaussian_mixture(base, 1), gaussian_mixture(base, 2)
    small = modspace.default_phase_grid(base, half_width=2.0)
    z = np.array([[0.3 + 0.2j, -0.5 + 0.4j], [1.0 - 0.5j, 0.2 + 0.6j]] * 8)
    r = np.random.default_rng(0)
    fa = r.normal(size=(8, 48, 80)) + 1j * r.normal(size=(8, 48, 80))
    fb = r.normal(size=(8, 120, 80)) + 1j * r.normal(size=(8, 120, 80))

    cases = [
        ("twisted convolution, direct", lambda: twist.twisted_convolve(lam, f, g, "direct")),
        ("Bargmann at 16 points", lambda: fock.bargmann_points(lam, f, z)),
        (f"twisted STFT direct, {small.shape[0]}^4", lambda: modspace.twisted_stft(lam, f, g, small, "direct")),
        ("pair_fold 8 x 25 x 48 x 40", lambda: kernels.pair_fold(fa, fb, 48, 2, 25, 2, 40)),
    ]
    print(f"kernels ({'compiled extension built' if kernels.compiled_available() else 'compiled extension missing'})")
    print(f"{'case':<36} {'compiled s':>11} {'python s':>10} {'ratio':>7}")
    for name, fn in cases:
        tp = with_backend("python", fn, rep)
        if kernels.compiled_available():
            tc = with_backend("compiled", fn, rep)
            print(f"{name:<36} {tc:>11.4f} {tp:>10.4f} {tp / tc:>6.1f}x")
        else:
            print(f"{name:<36} {'-':>11} {tp:>10.4f} {'-':>7}")

    print()
    print(f"fast vs direct at lam = {lam:g} (active backend: {kernels.backend()})")
    print(f"{'transform':<36} {'fast s':>11} {'direct s':>10} {'ratio':>7} {'rel err':>9}")
    pg = modspace.default_phase_grid(base, lam)
    pairs = [
        ("twisted convolution", lambda m: twist.twisted_convolve(lam, f, g, m).values, rep),
        (f"twisted STFT, {pg.shape[0]}^4", lambda m: modspace.twisted_stft(lam, f, g, pg, m).values, 1),
    ]
    for name, fn, k in pairs:
        a, b = fn("fast"), fn("direct")
        tf = best(lambda: fn("fast"), rep)
        td = best(lambda: fn("direct"), k)
        err = np.abs(a - b).max() / np.abs(b).max()
        print(f"{name:<36} {tf:>11.4f} {td:>10.4f} {td / tf:>6.1f}x {err:>9.1e}")


if __name__ == "__main__":
    main()
