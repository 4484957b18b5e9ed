"""Time the numba kernels against the pure-numpy fallback.

Run with ``python benchmarks/bench_kernels.py``.  Both implementations are
imported directly, so the ``PMICOPULA_BACKEND`` setting does not matter
here.  Each kernel is warmed up once (JIT compilation) and then timed as
the best of several repeats.
"""
import argparse
import timeit

import numpy as np

from pmicopula._kernels import numba_impl, numpy_impl


def cases(scale: int):
    rng = np.random.default_rng(0)
    m = 20_000 * scale
    h, k = rng.standard_normal(m), rng.standard_normal(m)
    n = min(2_000 * scale, 5_000)  # the (n+1)^2 count table bounds memory
    r1, r2 = rng.permutation(n) + 1, rng.permutation(n) + 1
    a = rng.random(m) * 0.5
    b = a + rng.random(m) * 0.5
    c = rng.random(m) * 0.5
    d = c + rng.random(m) * 0.5
    nodes = rng.random(50_000 * scale)
    cols = np.floor(n * nodes).astype(np.int64)
    w = rng.random(nodes.size)
    fr = n * nodes - cols
    return {
        f"bvn_cdf (m={m})": lambda impl: impl.bvn_cdf(h, k, 0.6),
        f"count_table (n={n})": lambda impl: impl.count_table(r1, r2, n),
        f"v_rect_integrals (m={m})": lambda impl: impl.v_rect_integrals(a, b, c, d),
        f"weighted_column_sums (k={nodes.size})":
            lambda impl: impl.weighted_column_sums(cols, w, fr, n + 1),
    }


def _parts(out):
    return out if isinstance(out, tuple) else (out,)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--scale", type=int, default=1, help="problem size multiplier")
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()
    if numba_impl is None:
        raise SystemExit("numba is not available; nothing to compare")
    print(f"{'kernel':40s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s}")
    for name, fn in cases(args.scale).items():
        ref, fast = fn(numpy_impl), fn(numba_impl)  # warm-up and agreement check
        for x, y in zip(_parts(ref), _parts(fast)):
            np.testing.assert_allclose(x, y, rtol=1e-9, atol=1e-12)
        t_np = min(timeit.repeat(lambda: fn(numpy_impl), number=1, repeat=args.repeat))
        t_nb = min(timeit.repeat(lambda: fn(numba_impl), number=1, repeat=args.repeat))
        print(f"{name:40s} {1e3 * t_np:11.2f} {1e3 * t_nb:11.2f} {t_np / t_nb:7.1f}x")


if __name__ == "__main__":
    main()
