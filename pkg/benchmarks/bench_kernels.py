"""Benchmark: compiled extension kernels vs the pure numpy fallback.

Run:  python benchmarks/bench_kernels.py
"""

import time

import numpy as np

import mwbump._kernels_py as kpy
from mwbump.young import YoungFn, associate

try:
    import mwbump._kernels as kc
except ImportError:
    kc = None


def timeit(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def row(name, args, repeat=5):
    tp = timeit(getattr(kpy, name), *args, repeat=repeat)
    if kc is None:
        print(f"{name:14s} python {tp * 1e3:9.2f} ms   compiled: n/a")
        return
    tc = timeit(getattr(kc, name), *args, repeat=repeat)
    print(f"{name:14s} python {tp * 1e3:9.2f} ms   "
          f"compiled {tc * 1e3:9.2f} ms   speedup {tp / tc:6.1f}x")


def main():
    rng = np.random.default_rng(0)
    print(f"compiled extension available: {kc is not None}\n")

    plog = YoungFn.power_log(2, 1).kernel_params
    grid = associate(YoungFn.power_log(2, 1)).kernel_params
    V = rng.uniform(0, 5, (512, 64))
    w = np.full(64, 1 / 64)
    row("lux_rows", (V, w, plog))
    row("lux_rows", (V, w, grid))

    k = np.arange(512) + 0.5
    z = k / 512
    phi = 2 * np.pi * k * 0.618
    dirs = np.stack([np.sqrt(1 - z**2) * np.cos(phi),
                     np.sqrt(1 - z**2) * np.sin(phi), z], 1)
    pts = dirs / (np.abs(dirs) ** 4).sum(1)[:, None] ** 0.25
    row("khachiyan_mvee", (pts, 1e-7, 100000))

    A = rng.normal(size=(256, 2, 2))
    A = A + A.transpose(0, 2, 1) + 4 * np.eye(2)
    B = rng.normal(size=(256, 2, 2))
    B = B + B.transpose(0, 2, 1) + 4 * np.eye(2)
    row("pair_opnorm", (A, B))
    A3 = rng.normal(size=(128, 3, 3))
    A3 = A3 + A3.transpose(0, 2, 1) + 5 * np.eye(3)
    row("pair_opnorm", (A3, A3))
    G = rng.normal(size=(256, 2))
    row("pair_vecnorm", (A, G))

    S = rng.normal(size=(4096, 3, 3))
    S = np.einsum("bij,bkj->bik", S, S) + np.eye(3)
    row("eigh_batch", (S,))


if __name__ == "__main__":
    main()
