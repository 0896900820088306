"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from gmfading import _pykernels
from gmfading.linalg import complex_normal

try:
    from gmfading import _ckernels
except ImportError:
    _ckernels = None


def cases(rng):
    G = complex_normal(rng, (200_000, 2, 2))
    Z = complex_normal(rng, (200_000, 2))
    T = complex_normal(rng, (200_000, 2))
    Q = np.eye(2, dtype=complex)
    A = np.eye(2) + G @ G.conj().transpose(0, 2, 1)
    inn = complex_normal(rng, (256, 512, 2, 2))
    book = complex_normal(rng, (4096, 128, 2))
    Gb, Zb = G[:128], Z[:128]
    return {
        "gauss_markov 256x512 2x2": lambda m: m.gauss_markov(inn, 0.9),
        "logdet_batch 200k 2x2": lambda m: m.logdet_batch(A),
        "output_terms 200k 2x2": lambda m: m.output_terms(G, Z, Q, 1.0),
        "residual_energy 200k 2x2": lambda m: m.residual_energy(G, T, Z),
        "codebook_residuals 4096x128": lambda m: m.codebook_residuals(Gb, Zb, book),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled extension not built; run pip install -e . --no-build-isolation")
        return
    print(f"{'kernel':32s} {'numpy ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for name, fn in cases(np.random.default_rng(0)).items():
        py = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=args.repeat)) * 1e3
        cy = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:32s} {py:10.1f} {cy:10.1f} {py / cy:7.1f}x")


if __name__ == "__main__":
    main()
