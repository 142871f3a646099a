"""Compare the compiled and pure-Python XOR-gather kernels, then time a full retrieval.

Run with ``python benchmarks/bench_kernels.py``. The end-to-end timings use
whichever backend ``scpir.kernels`` selected; set ``SCPIR_PURE_PYTHON=1`` to
time the fallback.
"""

import argparse
import timeit

import numpy as np

from scpir import MessageLibrary, StorageProfile, build_scheme, kernels, provision, retrieve
from scpir import _kernels_py

try:
    from scpir import _kernels
except ImportError:
    _kernels = None


def make_problem(rows, width, groups, per_group, seed=0):
    rng = np.random.default_rng(seed)
    table = rng.integers(0, 2, size=(rows, width), dtype=np.uint8)
    indptr = np.arange(0, groups * per_group + 1, per_group, dtype=np.int64)
    indices = rng.integers(0, rows, size=groups * per_group).astype(np.int64)
    return table, indptr, indices


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_gather(repeat):
    print("xor_gather (best of %d)" % repeat)
    print(f"{'rows':>7} {'width':>6} {'groups':>7} {'python ms':>10} {'compiled ms':>12} {'speedup':>8}")
    for rows, width, groups, per_group in [(64, 8, 32, 2), (4096, 16, 2048, 3), (20000, 64, 10000, 4)]:
        args = make_problem(rows, width, groups, per_group)
        t_py = best_of(lambda: _kernels_py.xor_gather(*args), repeat)
        if _kernels is None:
            print(f"{rows:>7} {width:>6} {groups:>7} {t_py * 1e3:>10.3f} {'n/a':>12} {'':>8}")
            continue
        ref = _kernels_py.xor_gather(*args)
        assert np.array_equal(ref, _kernels.xor_gather(*args))
        t_c = best_of(lambda: _kernels.xor_gather(*args), repeat)
        print(f"{rows:>7} {width:>6} {groups:>7} {t_py * 1e3:>10.3f} {t_c * 1e3:>12.3f} {t_py / t_c:>7.1f}x")


def bench_retrieve(repeat):
    print(f"\nend-to-end retrieve (backend: {kernels.BACKEND}, best of {repeat})")
    cases = {
        "N=4 K=3 disjoint, L=16*512": (StorageProfile.uniform(4, "1/2"), 3, 16 * 512, "disjoint"),
        "t=4, K=4, L=256*64": (StorageProfile.uniform(4, 1), 4, 256 * 64, "auto"),
        "non-integer, L=540*8": (StorageProfile(["1/5", "1/5", "2/5", "3/5", "1"]), 2, 540 * 8, "auto"),
    }
    for name, (profile, K, L, placement) in cases.items():
        scheme = build_scheme(profile, K, L, placement=placement)
        lib = MessageLibrary.random(K, L, 0)
        nodes = provision(scheme, lib)
        t = best_of(lambda: retrieve(scheme, nodes, 1, 0), repeat)
        print(f"  {name:<24} {t * 1e3:8.2f} ms")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    bench_gather(args.repeat)
    bench_retrieve(args.repeat)


if __name__ == "__main__":
    main()
