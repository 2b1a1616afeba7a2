"""Time the numba kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--repeat N]

Both paths must return the same integers; the script stops if they do not.
"""

import argparse
import time
import warnings

import numpy as np

from dimpoly import _kernels
from dimpoly.diffring import parse_poly
from dimpoly.extdim import (ExtensionSpec, WindowSpec, _classify_codes, _relation_dim, spec_charset,
                            window_gammas)
from dimpoly.lattice import INT, NAT, LatticeSet, Partition, _window_blocks, rho_embed

FOUR_TERM = "a1^3 y1 + a1^-3 y1 + a2^2 y1 + a3^1 y1"


def best_of(fn, repeat):
    out, best = None, float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return out, best


def bench_undominated(repeat):
    part = Partition.from_sizes([1, 1, 1])
    A = LatticeSet([(1, -2, 3), (-2, 1, 0), (0, 3, -1), (2, 2, 2)], INT)
    B, part2 = rho_embed(A, part)
    r = [24, 24, 24]
    rows, offs, total = _window_blocks(part2, r, [0] * part2.p, NAT)
    pts = np.array(B.points, dtype=np.int64)
    return total, lambda nb: _kernels.count_undominated(rows, offs, pts, 0, use_numba=nb)


def bench_classify(repeat):
    part = Partition.from_sizes([1, 1, 1])
    spec = ExtensionSpec(part, 1, (parse_poly(FOUR_TERM, 3, 1),))
    cs = spec_charset(spec)
    w = WindowSpec.of((14, 14, 14), (3, 3, 3))
    G = window_gammas(part, w)
    return len(G), lambda nb: int(np.asarray(_classify_codes(cs, spec, w, 1, G, use_numba=nb)).sum())


def bench_rank(repeat):
    part = Partition.from_sizes([1, 1, 1])
    spec = ExtensionSpec(part, 2, (parse_poly(FOUR_TERM, 3, 2), parse_poly("y2 - a1^1 y1", 3, 2)))
    w = WindowSpec.of((6, 6, 6), (2, 2, 2))
    return None, lambda nb: _relation_dim(spec, w, 2, _kernels.PRIME_A, False, nb, None)[0]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")
    warnings.simplefilter("ignore")
    print(f"{'kernel':<22}{'size':>10}{'numba s':>12}{'numpy s':>12}{'speedup':>10}")
    for name, setup in (("count_undominated", bench_undominated), ("classify_window", bench_classify),
                        ("banded_rank", bench_rank)):
        size, fn = setup(args.repeat)
        fn(True)  # compile outside the timing
        a, tnb = best_of(lambda: fn(True), args.repeat)
        b, tnp = best_of(lambda: fn(False), args.repeat)
        if a != b:
            raise SystemExit(f"{name}: numba gives {a}, numpy gives {b}")
        print(f"{name:<22}{size if size is not None else '-':>10}{tnb:>12.4f}{tnp:>12.4f}{tnp / tnb:>9.1f}x")


if __name__ == "__main__":
    main()
