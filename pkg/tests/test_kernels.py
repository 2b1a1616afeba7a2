"""The numba and numpy kernel paths must return identical integers."""

import os
import random
import subprocess
import sys

import numpy as np
import pytest

from dimpoly import _kernels
from dimpoly.extdim import WindowSpec, _classify_codes, spec_charset, trdeg_oracle, window_gammas
from dimpoly.lattice import INT, NAT, Partition, _window_blocks

from conftest import QUAD4, spec_from

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba unavailable")


def random_sparse(rng, nrows, ncols, span, p=None):
    cols, vals = [], []
    for _ in range(nrows):
        start = rng.randrange(0, max(1, ncols - span))
        k = rng.randint(1, span)
        cs = sorted(rng.sample(range(start, min(ncols, start + span)), min(k, min(ncols, start + span) - start)))
        cols.append(cs)
        vals.append([rng.randint(-5, 5) or 1 for _ in cs])
    return cols, vals


@needs_numba
@pytest.mark.parametrize("seed", range(15))
def test_banded_rank_paths_agree_with_exact(seed):
    rng = random.Random(seed)
    cols, vals = random_sparse(rng, rng.randint(1, 40), rng.randint(5, 40), rng.randint(1, 6))
    ncols = max(max(c) for c in cols) + 1
    exact = _kernels.exact_rank(cols, vals)
    for p in (_kernels.PRIME_A, _kernels.PRIME_B):
        a = _kernels.banded_rank(cols, vals, ncols, p, use_numba=True)
        b = _kernels.banded_rank(cols, vals, ncols, p, use_numba=False)
        assert a == b == exact


@needs_numba
def test_banded_rank_padded_matches_lists():
    rng = random.Random(99)
    cols, vals = random_sparse(rng, 30, 50, 5)
    width = max(len(c) for c in cols)
    c2 = np.full((len(cols), width), -1, dtype=np.int64)
    v2 = np.zeros((len(cols), width), dtype=np.int64)
    for i, (c, v) in enumerate(zip(cols, vals)):
        # store each row reversed to exercise the in-row sort
        c2[i, :len(c)] = c[::-1]
        v2[i, :len(v)] = v[::-1]
    want = _kernels.exact_rank(cols, vals)
    for nb in (True, False):
        assert _kernels.banded_rank_padded(c2, v2, 50, use_numba=nb) == want


def test_rank_of_dependent_rows():
    cols = [[0, 1], [1, 2], [0, 2]]
    vals = [[1, -1], [1, -1], [1, -1]]
    assert _kernels.exact_rank(cols, vals) == 2
    assert _kernels.banded_rank(cols, vals, 3, use_numba=False) == 2
    assert _kernels.banded_rank([], [], 0) == 0


@needs_numba
@pytest.mark.parametrize("mode,ambient", [(0, NAT), (1, INT)])
@pytest.mark.parametrize("seed", range(8))
def test_count_undominated_paths(mode, ambient, seed):
    rng = random.Random(seed)
    sizes = rng.choice([(1,), (2,), (1, 1), (2, 1), (1, 1, 1)])
    part = Partition.from_sizes(sizes)
    lo = 0 if mode == 0 else -3
    A = np.array([[rng.randint(lo, 3) for _ in range(part.m)] for _ in range(rng.randint(0, 4))],
                 dtype=np.int64).reshape(-1, part.m)
    r = [rng.randint(0, 5) for _ in sizes]
    s = [rng.randint(0, x) for x in r]
    rows, offs, _ = _window_blocks(part, r, s, ambient)
    a = _kernels.count_undominated(rows, offs, A, mode, use_numba=True)
    b = _kernels.count_undominated(rows, offs, A, mode, use_numba=False)
    assert a == b


@needs_numba
@pytest.mark.parametrize("w", [((4, 4, 4), (1, 1, 1)), ((6, 5, 7), (3, 1, 2)), ((8, 8, 8), (5, 4, 3))])
def test_classification_paths(w):
    spec = spec_from((1, 1, 1), 1, QUAD4)
    cs = spec_charset(spec)
    W = WindowSpec.of(*w)
    G = window_gammas(spec.part, W)
    a = _classify_codes(cs, spec, W, 1, G, use_numba=True)
    b = _classify_codes(cs, spec, W, 1, G, use_numba=False)
    assert np.array_equal(a, b)


@needs_numba
def test_classification_paths_two_generators_and_blocks():
    spec = spec_from((2, 1), 2, "a1^2 y1 - a2^-1 y1 + a3^1 y1", "a1^1 y2 + y2")
    cs = spec_charset(spec)
    W = WindowSpec.of((5, 4), (2, 1))
    G = window_gammas(spec.part, W)
    for j in (1, 2):
        assert np.array_equal(_classify_codes(cs, spec, W, j, G, use_numba=True),
                              _classify_codes(cs, spec, W, j, G, use_numba=False))


def test_oracle_modular_matches_exact():
    spec = spec_from((1, 1, 1), 1, QUAD4)
    for w in (((3, 3, 3), (0, 0, 0)), ((4, 3, 4), (1, 1, 2))):
        W = WindowSpec.of(*w)
        assert trdeg_oracle(spec, W) == trdeg_oracle(spec, W, exact=True)


def test_oracle_two_relations_modular_matches_exact():
    spec = spec_from((1, 1), 2, "a1^1 y1 + a2^1 y1 + y1", "y2 - a1^1 y1")
    W = WindowSpec.of((3, 3), (1, 0))
    assert trdeg_oracle(spec, W, margin=2) == trdeg_oracle(spec, W, margin=2, exact=True)


def test_disable_flag_selects_numpy():
    env = dict(os.environ, DIMPOLY_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "from dimpoly import _kernels; print(_kernels.USING_NUMBA)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"
