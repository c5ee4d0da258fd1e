"""
Streams of words beta in N^m grouped by total |beta|.

A shell is the set of words of a fixed length m and total t; it is in
bijection with the (m-1)-subsets of {1, ..., t-1} (cut points of a
composition of t). Shells are produced as integer arrays in chunks so that
totals of several thousand never materialize as Python lists.
"""
import itertools
import math

import numpy as np

from interval_maps.exceptions import DomainError
from induced_map.services import Word


def shell_size(t, m):
    """Number of words of length m and total t"""
    if t < m or m < 1:
        return 0
    return math.comb(t - 1, m - 1)


def iter_shell(t, m, chunk_size=None):
    """
    Yield the words of length m and total t as (k, m) integer arrays

    Args:
        t: total |beta|
        m: word length
        chunk_size: maximal rows per yielded array (None for a single array)

    Yields:
        int64 arrays, rows in lexicographic order of their cut points
    """
    if m < 1:
        raise DomainError(f'Word length must be >= 1, got {m}')
    if t < m:
        return
    if m == 1:
        yield np.array([[t]], dtype=np.int64)
        return
    total = shell_size(t, m)
    chunk_size = chunk_size or total
    cuts_stream = itertools.combinations(range(1, t), m - 1)
    done = 0
    while done < total:
        rows = min(chunk_size, total - done)
        flat = np.fromiter(
            itertools.chain.from_iterable(itertools.islice(cuts_stream, rows)),
            dtype=np.int64, count=rows * (m - 1),
        )
        cuts = flat.reshape(rows, m - 1)
        bounds = np.hstack([np.zeros((rows, 1), dtype=np.int64), cuts, np.full((rows, 1), t, dtype=np.int64)])
        yield np.diff(bounds, axis=1)
        done += rows


def enumerate_words(m, total_cutoff):
    """
    Every word of length m with |beta| <= N, once, in nondecreasing total order

    Args:
        m: word length (>= 1)
        total_cutoff: N >= m

    Yields:
        Word
    """
    if m < 1 or total_cutoff < m:
        raise DomainError(f'enumerate_words needs 1 <= m <= N, got m={m}, N={total_cutoff}')
    for t in range(m, total_cutoff + 1):
        for block in iter_shell(t, m, chunk_size=4096):
            for row in block:
                yield Word(row)


def binary_words(n):
    """All 2^n words over {0, 1} as an (2^n, n) uint8 array, row k spelling k in binary"""
    if n < 1:
        raise DomainError(f'Binary words need n >= 1, got {n}')
    codes = np.arange(2 ** n, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((codes[:, None] >> shifts) & 1).astype(np.uint8)
