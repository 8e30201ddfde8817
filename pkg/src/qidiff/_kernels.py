"""Compiled exhaustive-scan kernels for the classical oracles."""
import numba as nb
import numpy as np


@nb.njit(cache=True)
def linear_structure_pairs(table, N):
    """A spanning set of {(a, b) : table[x] ^ table[x ^ a] == b for every x}.

    Structures form a subspace, so candidates already in the span of the
    a-parts found so far are skipped; at most N candidates need a full pass.
    """
    size = 1 << N
    found_a = np.empty(N + 1, dtype=np.int64)
    found_b = np.empty(N + 1, dtype=np.int64)
    # reduced a-parts indexed by their top bit (0 = empty slot)
    pivots = np.zeros(N, dtype=np.int64)
    count = 0
    for a in range(1, size):
        r = a
        for bit in range(N - 1, -1, -1):
            if (r >> bit) & 1 and pivots[bit]:
                r ^= pivots[bit]
        if r == 0:
            continue
        b = table[0] ^ table[a]
        ok = True
        for x in range(1, size):
            if table[x] ^ table[x ^ a] != b:
                ok = False
                break
        if ok:
            top = 0
            while (r >> (top + 1)) > 0:
                top += 1
            pivots[top] = r
            found_a[count] = a
            found_b[count] = b
            count += 1
    return found_a[:count], found_b[:count]


@nb.njit(cache=True)
def difference_histograms(table, N, M):
    """hist[a, b] = #{x : table[x] ^ table[x ^ a] == b}."""
    size = 1 << N
    hist = np.zeros((size, 1 << M), dtype=np.int64)
    for a in range(size):
        for x in range(size):
            hist[a, table[x] ^ table[x ^ a]] += 1
    return hist


@nb.njit(cache=True)
def theta_scan(table, N, M):
    """Largest match count among pairs outside the structure space.

    Returns (best, best_a, best_b). Pairs are visited in increasing (a, b)
    order and ties keep the first one; (0, 1) with count 0 is the fallback.
    """
    size = 1 << N
    hist = np.zeros(1 << M, dtype=np.int64)
    best, best_a, best_b = 0, 0, 1
    dense = M <= N
    for a in range(size):
        if a == 0:
            hist[0] = size
        else:
            # each unordered pair {x, x ^ a} once: x ranges over values with a's top bit clear
            top = 1
            while top * 2 <= a:
                top *= 2
            for base in range(0, size, 2 * top):
                for x in range(base, base + top):
                    hist[table[x] ^ table[x ^ a]] += 2
        row_best, row_b = -1, 0
        if dense:
            for d in range(1 << M):
                c = hist[d]
                if c < size and c > row_best:
                    row_best, row_b = c, d
        else:
            for x in range(size):
                d = table[x] ^ table[x ^ a]
                c = hist[d]
                if c < size and (c > row_best or (c == row_best and d < row_b)):
                    row_best, row_b = c, d
        if row_best > best:
            best, best_a, best_b = row_best, a, row_b
        if dense:
            hist[:] = 0
        else:
            for x in range(size):
                hist[table[x] ^ table[x ^ a]] = 0
    return best, best_a, best_b
