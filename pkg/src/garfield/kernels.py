"""Hot numeric kernels: batch edit distance and bootstrap resampling.

Each kernel has two interchangeable implementations: a numba ``@njit``
version and a pure-numpy version. Setting ``GARFIELD_DISABLE_NUMBA=1``
forces the numpy path; otherwise numba is used when importable. Both
paths are bit-identical (integer DP, integer RNG, one float division at
the end), so the backend choice never changes engine output.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLE = os.environ.get("GARFIELD_DISABLE_NUMBA", "") not in ("", "0")

try:
    if _DISABLE:
        raise ImportError("numba disabled by GARFIELD_DISABLE_NUMBA")
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

# splitmix64 constants
_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D49BDB133111EB)


def encode_strings(strings: list[str], pad: int = -1) -> tuple[np.ndarray, np.ndarray]:
    """Pack strings into an int32 code-point matrix plus a length vector."""
    lengths = np.array([len(s) for s in strings], dtype=np.int32)
    width = int(lengths.max()) if len(strings) else 0
    codes = np.full((len(strings), max(width, 1)), pad, dtype=np.int32)
    for i, s in enumerate(strings):
        for j, ch in enumerate(s):
            codes[i, j] = ord(ch)
    return codes, lengths


# ---------------------------------------------------------------------------
# pure-numpy implementations


def _mix64_np(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def levenshtein_matrix_numpy(
    q_codes: np.ndarray,
    q_lens: np.ndarray,
    c_codes: np.ndarray,
    c_lens: np.ndarray,
    max_distance: int,
) -> np.ndarray:
    """Edit distances between every query/candidate pair, clamped.

    Entries <= max_distance are exact Levenshtein distances; anything
    larger is reported as max_distance + 1.
    """
    nq = q_codes.shape[0]
    nc = c_codes.shape[0]
    width = q_codes.shape[1]
    out = np.empty((nq, nc), dtype=np.int32)
    base = np.arange(width + 1, dtype=np.int32)
    rows = np.arange(nq)
    cap = np.int32(max_distance + 1)
    for j in range(nc):
        row = np.tile(base, (nq, 1))
        tmp = np.empty_like(row)
        for k in range(int(c_lens[j])):
            ch = c_codes[j, k]
            tmp[:, 0] = k + 1
            np.minimum(row[:, :-1] + (q_codes != ch), row[:, 1:] + 1, out=tmp[:, 1:])
            # within-row insertion chain: new[l] = min(tmp[:l+1] + offset)
            np.minimum.accumulate(tmp - base, axis=1, out=tmp)
            row = tmp + base
            tmp = np.empty_like(row)
        out[:, j] = np.minimum(row[rows, q_lens], cap)
    return out


def bootstrap_means_numpy(counts: np.ndarray, replicates: int, seed: int) -> np.ndarray:
    """Mean of each with-replacement resample of counts.

    Replicate r draws counts.size indices from a splitmix64 stream
    seeded with seed + r, so results do not depend on evaluation order.
    """
    n = counts.shape[0]
    with np.errstate(over="ignore"):
        streams = _mix64_np(np.uint64(seed) + np.arange(replicates, dtype=np.uint64))
        draws = np.arange(1, n + 1, dtype=np.uint64) * _GAMMA
        idx = _mix64_np(streams[:, None] + draws[None, :]) % np.uint64(n)
    sums = counts[idx].sum(axis=1, dtype=np.int64)
    return sums / np.float64(n)


# ---------------------------------------------------------------------------
# numba implementations

if HAS_NUMBA:

    @njit(cache=True)
    def _mix64(z):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))

    @njit(cache=True)
    def _levenshtein_matrix_jit(q_codes, q_lens, c_codes, c_lens, max_distance):
        nq = q_codes.shape[0]
        nc = c_codes.shape[0]
        width = q_codes.shape[1]
        out = np.empty((nq, nc), dtype=np.int32)
        prev = np.empty(width + 1, dtype=np.int32)
        cur = np.empty(width + 1, dtype=np.int32)
        cap = np.int32(max_distance + 1)
        for i in range(nq):
            m = q_lens[i]
            for j in range(nc):
                n = c_lens[j]
                if abs(m - n) > max_distance:
                    out[i, j] = cap
                    continue
                for l in range(m + 1):
                    prev[l] = l
                dist = np.int32(-1)
                for k in range(n):
                    ch = c_codes[j, k]
                    cur[0] = k + 1
                    rowmin = cur[0]
                    for l in range(1, m + 1):
                        cost = 0 if q_codes[i, l - 1] == ch else 1
                        v = prev[l - 1] + cost
                        if prev[l] + 1 < v:
                            v = prev[l] + 1
                        if cur[l - 1] + 1 < v:
                            v = cur[l - 1] + 1
                        cur[l] = v
                        if v < rowmin:
                            rowmin = v
                    if rowmin > max_distance:
                        dist = cap
                        break
                    for l in range(m + 1):
                        prev[l] = cur[l]
                if dist < 0:
                    dist = prev[m] if prev[m] <= max_distance else cap
                out[i, j] = dist
        return out

    @njit(cache=True)
    def _bootstrap_means_jit(counts, replicates, seed):
        n = counts.shape[0]
        un = np.uint64(n)
        out = np.empty(replicates, dtype=np.float64)
        for r in range(replicates):
            stream = _mix64(np.uint64(seed) + np.uint64(r))
            total = np.int64(0)
            for j in range(n):
                z = _mix64(stream + np.uint64(j + 1) * _GAMMA)
                total += counts[np.int64(z % un)]
            out[r] = total / np.float64(n)
        return out

    def levenshtein_matrix_numba(q_codes, q_lens, c_codes, c_lens, max_distance):
        return _levenshtein_matrix_jit(q_codes, q_lens, c_codes, c_lens, max_distance)

    def bootstrap_means_numba(counts, replicates, seed):
        return _bootstrap_means_jit(counts, replicates, seed)

    levenshtein_matrix = levenshtein_matrix_numba
    bootstrap_means = bootstrap_means_numba
    BACKEND = "numba"
else:
    levenshtein_matrix = levenshtein_matrix_numpy
    bootstrap_means = bootstrap_means_numpy
    BACKEND = "numpy"
