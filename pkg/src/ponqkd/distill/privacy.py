"""Privacy amplification with seeded Toeplitz hashing over GF(2)."""
from __future__ import annotations

import math

import numpy as np
from scipy.signal import fftconvolve

from .keys import DistilledKey, as_bits
from .rates import binary_entropy


def toeplitz_matrix(first_col, first_row) -> np.ndarray:
    """Dense m x n Toeplitz matrix; ``first_col[0]`` must equal ``first_row[0]``."""
    col, row = as_bits(first_col), as_bits(first_row)
    if col.size == 0 or row.size == 0 or col[0] != row[0]:
        raise ValueError("first column and first row must be non-empty and share element [0, 0]")
    i = np.arange(col.size)[:, None]
    j = np.arange(row.size)[None, :]
    d = i - j
    return np.where(d >= 0, col[np.clip(d, 0, None)], row[np.clip(-d, 0, None)]).astype(np.uint8)


def toeplitz_hash(bits, first_col, first_row) -> np.ndarray:
    """Compute ``T @ bits mod 2`` without materialising ``T``.

    The diagonals of ``T`` laid out from the top-right corner to the
    bottom-left form a vector ``v`` of length m + n - 1 with
    ``T[i, j] = v[n - 1 + i - j]``, so the product is a slice of the
    convolution ``v * bits``.
    """
    x, col, row = as_bits(bits), as_bits(first_col), as_bits(first_row)
    m, n = col.size, row.size
    if x.size != n:
        raise ValueError(f"input has {x.size} bits, matrix expects {n}")
    if m == 0:
        return np.zeros(0, dtype=np.uint8)
    if col[0] != row[0]:
        raise ValueError("first column and first row must share element [0, 0]")
    v = np.concatenate([row[:0:-1], col]).astype(np.float64)
    full = fftconvolve(v, x.astype(np.float64))
    counts = np.rint(full[n - 1 : n - 1 + m]).astype(np.int64)
    return (counts & 1).astype(np.uint8)


def toeplitz_from_seed(n: int, m: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """First column and first row of an m x n Toeplitz matrix from m + n - 1 seeded bits."""
    if m <= 0 or n <= 0:
        return np.zeros(max(m, 0), dtype=np.uint8), np.zeros(max(n, 0), dtype=np.uint8)
    diag = np.random.default_rng(seed).integers(0, 2, size=m + n - 1, dtype=np.uint8)
    col = diag[:m]
    row = np.concatenate([diag[:1], diag[m:]])
    return col, row


def toeplitz_extract(bits, m: int, seed: int) -> np.ndarray:
    x = as_bits(bits)
    if m <= 0:
        return np.zeros(0, dtype=np.uint8)
    col, row = toeplitz_from_seed(x.size, m, seed)
    return toeplitz_hash(x, col, row)


def secure_length(n: int, qber: float, leaked_bits: int, epsilon_bits: int) -> int:
    return max(0, math.floor(n * (1.0 - binary_entropy(qber))) - leaked_bits - epsilon_bits)


def privacy_amplify(
    key,
    qber: float,
    leaked_bits: int,
    disclosed_count: int = 0,
    epsilon_bits: int = 64,
    seed: int = 0,
) -> DistilledKey:
    """Compress a reconciled key to ``floor(n(1 - h2(qber))) - leaked - epsilon`` bits.

    ``disclosed_count`` (bits already published and removed, e.g. the QBER
    sample) does not shrink the output; it is carried into the result for
    bookkeeping.
    """
    x = as_bits(key)
    m = secure_length(x.size, qber, leaked_bits, epsilon_bits)
    return DistilledKey(
        bits=toeplitz_extract(x, m, seed),
        epsilon_margin=epsilon_bits,
        disclosed_count=disclosed_count,
        leaked_bits=leaked_bits,
    )
