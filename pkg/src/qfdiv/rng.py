"""Seeded randomness primitives.

All random objects in the package derive from the Philox 4x64-10 counter-based
generator keyed directly with the caller's 64-bit seed (no entropy pooling), so
a seed pins the full bit stream.  Normal deviates are produced by the explicit
Box-Muller transform on the generator's uniform doubles rather than a library
sampler, keeping the stream reproducible by any implementation of the same
two building blocks.
"""

from __future__ import annotations

import numpy as np

_U64_MASK = (1 << 64) - 1


def generator(seed: int) -> np.random.Generator:
    """Philox generator keyed with the low 64 bits of ``seed``."""
    return np.random.Generator(np.random.Philox(key=int(seed) & _U64_MASK))


def standard_normals(gen: np.random.Generator, n: int) -> np.ndarray:
    """``n`` N(0, 1) deviates via Box-Muller pairs on uniforms from ``gen``."""
    m = (n + 1) // 2
    u1 = 1.0 - gen.random(m)  # (0, 1]: keeps the log finite
    u2 = gen.random(m)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    z = np.concatenate((radius * np.cos(angle), radius * np.sin(angle)))
    return z[:n]


def complex_gaussian(gen: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    """Matrix with independent N(0, 1) real and imaginary parts."""
    n = int(np.prod(shape))
    re = standard_normals(gen, n)
    im = standard_normals(gen, n)
    return (re + 1j * im).reshape(shape)


def haar_isometry(gen: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    """Haar-distributed isometry via QR of a complex Gaussian matrix.

    The unit phases of the R diagonal are absorbed into Q, which makes the
    distribution exactly Haar (and a Haar unitary when ``rows == cols``).
    """
    if rows < cols:
        raise ValueError(f"isometry needs rows >= cols, got {rows} x {cols}")
    g = complex_gaussian(gen, (rows, cols))
    q, r = np.linalg.qr(g, mode="reduced")
    d = np.diagonal(r)
    absd = np.abs(d)
    safe = np.where(absd == 0, 1.0, absd)  # zero diagonal has probability zero
    phases = np.where(absd == 0, 1.0, d / safe)
    return q * phases
