"""Named, counter-based random streams derived from a single integer seed.

Every consumer asks for a stream by name; the same (seed, name) pair always
yields the same Philox generator, independent of call order elsewhere.
"""

from __future__ import annotations

import zlib

import numpy as np


def stream(seed: int, name: str) -> np.random.Generator:
    """Return a Philox generator keyed by ``seed`` and the stream ``name``."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    tag = zlib.crc32(name.encode("utf-8"))
    ss = np.random.SeedSequence([int(seed), tag])
    return np.random.Generator(np.random.Philox(ss))


def haar_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix with phase fix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def haar_state(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Haar-random unit vector of length ``dim``."""
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return z / np.linalg.norm(z)
