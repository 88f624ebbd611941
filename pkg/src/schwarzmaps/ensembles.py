"""Seeded random matrices and vectors.

Every generator takes a ``numpy.random.Generator``. Generators are created
with :func:`rng_for`, which derives an independent PCG64 stream from a root
seed and a sequence of labels, so that the draws for one check never depend
on which other checks ran before it::

    rng_for(1234, "tracial", "gs", 7)

The labels are hashed with CRC-32, so streams are stable across processes
and platforms.
"""
from __future__ import annotations

import zlib

import numpy as np


def _key(part) -> int:
    if isinstance(part, (int, np.integer)):
        return int(part) & 0xFFFFFFFF
    return zlib.crc32(str(part).encode())


def rng_for(seed: int, *labels) -> np.random.Generator:
    entropy = [int(seed) & 0xFFFFFFFF, *(_key(p) for p in labels)]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def ginibre(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Matrix of i.i.d. standard complex Gaussians (variance 1 per entry)."""
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def unit_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = ginibre(dim, 1, rng)[:, 0]
    return v / np.linalg.norm(v)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    Q, R = np.linalg.qr(ginibre(dim, dim, rng))
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    G = ginibre(dim, dim, rng)
    return (G + G.conj().T) / 2


def random_psd(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Wishart-type PSD matrix ``G G*`` with ``G`` of shape ``dim x rank``."""
    rank = dim if rank is None else rank
    G = ginibre(dim, rank, rng)
    return G @ G.conj().T


def random_pd(dim: int, rng: np.random.Generator, floor: float = 0.1) -> np.ndarray:
    """Positive definite matrix with spectrum bounded below by ``floor``.

    The eigenvalues are drawn log-uniformly from ``[floor, 10]`` so the
    condition number stays below ``10 / floor``.
    """
    U = haar_unitary(dim, rng)
    w = np.exp(rng.uniform(np.log(floor), np.log(10.0), size=dim))
    return (U * w) @ U.conj().T


def random_tracial_pair(
    dim: int, rng: np.random.Generator, rank: int | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """A pair ``(K, X)`` with ``X`` PSD and ``ker(X) ⊆ ker(K*)``.

    With ``rank < dim`` the matrix ``X`` is singular and ``K = X Z`` keeps the
    range of ``K`` inside the range of ``X``.
    """
    if rank is None or rank >= dim:
        return ginibre(dim, dim, rng), random_pd(dim, rng)
    X = random_psd(dim, rng, rank=rank)
    X = X / np.linalg.norm(X, 2)
    K = X @ ginibre(dim, dim, rng)
    return K, X
