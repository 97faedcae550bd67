"""Seeded random ensembles used by the randomized bound checks."""

from __future__ import annotations

import math

import numpy as np

from .states import DensityMatrix, StateVector, Superposition, make_rng, random_state


def random_unitary(d: int, seed) -> np.ndarray:
    """Haar unitary from the QR decomposition of a Ginibre matrix (phases fixed)."""
    rng = make_rng(seed)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph


def random_alpha(rng: np.random.Generator) -> tuple[complex, float]:
    """``alpha`` with uniform angle and random phase; ``beta`` real, nonnegative."""
    theta = rng.uniform(0.0, 0.5 * math.pi)
    chi = rng.uniform(0.0, 2.0 * math.pi)
    return math.cos(theta) * complex(math.cos(chi), math.sin(chi)), math.sin(theta)


def random_biorthogonal_pair(d: int, split: int, seed) -> Superposition:
    """Bi-orthogonal pair on (d, d): Phi lives on the first ``split`` local levels, Psi on the rest,
    both then rotated by the same random local unitaries."""
    rng = make_rng(seed)
    u = random_unitary(d, rng)
    v = random_unitary(d, rng)
    blocks = []
    for lo, hi in ((0, split), (split, d)):
        m = np.zeros((d, d), dtype=complex)
        k = hi - lo
        m[lo:hi, lo:hi] = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        m /= np.linalg.norm(m)
        blocks.append(StateVector(d, d, (u @ m @ v.T).ravel()))
    alpha, beta = random_alpha(rng)
    return Superposition(alpha, beta, blocks[0], blocks[1])


def random_orthonormal_states(k: int, dim_a: int, dim_b: int, seed) -> list[StateVector]:
    rng = make_rng(seed)
    n = dim_a * dim_b
    z = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
    q, _ = np.linalg.qr(z)
    return [StateVector(dim_a, dim_b, q[:, i]) for i in range(k)]


def random_orthogonal_pair(dim_a: int, dim_b: int, seed) -> Superposition:
    rng = make_rng(seed)
    phi, psi = random_orthonormal_states(2, dim_a, dim_b, rng)
    alpha, beta = random_alpha(rng)
    return Superposition(alpha, beta, phi, psi)


def random_pair(dim_a: int, dim_b: int, seed) -> Superposition:
    """Two independent Haar states; overlaps are generic."""
    rng = make_rng(seed)
    phi = random_state(dim_a, dim_b, rng)
    psi = random_state(dim_a, dim_b, rng)
    alpha, beta = random_alpha(rng)
    return Superposition(alpha, beta, phi, psi)


def random_coefficients(k: int, seed) -> np.ndarray:
    rng = make_rng(seed)
    c = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    return c / np.linalg.norm(c)


def random_density_matrix(dim: int, seed, rank: int | None = None) -> DensityMatrix:
    """``G G^dagger / tr`` for a complex Gaussian ``dim x rank`` matrix G."""
    rng = make_rng(seed)
    r = dim if rank is None else rank
    g = rng.standard_normal((dim, r)) + 1j * rng.standard_normal((dim, r))
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T) / np.trace(rho).real
    return DensityMatrix(dim, rho)


def orthogonal_support_pair(dim: int, seed) -> tuple[DensityMatrix, DensityMatrix]:
    """Two density matrices with orthogonal supports (random split of a random basis)."""
    rng = make_rng(seed)
    u = random_unitary(dim, rng)
    cut = int(rng.integers(1, dim))
    out = []
    for cols in (u[:, :cut], u[:, cut:]):
        w = rng.uniform(0.05, 1.0, cols.shape[1])
        w /= w.sum()
        rho = (cols * w) @ cols.conj().T
        out.append(DensityMatrix(dim, 0.5 * (rho + rho.conj().T)))
    return out[0], out[1]
