"""Bipartite pure states, reduced density matrices and the linear algebra they share.

Amplitudes are stored A-major: ``amps[i * dim_b + j] = <i, j | psi>``, so the
coefficient matrix ``M[i, j]`` is a plain reshape and the two partial traces are
``M @ M^dagger`` (Alice) and ``M^T @ conj(M)`` (Bob).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

NORM_TOL = 1e-10
NEAR_ZERO_NORM = 1e-12
EIG_CLAMP = 1e-10

__all__ = [
    "NORM_TOL",
    "NEAR_ZERO_NORM",
    "EIG_CLAMP",
    "StateError",
    "NearZeroNorm",
    "NotNormalized",
    "StateVector",
    "DensityMatrix",
    "Superposition",
    "make_state",
    "basis_state",
    "norm",
    "normalize",
    "inner",
    "fidelity",
    "superpose",
    "reduced_density",
    "mix",
    "ancilla_extension",
    "make_rng",
    "random_state",
    "canonical_phase",
]


class StateError(ValueError):
    """Malformed state, dimension mismatch or violated precondition."""


class NearZeroNorm(StateError):
    """A vector that should be normalized has norm below 1e-12."""


class NotNormalized(StateError):
    pass


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state on C^dim_a (x) C^dim_b with A-major amplitudes."""

    dim_a: int
    dim_b: int
    amps: np.ndarray = field(repr=False)

    def __post_init__(self):
        if int(self.dim_a) < 1 or int(self.dim_b) < 1:
            raise StateError(f"dimensions must be positive, got ({self.dim_a}, {self.dim_b})")
        amps = np.asarray(self.amps, dtype=complex).ravel()
        if amps.size != self.dim_a * self.dim_b:
            raise StateError(
                f"amps has length {amps.size}, expected dim_a*dim_b = {self.dim_a * self.dim_b}"
            )
        object.__setattr__(self, "dim_a", int(self.dim_a))
        object.__setattr__(self, "dim_b", int(self.dim_b))
        object.__setattr__(self, "amps", _frozen(amps))

    @property
    def dims(self) -> tuple[int, int]:
        return (self.dim_a, self.dim_b)

    @property
    def matrix(self) -> np.ndarray:
        """Coefficient matrix ``M[i, j]`` (a read-only view)."""
        return self.amps.reshape(self.dim_a, self.dim_b)

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(norm(self) - 1.0) <= tol

    def __mul__(self, c) -> "StateVector":
        return StateVector(self.dim_a, self.dim_b, complex(c) * self.amps)

    __rmul__ = __mul__

    def __add__(self, other: "StateVector") -> "StateVector":
        _check_dims(self, other)
        return StateVector(self.dim_a, self.dim_b, self.amps + other.amps)

    def __sub__(self, other: "StateVector") -> "StateVector":
        _check_dims(self, other)
        return StateVector(self.dim_a, self.dim_b, self.amps - other.amps)

    def __neg__(self) -> "StateVector":
        return StateVector(self.dim_a, self.dim_b, -self.amps)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix."""

    dim: int
    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        if entries.shape != (self.dim, self.dim):
            raise StateError(f"entries has shape {entries.shape}, expected ({self.dim}, {self.dim})")
        if np.max(np.abs(entries - entries.conj().T), initial=0.0) > NORM_TOL:
            raise StateError("density matrix is not Hermitian")
        object.__setattr__(self, "entries", _frozen(entries))

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues in nonincreasing order, with float noise above -1e-10 clamped to 0.

        Raises
        ------
        StateError
            If an eigenvalue lies below -1e-10 (the matrix is not PSD).
        """
        w = np.linalg.eigvalsh(self.entries)[::-1]
        if w.size and w[-1] < -EIG_CLAMP:
            raise StateError(f"density matrix has negative eigenvalue {w[-1]:.3e}")
        return np.clip(w, 0.0, None)


def _check_dims(a: StateVector, b: StateVector) -> None:
    if a.dims != b.dims:
        raise StateError(f"dimension mismatch: {a.dims} vs {b.dims}")


def _require_normalized(psi: StateVector, what: str = "state") -> None:
    n = norm(psi)
    if abs(n - 1.0) > NORM_TOL:
        raise NotNormalized(f"{what} has norm {n!r}; normalize it first")


@dataclass(frozen=True, eq=False)
class Superposition:
    """``alpha |phi> + beta |psi>`` with normalized terms and ``|alpha|^2 + |beta|^2 = 1``."""

    alpha: complex
    beta: complex
    phi: StateVector
    psi: StateVector

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        _check_dims(self.phi, self.psi)
        total = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(total - 1.0) > NORM_TOL:
            raise StateError(f"|alpha|^2 + |beta|^2 = {total!r}, expected 1")
        _require_normalized(self.phi, "phi")
        _require_normalized(self.psi, "psi")

    @property
    def weights(self) -> tuple[float, float]:
        return abs(self.alpha) ** 2, abs(self.beta) ** 2


def make_state(dim_a: int, dim_b: int, amps: Sequence[complex]) -> StateVector:
    """Wrap ``amps`` as a state without normalizing it."""
    return StateVector(dim_a, dim_b, np.asarray(amps, dtype=complex))


def basis_state(dim_a: int, dim_b: int, i: int, j: int) -> StateVector:
    amps = np.zeros(dim_a * dim_b, dtype=complex)
    amps[i * dim_b + j] = 1.0
    return StateVector(dim_a, dim_b, amps)


def norm(psi: StateVector) -> float:
    return float(np.linalg.norm(psi.amps))


def normalize(psi: StateVector) -> StateVector:
    n = norm(psi)
    if n <= NEAR_ZERO_NORM:
        raise NearZeroNorm(f"cannot normalize a vector of norm {n:.3e}")
    return StateVector(psi.dim_a, psi.dim_b, psi.amps / n)


def inner(psi: StateVector, phi: StateVector) -> complex:
    """``<psi|phi>``, conjugate-linear in ``psi``."""
    _check_dims(psi, phi)
    return complex(np.vdot(psi.amps, phi.amps))


def fidelity(psi: StateVector, phi: StateVector) -> float:
    _require_normalized(psi, "psi")
    _require_normalized(phi, "phi")
    return min(1.0, abs(inner(psi, phi)) ** 2)


def superpose(s: Superposition) -> tuple[StateVector, float]:
    """Return the unnormalized ``alpha phi + beta psi`` and its norm."""
    out = StateVector(s.phi.dim_a, s.phi.dim_b, s.alpha * s.phi.amps + s.beta * s.psi.amps)
    return out, norm(out)


def reduced_density(psi: StateVector, party: str) -> DensityMatrix:
    """Reduced state of ``party`` ("A" or "B"); the other party is traced out."""
    _require_normalized(psi)
    m = psi.matrix
    if party == "A":
        rho = m @ m.conj().T
    elif party == "B":
        rho = m.T @ m.conj()
    else:
        raise StateError(f"party must be 'A' or 'B', got {party!r}")
    # exact Hermitian symmetrization removes rounding asymmetry
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho.shape[0], rho)


def mix(weights: Sequence[float], rhos: Sequence[DensityMatrix]) -> DensityMatrix:
    """Convex combination ``sum_i w_i rho_i``."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size != len(rhos) or w.size == 0:
        raise StateError("need one weight per density matrix")
    if np.any(w < 0):
        raise StateError("weights must be nonnegative")
    if abs(w.sum() - 1.0) > NORM_TOL:
        raise StateError(f"weights sum to {w.sum()!r}, expected 1")
    dim = rhos[0].dim
    if any(r.dim != dim for r in rhos):
        raise StateError("density matrices have different dimensions")
    out = sum(wi * r.entries for wi, r in zip(w, rhos))
    return DensityMatrix(dim, out)


def ancilla_extension(coeffs: Sequence[complex], states: Sequence[StateVector]) -> StateVector:
    """Attach a k-level ancilla to Alice: ``sum_i c_i |i>_a |state_i>_AB``.

    The result lives on ``(k * dim_a, dim_b)`` with the ancilla as the most
    significant index on Alice's side. Bob's reduced state is therefore the
    mixture ``sum_i |c_i|^2 Tr_A |state_i><state_i|`` whatever the overlaps of
    the states, because distinct ancilla levels kill every cross term.
    """
    c = np.asarray(coeffs, dtype=complex)
    if c.ndim != 1 or c.size < 2 or c.size != len(states):
        raise StateError("need k >= 2 coefficients, one per state")
    if abs(np.sum(np.abs(c) ** 2) - 1.0) > NORM_TOL:
        raise StateError("coefficients are not normalized")
    first = states[0]
    for s in states[1:]:
        _check_dims(first, s)
    amps = np.concatenate([ci * s.amps for ci, s in zip(c, states)])
    return StateVector(c.size * first.dim_a, first.dim_b, amps)


def make_rng(seed, *keys: int) -> np.random.Generator:
    """The package's single random source.

    ``seed`` is a nonnegative int (or an existing Generator, returned as is);
    ``keys`` derive independent child streams, e.g. ``make_rng(seed, restart)``.
    Streams depend only on ``(seed, *keys)``.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys)))


def random_state(dim_a: int, dim_b: int, seed) -> StateVector:
    """Haar-random pure state: i.i.d. standard complex Gaussians, normalized."""
    rng = make_rng(seed)
    n = dim_a * dim_b
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return StateVector(dim_a, dim_b, z / np.linalg.norm(z))


def canonical_phase(psi: StateVector, tol: float = 1e-12) -> StateVector:
    """Rotate the global phase so the first amplitude above ``tol`` is real positive.

    Only for comparisons; construction never does this.
    """
    nz = np.flatnonzero(np.abs(psi.amps) > tol)
    if nz.size == 0:
        return psi
    a = psi.amps[nz[0]]
    return StateVector(psi.dim_a, psi.dim_b, psi.amps * (abs(a) / a))
