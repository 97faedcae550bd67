"""Entanglement of pure bipartite states and the superposition bounds built on it.

All entropies are in bits. Entanglement is computed from the singular values of
the coefficient matrix; reduced density matrices are only diagonalized by
:func:`von_neumann_entropy`, which works on arbitrary density matrices.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from .states import (
    NEAR_ZERO_NORM,
    DensityMatrix,
    NearZeroNorm,
    StateError,
    StateVector,
    Superposition,
    _check_dims,
    _require_normalized,
    ancilla_extension,
    inner,
    mix,
    norm,
    reduced_density,
)

ZERO_EIG = 1e-15
BOUND_SLACK = 1e-8
EQUALITY_TOL = 1e-8
MIXING_SLACK = 1e-9
UPSILON_FLOOR = 1e-12

BIORTHOGONAL = "biorthogonal"
ORTHOGONAL = "orthogonal"
GENERAL = "general"
CONSTRAINT_CLASSES = (BIORTHOGONAL, ORTHOGONAL, GENERAL)


class BoundError(StateError):
    pass


class NotBiorthogonal(BoundError):
    pass


class NotOrthogonal(BoundError):
    pass


@dataclass(frozen=True)
class SchmidtSpectrum:
    coeffs: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        """Squared coefficients, i.e. the spectrum of either reduced state."""
        return self.coeffs**2


@dataclass
class BoundReport:
    """One evaluation of a superposition (or mixture) against a bound.

    ``ratio`` is ``None`` when upsilon is below 1e-12. ``e_superposition``,
    ``gain`` and ``ratio`` are ``None`` when the superposition vanishes.
    ``details`` carries check-specific secondary quantities.
    """

    e_superposition: Optional[float]
    e_phi: float
    e_psi: float
    h2_alpha: float
    upsilon: float
    gain: Optional[float]
    ratio: Optional[float]
    norm_sum: float
    norm_diff: float
    bound_rhs: float
    satisfied: bool
    constraint_class: str
    alpha_sq: float = 1.0
    details: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "BoundReport":
        return cls(**data)


def _entropy_bits(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > ZERO_EIG]
    return float(max(0.0, -np.sum(p * np.log2(p))))


def shannon_entropy(probs: Sequence[float]) -> float:
    """Shannon entropy in bits; terms with p <= 1e-15 contribute 0."""
    p = np.asarray(probs, dtype=float)
    if np.any(p < 0):
        raise ValueError("probabilities must be nonnegative")
    return _entropy_bits(p)


def binary_entropy(x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary entropy needs 0 <= x <= 1, got {x!r}")
    return _entropy_bits(np.array([x, 1.0 - x]))


def schmidt_spectrum(psi: StateVector) -> SchmidtSpectrum:
    """Schmidt coefficients of a normalized state, nonincreasing, length min(dim_a, dim_b).

    Raises ``numpy.linalg.LinAlgError`` if the SVD does not converge.
    """
    _require_normalized(psi)
    s = np.linalg.svd(psi.matrix, compute_uv=False)
    return SchmidtSpectrum(np.sort(s)[::-1])


def schmidt_rank(psi: StateVector, tol: float = 1e-9) -> int:
    return int(np.count_nonzero(schmidt_spectrum(psi).coeffs > tol))


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """``-sum(l * log2 l)`` over the eigenvalues of ``rho``.

    Raises
    ------
    StateError
        On an eigenvalue below -1e-10 or a trace more than 1e-8 away from 1.
    """
    if abs(rho.trace - 1.0) > 1e-8:
        raise StateError(f"density matrix has trace {rho.trace!r}")
    return min(_entropy_bits(rho.eigenvalues()), float(np.log2(rho.dim)))


def entanglement(psi: StateVector) -> float:
    """Entropy of entanglement ``E(psi)`` in e-bits (state must be normalized)."""
    w = schmidt_spectrum(psi).weights
    return min(_entropy_bits(w), float(np.log2(min(psi.dim_a, psi.dim_b))))


def upsilon(phi: StateVector, psi: StateVector, alpha: complex) -> float:
    """``|a|^2 E(phi) + (1 - |a|^2) E(psi) + h2(|a|^2)``."""
    a2 = abs(alpha) ** 2
    if a2 > 1.0 + 1e-12:
        raise ValueError(f"|alpha| = {abs(alpha)!r} exceeds 1")
    a2 = min(a2, 1.0)
    return a2 * entanglement(phi) + (1.0 - a2) * entanglement(psi) + binary_entropy(a2)


def _normalized_sum(s: Superposition, sign: int = 1) -> tuple[Optional[StateVector], float]:
    v = s.alpha * s.phi.amps + sign * s.beta * s.psi.amps
    n = float(np.linalg.norm(v))
    if n <= NEAR_ZERO_NORM:
        return None, n
    return StateVector(s.phi.dim_a, s.phi.dim_b, v / n), n


def superposition_entanglement(s: Superposition) -> float:
    """Entanglement of the normalized ``alpha phi + beta psi``."""
    g, n = _normalized_sum(s)
    if g is None:
        raise NearZeroNorm(f"superposition has norm {n:.3e}")
    return entanglement(g)


def gain(s: Superposition) -> float:
    a2, b2 = s.weights
    return superposition_entanglement(s) - (a2 * entanglement(s.phi) + b2 * entanglement(s.psi))


def ratio(s: Superposition) -> Optional[float]:
    """``E(sum) / upsilon``, or ``None`` when upsilon < 1e-12."""
    e = superposition_entanglement(s)
    u = upsilon(s.phi, s.psi, s.alpha)
    if u < UPSILON_FLOOR:
        return None
    return e / u


def is_orthogonal(phi: StateVector, psi: StateVector, tol: float = 1e-10) -> bool:
    return abs(inner(phi, psi)) <= tol


def biorthogonal_overlaps(phi: StateVector, psi: StateVector) -> tuple[float, float]:
    """``Tr(rho_A(phi) rho_A(psi))`` and ``Tr(rho_B(phi) rho_B(psi))``."""
    _check_dims(phi, psi)
    ra = [reduced_density(x, "A").entries for x in (phi, psi)]
    rb = [reduced_density(x, "B").entries for x in (phi, psi)]
    return (
        abs(float(np.trace(ra[0] @ ra[1]).real)),
        abs(float(np.trace(rb[0] @ rb[1]).real)),
    )


def is_biorthogonal(phi: StateVector, psi: StateVector, tol: float = 1e-10) -> bool:
    return max(biorthogonal_overlaps(phi, psi)) <= tol


def classify(phi: StateVector, psi: StateVector, tol: float = 1e-10) -> str:
    if is_biorthogonal(phi, psi, tol):
        return BIORTHOGONAL
    if is_orthogonal(phi, psi, tol):
        return ORTHOGONAL
    return GENERAL


def _report(s: Superposition, constraint_class: str) -> BoundReport:
    a2, b2 = s.weights
    e_phi = entanglement(s.phi)
    e_psi = entanglement(s.psi)
    h2 = binary_entropy(min(a2, 1.0))
    ups = a2 * e_phi + b2 * e_psi + h2
    g, n_sum = _normalized_sum(s, +1)
    n_diff = float(np.linalg.norm(s.alpha * s.phi.amps - s.beta * s.psi.amps))
    if g is None:
        e_sum = gain_ = ratio_ = None
    else:
        e_sum = entanglement(g)
        gain_ = e_sum - (a2 * e_phi + b2 * e_psi)
        ratio_ = None if ups < UPSILON_FLOOR else e_sum / ups
    return BoundReport(
        e_superposition=e_sum,
        e_phi=e_phi,
        e_psi=e_psi,
        h2_alpha=h2,
        upsilon=ups,
        gain=gain_,
        ratio=ratio_,
        norm_sum=n_sum,
        norm_diff=n_diff,
        bound_rhs=float("nan"),
        satisfied=False,
        constraint_class=constraint_class,
        alpha_sq=a2,
    )


def check_biorthogonal_equality(s: Superposition, tol: float = 1e-10) -> BoundReport:
    """For bi-orthogonal terms, ``E(sum)`` equals upsilon exactly and the gain is at most 1."""
    ov_a, ov_b = biorthogonal_overlaps(s.phi, s.psi)
    if max(ov_a, ov_b) > tol:
        raise NotBiorthogonal(f"reduced-state overlaps ({ov_a:.3e}, {ov_b:.3e}) exceed {tol:g}")
    r = _report(s, BIORTHOGONAL)
    gap = abs(r.e_superposition - r.upsilon)
    r.bound_rhs = r.upsilon
    r.satisfied = gap <= EQUALITY_TOL
    r.details = {
        "equality_gap": gap,
        "overlap_a": ov_a,
        "overlap_b": ov_b,
        "gain_bound_satisfied": r.gain <= 1.0 + BOUND_SLACK,
    }
    return r


def check_orthogonal_bound(s: Superposition, tol: float = 1e-10) -> BoundReport:
    """``E(alpha phi + beta psi) <= 2 upsilon`` for orthogonal terms.

    Also records the sharper two-branch form
    ``E(alpha phi + beta psi) / 2 + E(alpha phi - beta psi) / 2 <= upsilon``.
    """
    ov = abs(inner(s.phi, s.psi))
    if ov > tol:
        raise NotOrthogonal(f"|<phi|psi>| = {ov:.3e} exceeds {tol:g}")
    r = _report(s, ORTHOGONAL)
    d, _ = _normalized_sum(s, -1)
    e_diff = entanglement(d)
    two_branch = 0.5 * r.e_superposition + 0.5 * e_diff
    r.bound_rhs = 2.0 * r.upsilon
    r.satisfied = r.e_superposition <= r.bound_rhs + BOUND_SLACK
    r.details = {
        "overlap": ov,
        "e_difference": e_diff,
        "two_branch_lhs": two_branch,
        "two_branch_satisfied": two_branch <= r.upsilon + BOUND_SLACK,
    }
    return r


def check_general_bound(s: Superposition) -> BoundReport:
    """``||alpha phi + beta psi||^2 E(alpha phi + beta psi) <= 2 upsilon`` for any normalized terms.

    The norm factor is that of the superposition itself; the same inequality
    with ``||alpha phi - beta psi||^2`` is evaluated alongside as
    ``details["minus_form_*"]`` but does not decide ``satisfied``, since it
    fails for nearly cancelling superpositions. A vanishing superposition is
    reported rather than raised: the product form then reads ``0 <= 2 upsilon``.
    """
    r = _report(s, GENERAL)
    r.bound_rhs = 2.0 * r.upsilon
    e = r.e_superposition if r.e_superposition is not None else 0.0
    product_lhs = r.norm_sum**2 * e
    minus_lhs = r.norm_diff**2 * e
    r.satisfied = product_lhs <= r.bound_rhs + BOUND_SLACK
    details: dict[str, Any] = {
        "near_zero_norm": r.e_superposition is None,
        "product_lhs": product_lhs,
        "minus_form_lhs": minus_lhs,
        "minus_form_satisfied": minus_lhs <= r.bound_rhs + BOUND_SLACK,
        "ratio_rhs": None,
        "ratio_form_satisfied": None,
    }
    if r.e_superposition is not None:
        details["ratio_rhs"] = 2.0 / r.norm_sum**2
        if r.ratio is not None:
            details["ratio_form_satisfied"] = r.ratio <= details["ratio_rhs"] + BOUND_SLACK
    r.details = details
    return r


def check_mixing_inequalities(weights: Sequence[float], rhos: Sequence[DensityMatrix]) -> BoundReport:
    """Concavity and the Shannon upper bound for a mixture of density matrices.

    ``sum w_i S(rho_i) <= S(sum w_i rho_i) <= sum w_i S(rho_i) + H(w)``, each
    with 1e-9 slack. Field mapping: ``e_superposition`` holds ``S`` of the
    mixture, ``e_phi``/``e_psi`` the first two component entropies (all of them
    in ``details["entropies"]``), ``h2_alpha`` is ``H(w)``, ``upsilon`` and
    ``bound_rhs`` the upper bound, ``gain`` the mixing excess over the average.
    """
    mixed = mix(weights, rhos)
    w = np.asarray(weights, dtype=float)
    ent = [von_neumann_entropy(r) for r in rhos]
    avg = float(np.dot(w, ent))
    h = shannon_entropy(w)
    s_mix = von_neumann_entropy(mixed)
    upper = avg + h
    lower_ok = avg <= s_mix + MIXING_SLACK
    upper_ok = s_mix <= upper + MIXING_SLACK
    return BoundReport(
        e_superposition=s_mix,
        e_phi=ent[0],
        e_psi=ent[1] if len(ent) > 1 else 0.0,
        h2_alpha=h,
        upsilon=upper,
        gain=s_mix - avg,
        ratio=None if upper < UPSILON_FLOOR else s_mix / upper,
        norm_sum=1.0,
        norm_diff=1.0,
        bound_rhs=upper,
        satisfied=bool(lower_ok and upper_ok),
        constraint_class=GENERAL,
        alpha_sq=float(w[0]),
        details={
            "entropies": ent,
            "lower_satisfied": bool(lower_ok),
            "upper_satisfied": bool(upper_ok),
            "lower_gap": s_mix - avg,
            "upper_gap": upper - s_mix,
        },
    )


def fourier_branches(coeffs: Sequence[complex], states: Sequence[StateVector]) -> list[StateVector]:
    """``Gamma_m = sum_i omega^(m i) c_i state_i`` for ``m = 0..k-1``, ``omega = exp(2 pi i / k)``.

    ``Gamma_0`` is the superposition itself. For mutually orthogonal states
    every branch is normalized and the branches' Bob reductions average to
    Bob's reduction of :func:`ancilla_extension`.
    """
    c = np.asarray(coeffs, dtype=complex)
    k = c.size
    idx = np.arange(k)
    phases = np.exp(2j * np.pi * np.outer(idx, idx) / k)
    stack = np.stack([s.amps for s in states])
    first = states[0]
    return [StateVector(first.dim_a, first.dim_b, (phases[m] * c) @ stack) for m in range(k)]


def multi_term_bound(coeffs: Sequence[complex], states: Sequence[StateVector], tol: float = 1e-10) -> BoundReport:
    """k-term analogue of the orthogonal bound.

    For mutually orthogonal normalized states,
    ``E(sum_i c_i state_i) <= k * (sum_i |c_i|^2 E(state_i) + H(|c|^2))``.
    The k Fourier branches average (with weight 1/k) to Bob's reduced state of
    the ancilla extension, so concavity gives
    ``(1/k) sum_m E(Gamma_m) <= S(rho_B) <= sum_i |c_i|^2 E_i + H``, and dropping
    all branches but ``m = 0`` gives the factor k. ``details`` records the
    branch entropies and the max element-wise deviation of the branch average
    from ``mix(|c|^2, reductions)``.

    In the report, ``upsilon`` is the k-term analogue ``sum |c_i|^2 E_i + H``,
    ``h2_alpha`` is ``H(|c|^2)``, ``e_phi``/``e_psi`` are ``E`` of the first two
    states, and ``bound_rhs = k * upsilon``.
    """
    c = np.asarray(coeffs, dtype=complex)
    k = c.size
    if k < 2 or k != len(states):
        raise StateError("need k >= 2 coefficients, one per state")
    w = np.abs(c) ** 2
    if abs(w.sum() - 1.0) > 1e-10:
        raise StateError("coefficients are not normalized")
    for s in states:
        _require_normalized(s)
    for i in range(k):
        for j in range(i + 1, k):
            ov = abs(inner(states[i], states[j]))
            if ov > tol:
                raise NotOrthogonal(f"states {i} and {j} overlap by {ov:.3e}")

    ents = [entanglement(s) for s in states]
    h = shannon_entropy(w)
    ups = float(np.dot(w, ents)) + h

    branches = fourier_branches(c, states)
    branch_ents = [entanglement(b) for b in branches]
    branch_avg = sum(reduced_density(b, "B").entries for b in branches) / k
    rho_b = mix(w, [reduced_density(s, "B") for s in states])
    deviation = float(np.max(np.abs(branch_avg - rho_b.entries)))
    s_b = von_neumann_entropy(rho_b)

    e_sum = branch_ents[0]
    avg = float(np.dot(w, ents))
    return BoundReport(
        e_superposition=e_sum,
        e_phi=ents[0],
        e_psi=ents[1],
        h2_alpha=h,
        upsilon=ups,
        gain=e_sum - avg,
        ratio=None if ups < UPSILON_FLOOR else e_sum / ups,
        norm_sum=norm(branches[0]),
        norm_diff=norm(branches[1]),
        bound_rhs=k * ups,
        satisfied=e_sum <= k * ups + BOUND_SLACK,
        constraint_class=ORTHOGONAL,
        alpha_sq=float(w[0]),
        details={
            "k": k,
            "entropies": ents,
            "branch_entropies": branch_ents,
            "branch_average_lhs": float(np.mean(branch_ents)),
            "bob_entropy": s_b,
            "fourier_deviation": deviation,
            "branch_average_satisfied": float(np.mean(branch_ents)) <= ups + BOUND_SLACK,
        },
    )


def assess(s: Superposition, constraint_class: Optional[str] = None, tol: float = 1e-10) -> BoundReport:
    """Run the bound that applies to the pair's constraint class (auto-detected by default).

    Bi-orthogonal pairs get the exact equality, orthogonal pairs the factor-two
    bound, anything else the general norm-weighted bound.
    """
    cls = constraint_class or classify(s.phi, s.psi, tol)
    if cls == BIORTHOGONAL:
        return check_biorthogonal_equality(s, tol=tol)
    if cls == ORTHOGONAL:
        return check_orthogonal_bound(s, tol=tol)
    if cls == GENERAL:
        return check_general_bound(s)
    raise ValueError(f"unknown constraint class {cls!r}")
