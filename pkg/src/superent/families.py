"""Parametric example families with their analytic expectations.

Level labels 1..d in the closed forms map to 0-based indices here; every constructor
owns that mapping. Expectations that only hold in a limit live in
``FamilyInstance.limits`` together with the parameter grid along which the
approach is checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .entanglement import (
    BIORTHOGONAL,
    GENERAL,
    ORTHOGONAL,
    BoundReport,
    assess,
    binary_entropy,
    shannon_entropy,
)
from .states import StateVector, Superposition, basis_state

__all__ = [
    "FamilyDomainError",
    "FamilyInstance",
    "family_high_fidelity",
    "family_biorthogonal",
    "family_qubit_ratio",
    "family_orthogonal_d",
    "family_nonorthogonal",
    "FAMILIES",
    "build_family",
]

SQRT_HALF = math.sqrt(0.5)


class FamilyDomainError(ValueError):
    pass


@dataclass
class FamilyInstance:
    name: str
    params: dict[str, float]
    superposition: Superposition
    constraint_class: str
    expectations: dict[str, float] = field(default_factory=dict)
    limits: dict[str, dict[str, Any]] = field(default_factory=dict)
    notes: dict[str, Any] = field(default_factory=dict)

    def report(self) -> BoundReport:
        return assess(self.superposition, self.constraint_class)


def _diag_state(dim: int, diag: Sequence[float]) -> StateVector:
    """``sum_i diag[i] |i>|i>`` on (dim, dim)."""
    m = np.zeros((dim, dim), dtype=complex)
    m[np.arange(len(diag)), np.arange(len(diag))] = diag
    return StateVector(dim, dim, m.ravel())


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise FamilyDomainError(msg)


def family_high_fidelity(eps: float, d: int) -> FamilyInstance:
    """``phi = |00>``, ``psi = sqrt(1-eps)|00> + sqrt(eps/d) sum_{i=1..d} |ii>`` on (d+1, d+1).

    The two states have fidelity ``1 - eps`` yet ``E(psi)`` grows like
    ``eps log2 d``. The superposition carried along is the even one
    (``alpha = beta = 1/sqrt 2``).
    """
    _require(0.0 < eps < 1.0, f"eps must lie in (0, 1), got {eps!r}")
    _require(int(d) == d and d >= 1, f"d must be an integer >= 1, got {d!r}")
    d = int(d)
    phi = basis_state(d + 1, d + 1, 0, 0)
    psi = _diag_state(d + 1, [math.sqrt(1.0 - eps)] + [math.sqrt(eps / d)] * d)
    e_psi = -(1.0 - eps) * math.log2(1.0 - eps) - d * ((eps / d) * math.log2(eps / d))
    return FamilyInstance(
        name="high_fidelity",
        params={"eps": eps, "d": d},
        superposition=Superposition(SQRT_HALF, SQRT_HALF, phi, psi),
        constraint_class=GENERAL,
        expectations={
            "e_phi": 0.0,
            "e_psi": e_psi,
            "fidelity": 1.0 - eps,
            "approx_e_psi": eps * math.log2(d),
            # e_psi - eps*log2(d), exactly
            "approx_error": binary_entropy(eps),
        },
    )


def family_biorthogonal(a: Sequence[float], b: Sequence[float], alpha: complex) -> FamilyInstance:
    """``Phi = sum a_i |ii>`` on the first len(a) levels, ``Psi = sum b_i |ii>`` on the rest."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    _require(a.size > 0 and b.size > 0, "a and b must be nonempty")
    _require(bool(np.all(a > 0) and np.all(b > 0)), "a and b must be positive")
    _require(abs(np.sum(a**2) - 1.0) <= 1e-10, f"sum(a^2) = {np.sum(a**2)!r}, expected 1")
    _require(abs(np.sum(b**2) - 1.0) <= 1e-10, f"sum(b^2) = {np.sum(b**2)!r}, expected 1")
    alpha = complex(alpha)
    a2 = abs(alpha) ** 2
    _require(a2 <= 1.0 + 1e-12, f"|alpha| = {abs(alpha)!r} exceeds 1")
    a2 = min(a2, 1.0)
    beta = math.sqrt(1.0 - a2)
    d = a.size + b.size
    phi = _diag_state(d, np.concatenate([a, np.zeros(b.size)]))
    psi = _diag_state(d, np.concatenate([np.zeros(a.size), b]))
    e_phi = shannon_entropy(a**2)
    e_psi = shannon_entropy(b**2)
    h = binary_entropy(a2)
    ups = a2 * e_phi + (1.0 - a2) * e_psi + h
    expectations = {
        "e_phi": e_phi,
        "e_psi": e_psi,
        "upsilon": ups,
        "e_superposition": ups,
        "gain": h,
    }
    if ups >= 1e-12:
        expectations["ratio"] = 1.0
    return FamilyInstance(
        name="biorthogonal",
        params={"d1": a.size, "d2": b.size, "alpha": alpha.real if alpha.imag == 0 else alpha},
        superposition=Superposition(alpha, beta, phi, psi),
        constraint_class=BIORTHOGONAL,
        expectations=expectations,
    )


def qubit_ratio_limit(x: float) -> float:
    return (1.0 + 2.0 * x) ** 2 / (1.0 + 4.0 * x**2)


def family_qubit_ratio(x: float, y: float) -> FamilyInstance:
    """Two-qubit orthogonal pair whose ratio tends to ``(1+2x)^2 / (1+4x^2)`` as y -> 0.

    ``phi = |00>``, ``psi = sqrt(y/2)(|01> + |10>) - sqrt(1-y)|11>``,
    ``alpha = x y``, ``beta = sqrt(1 - alpha^2)``. The approach is slow,
    roughly linear in ``1 / log(1/y)``.
    """
    _require(x > 0, f"x must be positive, got {x!r}")
    _require(0.0 < y <= 1.0, f"y must lie in (0, 1], got {y!r}")
    alpha = x * y
    _require(alpha <= 1.0, f"alpha = x*y = {alpha!r} exceeds 1")
    phi = basis_state(2, 2, 0, 0)
    psi = StateVector(2, 2, [0.0, math.sqrt(y / 2), math.sqrt(y / 2), -math.sqrt(1.0 - y)])
    return FamilyInstance(
        name="qubit_ratio",
        params={"x": x, "y": y},
        superposition=Superposition(alpha, math.sqrt(1.0 - alpha**2), phi, psi),
        constraint_class=ORTHOGONAL,
        expectations={"e_phi": 0.0},
        limits={
            "ratio": {"value": qubit_ratio_limit(x), "param": "y", "to": 0.0, "grid": [1e-2, 1e-3, 1e-4]},
        },
    )


def family_orthogonal_d(d: int) -> FamilyInstance:
    """Orthogonal pair on (d, d) whose gain ``log2(d-1)/2 - 1`` is unbounded in d.

    ``phi', psi' = (|11> +- (d-1)^(-1/2) sum_{i=2..d} |ii>) / sqrt 2`` and
    ``alpha = -beta = 1/sqrt 2``; the superposition is maximally entangled on
    levels 2..d.
    """
    _require(int(d) == d and d >= 2, f"d must be an integer >= 2, got {d!r}")
    d = int(d)
    tail = [1.0 / math.sqrt(d - 1)] * (d - 1)
    phi = _diag_state(d, SQRT_HALF * np.array([1.0] + tail))
    psi = _diag_state(d, SQRT_HALF * np.array([1.0] + [-t for t in tail]))
    lg = math.log2(d - 1)
    e_term = 0.5 * lg + 1.0
    ups = e_term + 1.0
    return FamilyInstance(
        name="orthogonal_d",
        params={"d": d},
        superposition=Superposition(SQRT_HALF, -SQRT_HALF, phi, psi),
        constraint_class=ORTHOGONAL,
        expectations={
            "e_phi": e_term,
            "e_psi": e_term,
            "e_superposition": lg,
            "upsilon": ups,
            "gain": 0.5 * lg - 1.0,
            "ratio": lg / ups,
        },
        limits={"ratio": {"value": 2.0, "param": "d", "to": math.inf, "grid": [17, 65, 257, 1025]}},
    )


def family_nonorthogonal(eps: float, d: int) -> FamilyInstance:
    """Non-orthogonal pair whose normalized superposition is maximally entangled.

    ``phi = |11>`` and the raw ``psi = sqrt(1-eps)|11> - eps/sqrt(d) sum_{i=1..d} |ii>``.
    The raw ``psi`` has norm below 1 for finite eps, so it is renormalized
    (raw norm kept in ``notes["raw_norm"]``) and the coefficients are taken as
    ``alpha : beta = sqrt(1-eps)/raw_norm : -1``, normalized. With these the
    ``|11>`` contributions cancel exactly and ``E = log2 d`` at every eps. For
    raw_norm -> 1 they reduce to ``alpha = sqrt(1-eps)/sqrt(2-eps)``,
    ``beta = -1/sqrt(2-eps)``, which are kept in ``notes`` for reference.
    """
    _require(0.0 < eps < 1.0, f"eps must lie in (0, 1), got {eps!r}")
    _require(int(d) == d and d >= 1, f"d must be an integer >= 1, got {d!r}")
    d = int(d)
    phi = basis_state(d, d, 0, 0)
    diag = np.full(d, -eps / math.sqrt(d))
    diag[0] += math.sqrt(1.0 - eps)
    raw = _diag_state(d, diag)
    raw_norm = float(np.linalg.norm(raw.amps))
    _require(raw_norm > 1e-12, f"psi vanishes at eps={eps!r}, d={d}")
    psi = StateVector(d, d, raw.amps / raw_norm)
    c = math.sqrt(1.0 - eps) / raw_norm
    scale = math.sqrt(1.0 + c * c)
    alpha, beta = c / scale, -1.0 / scale
    lg = math.log2(d)
    return FamilyInstance(
        name="nonorthogonal",
        params={"eps": eps, "d": d},
        superposition=Superposition(alpha, beta, phi, psi),
        constraint_class=GENERAL,
        expectations={"e_phi": 0.0, "e_superposition": lg},
        limits={
            "ratio": {"value": lg, "param": "eps", "to": 0.0, "grid": [1e-2, 1e-4, 1e-6]},
            "gain": {"value": lg, "param": "eps", "to": 0.0, "grid": [1e-2, 1e-4, 1e-6]},
        },
        notes={
            "raw_norm": raw_norm,
            "raw_norm_sq_closed_form": 1.0 - eps - 2.0 * eps * math.sqrt((1.0 - eps) / d) + eps**2,
            "unadjusted_alpha": math.sqrt(1.0 - eps) / math.sqrt(2.0 - eps),
            "unadjusted_beta": -1.0 / math.sqrt(2.0 - eps),
        },
    )


def _biorthogonal_grid(alpha: float, d1: int, d2: int) -> FamilyInstance:
    _require(int(d1) == d1 and d1 >= 1 and int(d2) == d2 and d2 >= 1, "d1 and d2 must be integers >= 1")
    d1, d2 = int(d1), int(d2)
    _require(0.0 <= alpha <= 1.0, f"alpha must lie in [0, 1], got {alpha!r}")
    return family_biorthogonal(np.full(d1, 1 / math.sqrt(d1)), np.full(d2, 1 / math.sqrt(d2)), alpha)


@dataclass(frozen=True)
class FamilySpec:
    build: Callable[..., FamilyInstance]
    defaults: dict[str, float]
    integer: frozenset = frozenset()


FAMILIES: dict[str, FamilySpec] = {
    "high_fidelity": FamilySpec(family_high_fidelity, {"eps": 0.1, "d": 4}, frozenset({"d"})),
    # uniform Schmidt coefficients on d1 and d2 levels
    "biorthogonal": FamilySpec(_biorthogonal_grid, {"alpha": SQRT_HALF, "d1": 1, "d2": 1}, frozenset({"d1", "d2"})),
    "qubit_ratio": FamilySpec(family_qubit_ratio, {"x": 0.5, "y": 1e-3}),
    "orthogonal_d": FamilySpec(family_orthogonal_d, {"d": 17}, frozenset({"d"})),
    "nonorthogonal": FamilySpec(family_nonorthogonal, {"eps": 1e-4, "d": 16}, frozenset({"d"})),
}


def build_family(name: str, **params: float) -> FamilyInstance:
    """Construct a registered family from scalar parameters, filling in defaults."""
    if name not in FAMILIES:
        raise KeyError(name)
    spec = FAMILIES[name]
    unknown = set(params) - set(spec.defaults)
    if unknown:
        raise KeyError(sorted(unknown)[0])
    full = {**spec.defaults, **params}
    for k in spec.integer:
        v = full[k]
        _require(float(v).is_integer(), f"{k} must be an integer, got {v!r}")
        full[k] = int(round(v))
    return spec.build(**full)
