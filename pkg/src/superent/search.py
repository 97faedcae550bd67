"""Numerical search for extremal superpositions.

Each candidate is a raw real vector holding the real and imaginary parts of
two unnormalized state vectors plus a mixing angle. :func:`parametrize` maps
it onto a superposition that meets the requested constraint exactly (no
penalties). The optimizer is Nelder-Mead with adaptive coefficients, run from
seeded random starting points; all restarts advance in lockstep so each
objective evaluation is one batched SVD call.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Optional, Union

import numpy as np

from .entanglement import (
    BIORTHOGONAL,
    CONSTRAINT_CLASSES,
    GENERAL,
    ORTHOGONAL,
    UPSILON_FLOOR,
    ZERO_EIG,
    BoundReport,
    assess,
    biorthogonal_overlaps,
    check_general_bound,
)
from .states import NEAR_ZERO_NORM, NearZeroNorm, StateVector, Superposition, inner, make_rng

OBJECTIVES = ("gain", "ratio", "product_form_ratio")
SCHMIDT_SUPPORT_TOL = 1e-9
REPORT_TOL = 1e-9

__all__ = [
    "OBJECTIVES",
    "SearchConfig",
    "SearchResult",
    "ReportMismatch",
    "raw_length",
    "parametrize",
    "objective",
    "optimize",
    "verify_result",
    "constraint_residual",
]


class ReportMismatch(AssertionError):
    def __init__(self, field_name: str, stored=None, recomputed=None):
        super().__init__(field_name)
        self.field = field_name
        self.stored = stored
        self.recomputed = recomputed

    def __str__(self):
        return f"{self.field}: stored {self.stored!r}, recomputed {self.recomputed!r}"


@dataclass(frozen=True)
class SearchConfig:
    dim_a: int
    dim_b: int
    constraint: str = ORTHOGONAL
    objective: str = "gain"
    restarts: int = 200
    max_iters_per_restart: int = 2000
    seed: int = 0
    convergence_tol: float = 1e-10
    # "free", or a fixed real alpha in [0, 1]
    alpha_mode: Union[str, float] = "free"

    def __post_init__(self):
        if self.dim_a < 1 or self.dim_b < 1:
            raise ValueError("dimensions must be positive")
        if self.constraint not in CONSTRAINT_CLASSES:
            raise ValueError(f"unknown constraint {self.constraint!r}")
        if self.objective not in OBJECTIVES:
            raise ValueError(f"unknown objective {self.objective!r}")
        if self.restarts < 1 or self.max_iters_per_restart < 1:
            raise ValueError("restarts and max_iters_per_restart must be >= 1")
        if not self.convergence_tol > 0:
            raise ValueError("convergence_tol must be positive")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if self.alpha_mode != "free":
            a = float(self.alpha_mode)
            if not 0.0 <= a <= 1.0:
                raise ValueError("fixed alpha must lie in [0, 1]")

    @property
    def free_alpha(self) -> bool:
        return self.alpha_mode == "free"

    def to_dict(self) -> dict[str, Any]:
        return {
            "dim_a": self.dim_a,
            "dim_b": self.dim_b,
            "constraint": self.constraint,
            "objective": self.objective,
            "restarts": self.restarts,
            "max_iters_per_restart": self.max_iters_per_restart,
            "seed": self.seed,
            "convergence_tol": self.convergence_tol,
            "alpha_mode": self.alpha_mode,
        }


def raw_length(config: SearchConfig) -> int:
    return 4 * config.dim_a * config.dim_b + (1 if config.free_alpha else 0)


# ---------------------------------------------------------------- batched core


def _batch_entropy(mats: np.ndarray) -> np.ndarray:
    s2 = np.linalg.svd(mats, compute_uv=False) ** 2
    safe = np.where(s2 > ZERO_EIG, s2, 1.0)
    return np.maximum(-np.sum(np.where(s2 > ZERO_EIG, s2 * np.log2(safe), 0.0), axis=-1), 0.0)


def _batch_h2(x: np.ndarray) -> np.ndarray:
    return _batch_entropy_vec(np.stack([x, 1.0 - x], axis=-1))


def _batch_entropy_vec(p: np.ndarray) -> np.ndarray:
    safe = np.where(p > ZERO_EIG, p, 1.0)
    return np.maximum(-np.sum(np.where(p > ZERO_EIG, p * np.log2(safe), 0.0), axis=-1), 0.0)


def _normalize_rows(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = np.linalg.norm(v, axis=1)
    ok = n > NEAR_ZERO_NORM
    return v / np.where(ok, n, 1.0)[:, None], ok


def _biorthogonal_split(p: np.ndarray, q: np.ndarray, da: int, db: int):
    """Truncate phi to its dominant Schmidt support and project psi off it on both sides.

    phi keeps the Schmidt components with squared weight >= 1/(2m) (at most
    m - 1 of them, m = min(da, db)) so psi always has room on each side.
    """
    m = min(da, db)
    P = p.reshape(-1, da, db)
    U, s, Vh = np.linalg.svd(P, full_matrices=False)
    rank = np.arange(m)
    keep = (s**2 >= 1.0 / (2 * m)) & (s > SCHMIDT_SUPPORT_TOL) & (rank < max(m - 1, 1))
    keep[:, 0] = s[:, 0] > SCHMIDT_SUPPORT_TOL
    if m == 1:
        keep[:] = False
        keep[:, 0] = True
    sk = s * keep
    Ptr = (U * sk[:, None, :]) @ Vh
    Uk = U * keep[:, None, :]
    Vk = Vh * keep[:, :, None]
    Q = q.reshape(-1, da, db)
    Q = Q - Uk @ (Uk.conj().transpose(0, 2, 1) @ Q)
    Q = Q - (Q @ Vk.conj().transpose(0, 2, 1)) @ Vk
    return Ptr.reshape(-1, da * db), Q.reshape(-1, da * db)


def _parametrize_batch(X: np.ndarray, config: SearchConfig):
    """Map raw rows to (phi, psi, alpha, beta, valid) arrays."""
    da, db = config.dim_a, config.dim_b
    n = da * db
    p = X[:, :n] + 1j * X[:, n : 2 * n]
    q = X[:, 2 * n : 3 * n] + 1j * X[:, 3 * n : 4 * n]
    p, ok_p = _normalize_rows(p)
    if config.constraint == BIORTHOGONAL:
        p, q = _biorthogonal_split(p, q, da, db)
        p, ok_p2 = _normalize_rows(p)
        ok_p &= ok_p2
    elif config.constraint == ORTHOGONAL:
        # two Gram-Schmidt passes keep |<phi|psi>| at rounding level
        for _ in range(2):
            q = q - np.sum(p.conj() * q, axis=1)[:, None] * p
    q, ok_q = _normalize_rows(q)
    if config.constraint == ORTHOGONAL:
        q = q - np.sum(p.conj() * q, axis=1)[:, None] * p
        q, _ = _normalize_rows(q)
    if config.free_alpha:
        theta = X[:, -1]
        a, b = np.abs(np.cos(theta)), np.abs(np.sin(theta))
    else:
        a = np.full(X.shape[0], float(config.alpha_mode))
        b = np.sqrt(1.0 - a**2)
    return p, q, a, b, ok_p & ok_q


def _objective_batch(X: np.ndarray, config: SearchConfig) -> np.ndarray:
    """Objective per raw row; invalid samples score -inf."""
    da, db = config.dim_a, config.dim_b
    p, q, a, b, valid = _parametrize_batch(X, config)
    g = a[:, None] * p + b[:, None] * q
    n_sum = np.linalg.norm(g, axis=1)
    valid &= n_sum > NEAR_ZERO_NORM
    g = g / np.where(valid, n_sum, 1.0)[:, None]
    e_g = _batch_entropy(g.reshape(-1, da, db))
    e_p = _batch_entropy(p.reshape(-1, da, db))
    e_q = _batch_entropy(q.reshape(-1, da, db))
    a2 = a**2
    b2 = 1.0 - a2
    if config.objective == "gain":
        out = e_g - (a2 * e_p + b2 * e_q)
    else:
        ups = a2 * e_p + b2 * e_q + _batch_h2(a2)
        valid &= ups >= UPSILON_FLOOR
        ups = np.where(valid, ups, 1.0)
        if config.objective == "ratio":
            out = e_g / ups
        else:
            out = n_sum**2 * e_g / (2.0 * ups)
    return np.where(valid, out, -np.inf)


def _nelder_mead_batch(fun, X0: np.ndarray, max_iters: int, tol: float):
    """Minimize ``fun`` from every row of ``X0`` with lockstep adaptive Nelder-Mead.

    ``fun`` maps an (m, n) array to m values. Each row's trajectory depends
    only on that row, so results do not depend on how rows are batched.
    Returns (best points, best values, iterations, evaluations) per row.
    """
    R, n = X0.shape
    rho, chi, psi, sigma = 1.0, 1.0 + 2.0 / n, 0.75 - 1.0 / (2.0 * n), 1.0 - 1.0 / n

    S = np.repeat(X0[:, None, :], n + 1, axis=1)
    idx = np.arange(n)
    S[:, idx + 1, idx] += np.where(X0 != 0, 0.05 * X0, 0.00025)
    F = fun(S.reshape(-1, n)).reshape(R, n + 1)
    iters = np.zeros(R, dtype=int)
    evals = np.full(R, n + 1, dtype=int)
    active = np.ones(R, dtype=bool)

    def order():
        nonlocal S, F
        o = np.argsort(F, axis=1, kind="stable")
        S = np.take_along_axis(S, o[:, :, None], axis=1)
        F = np.take_along_axis(F, o, axis=1)

    for _ in range(max_iters):
        order()
        with np.errstate(invalid="ignore"):
            active &= ~(F[:, -1] - F[:, 0] <= tol)
        A = np.flatnonzero(active)
        if A.size == 0:
            break
        iters[A] += 1
        Sa, Fa = S[A], F[A]
        xbar = Sa[:, :-1].mean(axis=1)
        xw = Sa[:, -1]

        xr = xbar + rho * (xbar - xw)
        fr = fun(xr)
        evals[A] += 1
        new_x, new_f = xr.copy(), fr.copy()
        shrink = np.zeros(A.size, dtype=bool)

        m = fr < Fa[:, 0]
        if m.any():
            xe = xbar[m] + rho * chi * (xbar[m] - xw[m])
            fe = fun(xe)
            evals[A[m]] += 1
            take = fe < fr[m]
            sel = np.flatnonzero(m)[take]
            new_x[sel], new_f[sel] = xe[take], fe[take]

        m = (fr >= Fa[:, -2]) & (fr < Fa[:, -1])
        if m.any():
            xc = xbar[m] + psi * rho * (xbar[m] - xw[m])
            fc = fun(xc)
            evals[A[m]] += 1
            take = fc <= fr[m]
            rows = np.flatnonzero(m)
            new_x[rows[take]], new_f[rows[take]] = xc[take], fc[take]
            shrink[rows[~take]] = True

        m = ~(fr < Fa[:, -1])
        if m.any():
            xc = xbar[m] - psi * (xbar[m] - xw[m])
            fc = fun(xc)
            evals[A[m]] += 1
            take = fc < Fa[m, -1]
            rows = np.flatnonzero(m)
            new_x[rows[take]], new_f[rows[take]] = xc[take], fc[take]
            shrink[rows[~take]] = True

        keep = ~shrink
        Sa[keep, -1], Fa[keep, -1] = new_x[keep], new_f[keep]
        if shrink.any():
            ss = Sa[shrink]
            ss[:, 1:] = ss[:, :1] + sigma * (ss[:, 1:] - ss[:, :1])
            fs = fun(ss[:, 1:].reshape(-1, n)).reshape(-1, n)
            evals[A[shrink]] += n
            fa = Fa[shrink]
            fa[:, 1:] = fs
            Sa[shrink], Fa[shrink] = ss, fa
        S[A], F[A] = Sa, Fa

    order()
    return S[:, 0].copy(), F[:, 0].copy(), iters, evals


# ---------------------------------------------------------------- public API


def parametrize(raw, config: SearchConfig) -> Superposition:
    """Superposition encoded by ``raw``, constraint enforced by construction.

    Raises
    ------
    NearZeroNorm
        If a state vanishes after normalization or projection.
    """
    X = np.asarray(raw, dtype=float)
    if X.shape != (raw_length(config),):
        raise ValueError(f"raw has shape {X.shape}, expected ({raw_length(config)},)")
    p, q, a, b, valid = _parametrize_batch(X[None, :], config)
    if not valid[0]:
        raise NearZeroNorm("raw point degenerates under the constraint projection")
    da, db = config.dim_a, config.dim_b
    return Superposition(float(a[0]), float(b[0]), StateVector(da, db, p[0]), StateVector(da, db, q[0]))


def objective(s: Superposition, config: SearchConfig) -> float:
    """Objective of a superposition through the scalar entanglement path; invalid -> -inf."""
    try:
        if config.objective == "gain":
            r = assess(s, GENERAL)
            return -math.inf if r.gain is None else r.gain
        r = check_general_bound(s)
        if r.ratio is None:
            return -math.inf
        if config.objective == "ratio":
            return r.ratio
        return r.details["product_lhs"] / r.bound_rhs
    except NearZeroNorm:
        return -math.inf


def constraint_residual(s: Superposition, constraint: str) -> float:
    """How far the pair is from meeting ``constraint`` (0 when exact)."""
    if constraint == BIORTHOGONAL:
        return max(biorthogonal_overlaps(s.phi, s.psi))
    if constraint == ORTHOGONAL:
        return abs(inner(s.phi, s.psi))
    return max(abs(np.linalg.norm(s.phi.amps) - 1.0), abs(np.linalg.norm(s.psi.amps) - 1.0))


@dataclass
class SearchResult:
    best_objective: float
    best_superposition: Optional[Superposition]
    constraint_residual: float
    report: Optional[BoundReport]
    restart_index: int
    iterations_used: int
    seed: int
    config: SearchConfig
    empty: bool = False
    best_raw: Optional[np.ndarray] = field(default=None, repr=False)
    evaluations: int = 0

    def to_dict(self) -> dict[str, Any]:
        from .io import superposition_to_dict

        return {
            "best_objective": None if self.empty else self.best_objective,
            "empty": self.empty,
            "best_superposition": None if self.empty else superposition_to_dict(self.best_superposition),
            "constraint_residual": self.constraint_residual,
            "report": None if self.report is None else self.report.to_dict(),
            "restart_index": self.restart_index,
            "iterations_used": self.iterations_used,
            "evaluations": self.evaluations,
            "seed": self.seed,
            "config": self.config.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SearchResult":
        from .io import superposition_from_dict

        empty = bool(data.get("empty", False))
        return cls(
            best_objective=-math.inf if empty else float(data["best_objective"]),
            best_superposition=None if empty else superposition_from_dict(data["best_superposition"]),
            constraint_residual=float(data["constraint_residual"]),
            report=None if data["report"] is None else BoundReport.from_dict(data["report"]),
            restart_index=int(data["restart_index"]),
            iterations_used=int(data["iterations_used"]),
            seed=int(data["seed"]),
            config=SearchConfig(**data["config"]),
            empty=empty,
            evaluations=int(data.get("evaluations", 0)),
        )


def _initial_point(config: SearchConfig, restart: int) -> np.ndarray:
    rng = make_rng(config.seed, restart)
    x = rng.standard_normal(raw_length(config))
    if config.free_alpha:
        x[-1] = rng.uniform(0.0, 0.5 * math.pi)
    return x


def _run_restarts(config: SearchConfig, restarts: np.ndarray):
    X0 = np.stack([_initial_point(config, int(i)) for i in restarts])
    return _nelder_mead_batch(
        lambda X: -_objective_batch(X, config),
        X0,
        config.max_iters_per_restart,
        config.convergence_tol,
    )


def optimize(config: SearchConfig, threads: int = 1) -> SearchResult:
    """Best superposition over ``config.restarts`` seeded Nelder-Mead runs.

    Restart ``i`` starts from a point drawn from ``make_rng(seed, i)``, so the
    outcome is independent of ``threads``; ties go to the lowest restart index.
    """
    idx = np.arange(config.restarts)
    chunks = [c for c in np.array_split(idx, max(1, min(threads, config.restarts))) if c.size]
    if len(chunks) == 1:
        parts = [_run_restarts(config, chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(lambda c: _run_restarts(config, c), chunks))
    X = np.concatenate([p[0] for p in parts])
    F = np.concatenate([p[1] for p in parts])
    iters = np.concatenate([p[2] for p in parts])
    evals = int(sum(p[3].sum() for p in parts))

    values = -F
    best = int(np.argmax(values))
    if not np.isfinite(values[best]):
        return SearchResult(
            best_objective=-math.inf,
            best_superposition=None,
            constraint_residual=0.0,
            report=None,
            restart_index=-1,
            iterations_used=int(iters.max(initial=0)),
            seed=config.seed,
            config=config,
            empty=True,
            evaluations=evals,
        )
    s = parametrize(X[best], config)
    return SearchResult(
        best_objective=float(values[best]),
        best_superposition=s,
        constraint_residual=constraint_residual(s, config.constraint),
        report=assess(s, config.constraint),
        restart_index=best,
        iterations_used=int(iters[best]),
        seed=config.seed,
        config=config,
        best_raw=X[best],
        evaluations=evals,
    )


def _compare(name: str, stored, fresh, tol: float) -> None:
    if stored is None or fresh is None:
        if stored is not fresh:
            raise ReportMismatch(name, stored, fresh)
        return
    if isinstance(fresh, bool) or isinstance(fresh, str):
        if stored != fresh:
            raise ReportMismatch(name, stored, fresh)
        return
    if isinstance(fresh, (list, tuple)):
        if len(stored) != len(fresh):
            raise ReportMismatch(name, stored, fresh)
        for i, (a, b) in enumerate(zip(stored, fresh)):
            _compare(f"{name}[{i}]", a, b, tol)
        return
    if isinstance(fresh, dict):
        for key, value in fresh.items():
            _compare(f"{name}.{key}", stored.get(key) if isinstance(stored, dict) else None, value, tol)
        return
    if not abs(float(stored) - float(fresh)) <= tol:
        raise ReportMismatch(name, stored, fresh)


def verify_result(r: SearchResult, tol: float = REPORT_TOL) -> BoundReport:
    """Recompute the report and objective from the stored superposition.

    Raises
    ------
    ReportMismatch
        Naming the first field that deviates by more than ``tol``.
    """
    if r.empty:
        if r.report is not None:
            raise ReportMismatch("report", r.report, None)
        return None
    fresh = assess(r.best_superposition, r.config.constraint)
    stored = r.report.to_dict()
    for name, value in fresh.to_dict().items():
        if name == "details":
            _compare("details", stored["details"], value, tol)
        else:
            _compare(name, stored[name], value, tol)
    _compare("best_objective", r.best_objective, objective(r.best_superposition, r.config), tol)
    residual = constraint_residual(r.best_superposition, r.config.constraint)
    _compare("constraint_residual", r.constraint_residual, residual, tol)
    return fresh
