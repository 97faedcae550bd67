"""Command-line front end.

Exit codes: 0 success, 1 a randomized ``check`` found a violation, 2 bad
arguments or unparseable input, 3 normalization failure, 4 vanishing
superposition, 5 family parameter outside its domain.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import itertools
import math
import sys
import time
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import numpy as np

from . import ensembles
from .entanglement import (
    BIORTHOGONAL,
    CONSTRAINT_CLASSES,
    ORTHOGONAL,
    assess,
    check_biorthogonal_equality,
    check_general_bound,
    check_mixing_inequalities,
    check_orthogonal_bound,
    classify,
    entanglement,
    multi_term_bound,
    schmidt_rank,
    schmidt_spectrum,
)
from .families import FAMILIES, FamilyDomainError, build_family
from .io import StateFileError, atomic_write, complex_to_pair, dumps, format_number, read_state, write_state
from .search import OBJECTIVES, SearchConfig, optimize
from .states import NEAR_ZERO_NORM, StateVector, Superposition, make_rng, norm

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NORMALIZATION = 3
EXIT_NEAR_ZERO = 4
EXIT_DOMAIN = 5

IO_NORM_TOL = 1e-6

CSV_TAIL = ["norm_sum", "e_phi", "e_psi", "e_superposition", "upsilon", "gain", "ratio", "satisfied"]


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _emit(text: str, output: Optional[str]) -> None:
    if output is None or output == "-":
        sys.stdout.write(text)
    else:
        atomic_write(output, text)


def _load_normalized(path: str, label: str) -> StateVector:
    try:
        psi = read_state(path)
    except StateFileError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from exc
    n = norm(psi)
    if abs(n - 1.0) > IO_NORM_TOL:
        raise CliError(EXIT_NORMALIZATION, f"{path}: field 'amps' of {label} has norm {n!r}, expected 1 within {IO_NORM_TOL:g}")
    return StateVector(psi.dim_a, psi.dim_b, psi.amps / n)


def _parse_complex(text: str, flag: str) -> complex:
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise CliError(EXIT_USAGE, f"{flag} expects 're,im', got {text!r}")


# ---------------------------------------------------------------- entropy


def cmd_entropy(args) -> int:
    psi = _load_normalized(args.state, "state")
    spec = schmidt_spectrum(psi)
    out = {
        "entanglement": entanglement(psi),
        "schmidt_coefficients": spec.coeffs.tolist(),
        "schmidt_rank": schmidt_rank(psi),
        "dim_a": psi.dim_a,
        "dim_b": psi.dim_b,
    }
    _emit(dumps(out), args.output)
    return EXIT_OK


# ---------------------------------------------------------------- superpose


def superposition_verdicts(s: Superposition, cls: str) -> dict[str, Any]:
    """Every bound that applies to a pair of class ``cls``, by name."""
    verdicts: dict[str, Any] = {}
    if cls == BIORTHOGONAL:
        r = check_biorthogonal_equality(s)
        verdicts["biorthogonal_equality"] = r.satisfied
        verdicts["gain_at_most_one"] = r.details["gain_bound_satisfied"]
    if cls in (BIORTHOGONAL, ORTHOGONAL):
        r = check_orthogonal_bound(s)
        verdicts["orthogonal_ratio_at_most_two"] = r.satisfied
        verdicts["two_branch_average"] = r.details["two_branch_satisfied"]
    verdicts["general_product_form"] = check_general_bound(s).satisfied
    return verdicts


def cmd_superpose(args) -> int:
    phi = _load_normalized(args.phi, "phi")
    psi = _load_normalized(args.psi, "psi")
    if phi.dims != psi.dims:
        raise CliError(EXIT_USAGE, f"phi has dims {phi.dims} but psi has dims {psi.dims}")
    alpha = _parse_complex(args.alpha, "--alpha")
    if args.auto_beta:
        a2 = abs(alpha) ** 2
        if a2 > 1.0 + IO_NORM_TOL:
            raise CliError(EXIT_NORMALIZATION, f"--alpha has |alpha|^2 = {a2!r} > 1")
        beta = complex(math.sqrt(max(0.0, 1.0 - a2)))
    else:
        if args.beta is None:
            raise CliError(EXIT_USAGE, "give --beta or --auto-beta")
        beta = _parse_complex(args.beta, "--beta")
    total = abs(alpha) ** 2 + abs(beta) ** 2
    if abs(total - 1.0) > IO_NORM_TOL:
        raise CliError(EXIT_NORMALIZATION, f"|alpha|^2 + |beta|^2 = {total!r}, expected 1 within {IO_NORM_TOL:g}")
    scale = math.sqrt(total)
    s = Superposition(alpha / scale, beta / scale, phi, psi)
    if float(np.linalg.norm(s.alpha * phi.amps + s.beta * psi.amps)) <= NEAR_ZERO_NORM:
        raise CliError(EXIT_NEAR_ZERO, "alpha*phi + beta*psi vanishes (norm <= 1e-12)")
    cls = classify(phi, psi, args.tol)
    report = assess(s, cls, tol=args.tol)
    out = report.to_dict()
    out["alpha"] = complex_to_pair(s.alpha)
    out["beta"] = complex_to_pair(s.beta)
    out["verdicts"] = superposition_verdicts(s, cls)
    _emit(dumps(out), args.output)
    return EXIT_OK


# ---------------------------------------------------------------- family


def parse_grid(spec: str) -> list[tuple[str, list[float]]]:
    """Parse ``name=start:stop:steps[,log]`` entries separated by commas.

    ``name=value`` is a single point. Parameters keep their order of appearance.
    """
    grid: list[tuple[str, list[float]]] = []
    pending: Optional[tuple[str, float, float, int, bool]] = None

    def flush():
        if pending is None:
            return
        name, start, stop, steps, log = pending
        if log:
            if start <= 0 or stop <= 0:
                raise CliError(EXIT_USAGE, f"log grid for {name} needs positive endpoints")
            values = np.geomspace(start, stop, steps)
        else:
            values = np.linspace(start, stop, steps)
        if steps >= 2:
            values[0], values[-1] = start, stop
        grid.append((name, [float(v) for v in values]))

    for token in (t.strip() for t in spec.split(",")):
        if not token:
            continue
        if token in ("log", "lin"):
            if pending is None:
                raise CliError(EXIT_USAGE, f"grid spec {spec!r}: '{token}' must follow a parameter")
            pending = pending[:4] + (token == "log",)
            continue
        flush()
        if "=" not in token:
            raise CliError(EXIT_USAGE, f"grid entry {token!r} is not name=start:stop:steps")
        name, rng = token.split("=", 1)
        fields = rng.split(":")
        try:
            if len(fields) == 1:
                start = stop = float(fields[0])
                steps = 1
            elif len(fields) == 3:
                start, stop, steps = float(fields[0]), float(fields[1]), int(fields[2])
            else:
                raise ValueError
        except ValueError:
            raise CliError(EXIT_USAGE, f"grid entry {token!r} is not name=start:stop:steps") from None
        if steps < 1:
            raise CliError(EXIT_USAGE, f"grid entry {token!r} needs steps >= 1")
        if any(name == g[0] for g in grid):
            raise CliError(EXIT_USAGE, f"parameter {name!r} appears twice in the grid")
        pending = (name.strip(), start, stop, steps, False)
    flush()
    return grid


def family_rows(name: str, grid: Sequence[tuple[str, list[float]]]) -> tuple[list[str], list[list[str]]]:
    if name not in FAMILIES:
        raise CliError(EXIT_USAGE, f"unknown family {name!r}; choose from {', '.join(FAMILIES)}")
    spec = FAMILIES[name]
    for pname, _ in grid:
        if pname not in spec.defaults:
            raise CliError(EXIT_USAGE, f"family {name!r} has no parameter {pname!r}; parameters: {', '.join(spec.defaults)}")
    names = list(spec.defaults)
    header = ["family", *names, *CSV_TAIL]
    rows = []
    for row_idx, combo in enumerate(itertools.product(*(values for _, values in grid))):
        params = {pname: value for (pname, _), value in zip(grid, combo)}
        for k in spec.integer & params.keys():
            params[k] = int(round(params[k]))
        try:
            inst = build_family(name, **params)
        except FamilyDomainError as exc:
            shown = ", ".join(f"{k}={v!r}" for k, v in params.items())
            raise CliError(EXIT_DOMAIN, f"row {row_idx} ({shown}): {exc}") from exc
        r = inst.report()
        full = {**spec.defaults, **params}
        rows.append(
            [name]
            + [format_number(full[k]) for k in names]
            + [format_number(getattr(r, col)) for col in CSV_TAIL]
        )
    return header, rows


def cmd_family(args) -> int:
    grid = parse_grid(args.grid or "")
    header, rows = family_rows(args.name, grid)
    if args.format == "json":
        text = dumps([dict(zip(header, row)) for row in rows])
    else:
        buf = _io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        text = buf.getvalue()
    _emit(text, args.output)
    return EXIT_OK


# ---------------------------------------------------------------- check


def _trial_biorthogonal(d, seed, i):
    s = ensembles.random_biorthogonal_pair(d, d // 2, make_rng(seed, i))
    return check_biorthogonal_equality(s)


def _trial_orthogonal(d, seed, i):
    return check_orthogonal_bound(ensembles.random_orthogonal_pair(d, d, make_rng(seed, i)))


def _trial_general(d, seed, i):
    return check_general_bound(ensembles.random_pair(d, d, make_rng(seed, i)))


def _trial_mixing(d, seed, i):
    rng = make_rng(seed, i)
    rhos = [ensembles.random_density_matrix(d, rng), ensembles.random_density_matrix(d, rng)]
    a2 = rng.uniform()
    return check_mixing_inequalities([a2, 1.0 - a2], rhos)


def _trial_multi(d, seed, i, k=3):
    rng = make_rng(seed, i)
    states = ensembles.random_orthonormal_states(k, d, d, rng)
    return multi_term_bound(ensembles.random_coefficients(k, rng), states)


CHECKS: dict[str, Callable] = {
    "biorthogonal": _trial_biorthogonal,
    "orthogonal": _trial_orthogonal,
    "general": _trial_general,
    "mixing": _trial_mixing,
    "multi": _trial_multi,
}


def cmd_check(args) -> int:
    trial = CHECKS[args.bound]
    reports = [trial(args.d, args.seed, i) for i in range(args.trials)]
    if args.format == "csv":
        buf = _io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["trial", *CSV_TAIL])
        for i, r in enumerate(reports):
            writer.writerow([i] + [format_number(getattr(r, c)) for c in CSV_TAIL])
        text = buf.getvalue()
    else:
        slack = [r.bound_rhs - (r.e_superposition or 0.0) for r in reports]
        ratios = [r.ratio for r in reports if r.ratio is not None]
        text = dumps(
            {
                "bound": args.bound,
                "d": args.d,
                "seed": args.seed,
                "trials": args.trials,
                "violations": [i for i, r in enumerate(reports) if not r.satisfied],
                "all_satisfied": all(r.satisfied for r in reports),
                "min_slack": min(slack) if slack else None,
                "max_ratio": max(ratios) if ratios else None,
                "max_gain": max((r.gain for r in reports if r.gain is not None), default=None),
            }
        )
    _emit(text, args.output)
    return EXIT_OK if all(r.satisfied for r in reports) else 1


# ---------------------------------------------------------------- search


def cmd_search(args) -> int:
    dim_a = args.dim_a or args.d
    dim_b = args.dim_b or args.d
    if not dim_a or not dim_b:
        raise CliError(EXIT_USAGE, "give --d or both --dim-a and --dim-b")
    try:
        config = SearchConfig(
            dim_a=dim_a,
            dim_b=dim_b,
            constraint=args.constraint,
            objective=args.objective,
            restarts=args.restarts,
            max_iters_per_restart=args.max_iters,
            seed=args.seed,
            convergence_tol=args.tol,
            alpha_mode="free" if args.alpha is None else args.alpha,
        )
    except ValueError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from exc
    t0 = time.perf_counter()
    result = optimize(config, threads=args.threads)
    out = result.to_dict()
    out["elapsed_seconds"] = time.perf_counter() - t0
    if args.dump_best and not result.empty:
        dest = Path(args.dump_best)
        dest.mkdir(parents=True, exist_ok=True)
        s = result.best_superposition
        write_state(dest / "phi.json", s.phi)
        write_state(dest / "psi.json", s.psi)
        atomic_write(dest / "coeffs.json", dumps({"alpha": complex_to_pair(s.alpha), "beta": complex_to_pair(s.beta)}))
        out["dumped_to"] = str(dest)
    _emit(dumps(out), args.output)
    return EXIT_OK


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(EXIT_USAGE, f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="superent", description="Entanglement of superpositions of bipartite pure states.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("entropy", help="entanglement and Schmidt data of a state file")
    p.add_argument("state")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("superpose", help="bound report for alpha*phi + beta*psi")
    p.add_argument("phi")
    p.add_argument("psi")
    p.add_argument("--alpha", required=True, help="re,im (use --alpha=-0.5,0 for negative values)")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--beta", default=None, help="re,im")
    g.add_argument("--auto-beta", action="store_true", help="beta = sqrt(1 - |alpha|^2)")
    p.add_argument("--tol", type=float, default=1e-10, help="orthogonality tolerance for class detection")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_superpose)

    p = sub.add_parser("family", help="sweep an example family over a parameter grid")
    p.add_argument("--name", required=True, choices=sorted(FAMILIES))
    p.add_argument("--grid", default="", help="name=start:stop:steps[,log],...")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("check", help="randomized verification of one bound")
    p.add_argument("--bound", required=True, choices=sorted(CHECKS))
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--d", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("search", help="search for extremal superpositions")
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--dim-a", type=int, default=None)
    p.add_argument("--dim-b", type=int, default=None)
    p.add_argument("--constraint", choices=CONSTRAINT_CLASSES, default=ORTHOGONAL)
    p.add_argument("--objective", choices=OBJECTIVES, default="gain")
    p.add_argument("--restarts", type=int, default=200)
    p.add_argument("--max-iters", type=int, default=2000)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=float, default=None, help="fix alpha (real) instead of searching it")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--dump-best", default=None, metavar="DIR")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_search)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
