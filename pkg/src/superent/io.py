"""JSON state files and lossless numeric output.

State file::

    {"dim_a": 2, "dim_b": 2, "amps": [[0.7071067811865476, 0.0], ...]}

with ``amps`` in A-major order as ``[re, im]`` pairs. Floats are written with
Python's shortest round-trip repr, which reproduces every double exactly.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Union

import numpy as np

from .states import StateVector, Superposition


class StateFileError(ValueError):
    """Unparseable or malformed state file (CLI exit code 2)."""


def state_to_dict(psi: StateVector) -> dict[str, Any]:
    return {
        "dim_a": psi.dim_a,
        "dim_b": psi.dim_b,
        "amps": [[float(z.real), float(z.imag)] for z in psi.amps],
    }


def state_from_dict(data: Any) -> StateVector:
    if not isinstance(data, dict):
        raise StateFileError("state file must hold a JSON object")
    for key in ("dim_a", "dim_b", "amps"):
        if key not in data:
            raise StateFileError(f"missing field {key!r}")
    dim_a, dim_b, amps = data["dim_a"], data["dim_b"], data["amps"]
    for key, v in (("dim_a", dim_a), ("dim_b", dim_b)):
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise StateFileError(f"field {key!r} must be a positive integer, got {v!r}")
    if not isinstance(amps, list):
        raise StateFileError("field 'amps' must be a list of [re, im] pairs")
    if len(amps) != dim_a * dim_b:
        raise StateFileError(f"field 'amps' has {len(amps)} entries, expected dim_a*dim_b = {dim_a * dim_b}")
    out = np.empty(len(amps), dtype=complex)
    for i, pair in enumerate(amps):
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)
        ):
            raise StateFileError(f"field 'amps'[{i}] must be a [re, im] pair of numbers, got {pair!r}")
        out[i] = complex(pair[0], pair[1])
    if not np.all(np.isfinite(out)):
        raise StateFileError("field 'amps' holds non-finite values")
    return StateVector(dim_a, dim_b, out)


def read_state(path: Union[str, Path]) -> StateVector:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise StateFileError(f"{path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StateFileError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno} (char {exc.pos}): {exc.msg}") from exc
    try:
        return state_from_dict(data)
    except StateFileError as exc:
        raise StateFileError(f"{path}: {exc}") from exc


def write_state(path: Union[str, Path], psi: StateVector) -> None:
    atomic_write(path, dumps(state_to_dict(psi)))


def complex_to_pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def superposition_to_dict(s: Superposition) -> dict[str, Any]:
    return {
        "alpha": complex_to_pair(s.alpha),
        "beta": complex_to_pair(s.beta),
        "phi": state_to_dict(s.phi),
        "psi": state_to_dict(s.psi),
    }


def superposition_from_dict(data: dict[str, Any]) -> Superposition:
    return Superposition(
        complex(*data["alpha"]),
        complex(*data["beta"]),
        state_from_dict(data["phi"]),
        state_from_dict(data["psi"]),
    )


def _clean(obj: Any) -> Any:
    # JSON has no inf/nan; emit null
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, (np.floating,)):
        return _clean(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return complex_to_pair(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    return obj


def dumps(obj: Any, indent: int | None = 2) -> str:
    return json.dumps(_clean(obj), indent=indent, allow_nan=False) + "\n"


def format_number(x: Any) -> str:
    """CSV cell: 17 significant digits for floats, '' for missing values."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def atomic_write(path: Union[str, Path], text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
