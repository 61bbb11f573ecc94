"""CSV and JSON serialization with round-trip float formatting."""

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .state import GridField, ModalState

FLOAT_FMT = "%.17g"


def fmt(value):
    """Format a scalar for CSV output (17 significant digits for floats)."""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return FLOAT_FMT % float(value)
    return str(value)


def write_csv(path, header, rows):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path):
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def to_jsonable(obj):
    """Convert numpy scalars/arrays and complex numbers into plain JSON types.

    Complex values become ``[re, im]``; non-finite floats become ``None``.
    """
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [to_jsonable(float(obj.real)), to_jsonable(float(obj.imag))]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if hasattr(obj, "value") and hasattr(obj, "name"):  # enums
        return obj.name.lower()
    return obj


def dumps(obj):
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj):
    path = Path(path)
    path.write_text(dumps(obj))
    return path


# ---------------------------------------------------------------------------
# state formats


def grid_field_rows(f: GridField):
    for x, r, u, s in zip(f.x, f.rho, f.u, f.S):
        yield (x, r.real, r.imag, u.real, u.imag, s.real, s.imag)


GRID_HEADER = ["x", "rho_re", "rho_im", "u_re", "u_im", "S_re", "S_im"]


def write_grid_field(path, f: GridField):
    return write_csv(path, GRID_HEADER, grid_field_rows(f))


def read_grid_field(path) -> GridField:
    header, rows = read_csv(path)
    if header != GRID_HEADER:
        raise ValidationError("header", f"unexpected columns {header}")
    a = np.array(rows, dtype=float)
    return GridField(a[:, 1] + 1j * a[:, 2], a[:, 3] + 1j * a[:, 4], a[:, 5] + 1j * a[:, 6])


def modal_to_json(s: ModalState):
    modes = [[n] + [[float(d.real), float(d.imag)] for d in s.coeffs[n - 1]] for n in range(1, s.n_max + 1)]
    return {"alpha0": [float(s.alpha0.real), float(s.alpha0.imag)], "modes": modes}


def modal_from_json(obj) -> ModalState:
    try:
        a0 = complex(*obj["alpha0"])
        modes = sorted(obj["modes"], key=lambda m: m[0])
    except (KeyError, TypeError) as exc:
        raise ValidationError("modal", f"malformed modal state: {exc}") from exc
    ns = [int(m[0]) for m in modes]
    if ns != list(range(1, len(ns) + 1)):
        raise ValidationError("modal.modes", "mode indices must be 1..N without gaps")
    coeffs = np.array([[complex(*d) for d in m[1:4]] for m in modes], dtype=complex).reshape(-1, 3)
    return ModalState(a0, coeffs)


def write_trajectory(out_dir, traj, p, stem="snapshot"):
    """One CSV per snapshot plus a manifest with times, file names and Z-norms."""
    from .state import z_norm_sq

    out_dir = Path(out_dir)
    files, norms = [], []
    width = len(str(len(traj.states) - 1))
    for k, state in enumerate(traj.states):
        name = f"{stem}_{k:0{width}d}.csv"
        write_grid_field(out_dir / name, state)
        files.append(name)
        norms.append(math.sqrt(z_norm_sq(state, p)))
    manifest = {"times": traj.times, "files": files, "norms": norms}
    write_json(out_dir / f"{stem}_manifest.json", manifest)
    return files + [f"{stem}_manifest.json"]
