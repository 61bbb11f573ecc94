"""Command-line front door: JSON config in, CSV/JSON artifacts and a manifest out.

Exit codes: 0 on success, 2 on configuration/validation errors (the message
names the field path), 1 on numerical failures.
"""

import argparse
import contextlib
import copy
import hashlib
import json
import math
import os
import platform
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import NumericalError, ValidationError
from .io import dumps, write_csv, write_json, write_trajectory
from .params import P_STAR, derive_constants

COMMANDS = ("spectrum", "basis-check", "null-control", "approx-control", "simulate", "beam", "ingham")

DEFAULTS = {
    "spectrum": {"n_max": 50},
    "basis_check": {"n_max": 50},
    "null_control": {"T": 1.0, "n_max": 64, "seed": None, "nx_oracle": None, "nt": 512},
    "approx_control": {"T": 9.0, "O1": [0.3, 0.6], "n_max": 32, "reg": 1e-8, "seed": None, "nx_out": 61},
    "simulate": {"T": 1.0, "n_max": 32, "nx": 1025, "seed": None, "snapshots": 5},
    "beam": {
        "k_ladder": [64, 256, 1024],
        "x0": 1.2,
        "r": 0.5,
        "O1": [2.2, 2.8],
        "O2": [0.0, math.pi],
        "O3": [2.2, 2.8],
        "T": 1.0,
    },
    "ingham": {"M": 10, "n_max": 200, "T_list": [9.0, 12.0, 15.0]},
}


@dataclass
class RunConfig:
    command: str
    params: object
    block: dict
    output_dir: Path
    seed: int
    raw: dict = field(default_factory=dict)

    @property
    def block_name(self):
        return self.command.replace("-", "_")


# ---------------------------------------------------------------------------
# validation


def _number(path, value, positive=False, integer=False, minimum=None):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(path, f"expected a number, got {value!r}")
    if integer and int(value) != value:
        raise ValidationError(path, f"expected an integer, got {value!r}")
    if not math.isfinite(value):
        raise ValidationError(path, "must be finite")
    if positive and value <= 0:
        raise ValidationError(path, "must be strictly positive")
    if minimum is not None and value < minimum:
        raise ValidationError(path, f"must be >= {minimum}")
    return int(value) if integer else float(value)


def _interval(path, value):
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ValidationError(path, "expected [lo, hi]")
    lo, hi = (_number(f"{path}[{i}]", v) for i, v in enumerate(value))
    if not 0.0 <= lo < hi <= math.pi + 1e-15:
        raise ValidationError(path, f"({lo}, {hi}) is not a subinterval of (0, pi)")
    return [lo, min(hi, math.pi)]


_FIELD_RULES = {
    "n_max": dict(integer=True, minimum=1),
    "nx_oracle": dict(integer=True, minimum=17),
    "nx": dict(integer=True, minimum=17),
    "nx_out": dict(integer=True, minimum=2),
    "nt": dict(integer=True, minimum=1),
    "snapshots": dict(integer=True, minimum=2),
    "M": dict(integer=True, minimum=1),
    "seed": dict(integer=True, minimum=0),
    "T": dict(positive=True),
    "reg": dict(minimum=0.0),
    "x0": dict(),
    "r": dict(positive=True),
}


def _validate_block(name, block):
    out = copy.deepcopy(DEFAULTS[name])
    if not isinstance(block, dict):
        raise ValidationError(name, "expected an object")
    for key, value in block.items():
        path = f"{name}.{key}"
        if key not in out:
            raise ValidationError(path, "unknown field")
        if value is None:
            out[key] = None
        elif key in ("O1", "O2", "O3"):
            out[key] = _interval(path, value)
        elif key in ("k_ladder", "T_list"):
            if not isinstance(value, list) or not value:
                raise ValidationError(path, "expected a non-empty list")
            integer = key == "k_ladder"
            out[key] = [_number(f"{path}[{i}]", v, positive=True, integer=integer) for i, v in enumerate(value)]
        else:
            out[key] = _number(path, value, **_FIELD_RULES[key])
    return out


def load_config(command, config=None, out=None, seed=None) -> RunConfig:
    """Resolve a :class:`RunConfig` from a parsed JSON object and CLI overrides."""
    if command not in COMMANDS:
        raise ValidationError("command", f"unknown command {command!r}")
    raw = {} if config is None else config
    if not isinstance(raw, dict):
        raise ValidationError("config", "top level must be an object")
    allowed = {"params", "output_dir", "seed"} | set(DEFAULTS)
    for key in raw:
        if key not in allowed:
            raise ValidationError(key, "unknown field")
    params = derive_constants(raw["params"], prefix="params.") if "params" in raw else P_STAR
    name = command.replace("-", "_")
    block = _validate_block(name, raw.get(name, {}))
    top_seed = _number("seed", raw["seed"], integer=True, minimum=0) if raw.get("seed") is not None else 0
    if seed is not None:
        resolved = _number("--seed", seed, integer=True, minimum=0)
    elif block.get("seed") is not None:
        resolved = block["seed"]
    else:
        resolved = top_seed
    if "seed" in block:
        block["seed"] = resolved
    output_dir = Path(out if out is not None else raw.get("output_dir", f"maxns-{command}"))
    resolved_raw = {"command": command, "params": params.raw(), name: block, "seed": resolved}
    return RunConfig(command, params, block, output_dir, resolved, resolved_raw)


def input_hash(cfg: RunConfig):
    canon = json.dumps(cfg.raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


# ---------------------------------------------------------------------------
# commands


def _bases(n_max, p):
    from .basis import build_bases
    from .spectrum import solve_mode

    return build_bases([solve_mode(n, p) for n in range(1, n_max + 1)], p)


def cmd_spectrum(cfg):
    from .spectrum import asymptotic_prediction, solve_mode

    p = cfg.params
    rows = []
    for n in range(1, cfg.block["n_max"] + 1):
        m = solve_mode(n, p)
        w0, (p2, p3) = asymptotic_prediction(n, p)
        rows.append(
            [n]
            + [v for lam in m.roots for v in (lam.real, lam.imag)]
            + [m.multiplicity.name.lower(), w0, p2.real, p2.imag, p3.real, p3.imag]
            + [abs(m.lambda1 - w0), abs(m.lambda2 - p2), abs(m.lambda3 - p3)]
        )
    header = ["n", "l1_re", "l1_im", "l2_re", "l2_im", "l3_re", "l3_im", "multiplicity"]
    header += ["pred_l1", "pred_l2_re", "pred_l2_im", "pred_l3_re", "pred_l3_im", "dev_l1", "dev_l2", "dev_l3"]
    write_csv(cfg.output_dir / "spectrum.csv", header, rows)
    return ["spectrum.csv"]


def cmd_basis_check(cfg):
    from .basis import gamma_matrix

    p = cfg.params
    bases = _bases(cfg.block["n_max"], p)
    report = []
    for b in bases[1:]:
        table = b.pairing_table(p)
        g = gamma_matrix(b, p)
        report.append(
            {
                "n": b.n,
                "max_biortho_deviation": float(np.abs(table - np.eye(b.size)).max()),
                "gamma_norm": g.norm,
                "gamma_inv_norm": g.inverse_norm,
                "structure": b.structure,
            }
        )
    write_json(cfg.output_dir / "basis_check.json", report)
    return ["basis_check.json"]


def cmd_null_control(cfg):
    from .control import assemble_control, exact_terminal_state
    from .dynamics import fd_solve, min_steps
    from .state import modal_norm_sq, random_modal_state, reconstruct, z_norm_sq

    p, blk = cfg.params, cfg.block
    n_max, T = blk["n_max"], blk["T"]
    bases = _bases(n_max, p)
    z0 = random_modal_state(n_max, np.random.default_rng(cfg.seed))
    signal = assemble_control(z0, T, p, bases, nt=blk["nt"])
    z0_norm = math.sqrt(modal_norm_sq(z0, bases, p))
    zT = exact_terminal_state(signal)
    summary = {
        "terminal_error": math.sqrt(modal_norm_sq(zT, bases, p)) / z0_norm,
        "control_energy": signal.energy(),
        "per_mode_energies": signal.per_mode_energies(),
        "z0_norm": z0_norm,
        "energy_constant": signal.energy() / z0_norm**2,
        "seed": cfg.seed,
    }
    if blk["nx_oracle"] is not None:
        nx = blk["nx_oracle"]
        x0 = reconstruct(z0, nx, p, bases)
        traj = fd_solve(x0, signal, T, nx, min_steps(T, nx, p), p, times=[0.0, T])
        summary["fd_terminal_error"] = math.sqrt(z_norm_sq(traj.final, p) / z_norm_sq(x0, p))
        summary["fd_nx"] = nx
    rows = [[t, n, g.real, g.imag] for t, gs in zip(signal.times, signal.modal) for n, g in enumerate(gs)]
    write_csv(cfg.output_dir / "control.csv", ["t", "mode", "f_re", "f_im"], rows)
    write_json(cfg.output_dir / "summary.json", summary)
    return ["control.csv", "summary.json"]


def cmd_approx_control(cfg):
    from .control import approx_control
    from .dynamics import evolve_modal
    from .state import ModalState, modal_norm_sq, random_modal_state

    p, blk = cfg.params, cfg.block
    n_max, T = blk["n_max"], blk["T"]
    bases = _bases(n_max, p)
    z0 = random_modal_state(n_max, np.random.default_rng(cfg.seed))
    signal = approx_control(z0, ModalState.zeros(n_max), blk["O1"], T, n_max, p, bases, reg=blk["reg"])
    zT = evolve_modal(z0, signal, T, p, bases, times=[0.0, T]).final
    z0_norm = math.sqrt(modal_norm_sq(z0, bases, p))
    summary = {
        "terminal_error": math.sqrt(modal_norm_sq(zT, bases, p)) / z0_norm,
        "control_energy": signal.energy(),
        "per_mode_energies": signal.per_mode_energies(),
        "z0_norm": z0_norm,
        "reg": blk["reg"],
        "condition": signal.info["cond"],
        "seed": cfg.seed,
    }
    xs = np.linspace(blk["O1"][0], blk["O1"][1], blk["nx_out"])
    rows = []
    for t in signal.times:
        f = signal.field_at(t, xs)
        rows.extend([t, x, v.real, v.imag] for x, v in zip(xs, f))
    write_csv(cfg.output_dir / "control.csv", ["t", "x", "f_re", "f_im"], rows)
    write_json(cfg.output_dir / "summary.json", summary)
    return ["control.csv", "summary.json"]


def cmd_simulate(cfg):
    from .dynamics import conservation_run, conservation_summary, min_steps, snapshot_times
    from .state import random_modal_state, reconstruct

    p, blk = cfg.params, cfg.block
    nx, T = blk["nx"], blk["T"]
    bases = _bases(blk["n_max"], p)
    z0 = random_modal_state(blk["n_max"], np.random.default_rng(cfg.seed))
    x0 = reconstruct(z0, nx, p, bases)
    traj, log = conservation_run(x0, T, nx, min_steps(T, nx, p), p, times=snapshot_times(T, blk["snapshots"]))
    files = write_trajectory(cfg.output_dir, traj, p)
    write_json(cfg.output_dir / "summary.json", conservation_summary(log))
    return files + ["summary.json"]


def cmd_beam(cfg):
    from .beam import beam_report

    p, blk = cfg.params, cfg.block
    table = [beam_report(k, blk["x0"], blk["r"], blk["O1"], blk["O2"], blk["O3"], blk["T"], p) for k in blk["k_ladder"]]
    write_json(cfg.output_dir / "beam.json", table)
    return ["beam.json"]


def cmd_ingham(cfg):
    from .ingham import frequencies, ingham_constants

    p, blk = cfg.params, cfg.block
    fam = frequencies(blk["M"], blk["n_max"], p)
    rows = []
    for T in blk["T_list"]:
        c = ingham_constants(fam, T)
        rows.append(
            [T, blk["M"], blk["n_max"], c["C_low"], c["C_high"], fam.gap, fam.min_spacing]
            + [np.abs(fam.epsilon).max(), np.abs(fam.delta).max()]
        )
    header = ["T", "M", "n_max", "C_low", "C_high", "gap", "min_spacing", "max_abs_epsilon", "max_abs_delta"]
    write_csv(cfg.output_dir / "ingham.csv", header, rows)
    return ["ingham.csv"]


HANDLERS = {
    "spectrum": cmd_spectrum,
    "basis-check": cmd_basis_check,
    "null-control": cmd_null_control,
    "approx-control": cmd_approx_control,
    "simulate": cmd_simulate,
    "beam": cmd_beam,
    "ingham": cmd_ingham,
}


def _thread_limit():
    value = os.environ.get("MAXNS_THREADS")
    if not value:
        return contextlib.nullcontext()
    try:
        n = int(value)
    except ValueError:
        raise ValidationError("MAXNS_THREADS", f"expected a positive integer, got {value!r}") from None
    if n < 1:
        raise ValidationError("MAXNS_THREADS", "must be >= 1")
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def run(cfg: RunConfig):
    """Execute ``cfg`` and return the manifest dict (also written to disk)."""
    import scipy

    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    with _thread_limit():
        files = HANDLERS[cfg.command](cfg)
    manifest = {
        "command": cfg.command,
        "input_hash": input_hash(cfg),
        "config": cfg.raw,
        "versions": {
            "maxns": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "files": files,
    }
    write_json(cfg.output_dir / "manifest.json", manifest)
    return manifest


def build_parser():
    parser = argparse.ArgumentParser(prog="maxns", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="JSON config file")
        sp.add_argument("--out", type=Path, help="output directory (overrides output_dir)")
        sp.add_argument("--seed", type=int, help="random seed (overrides config)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = None
        if args.config is not None:
            try:
                config = json.loads(args.config.read_text())
            except OSError as exc:
                raise ValidationError("--config", str(exc)) from None
            except json.JSONDecodeError as exc:
                raise ValidationError("--config", f"invalid JSON: {exc}") from None
        cfg = load_config(args.command, config, args.out, args.seed)
        manifest = run(cfg)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(dumps(manifest))
    return 0


if __name__ == "__main__":
    sys.exit(main())
