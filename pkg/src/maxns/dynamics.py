"""Forward and adjoint evolution: exact modal formulas and a finite-difference oracle.

The finite-difference solver uses collocated central differences with RK4.
At the walls the velocity derivative is closed by odd reflection
(``u_{-1} = -u_1``), which is the one-sided ``(u_1 - u_0)/h`` stencil. With
trapezoid weights this makes the discrete derivative skew-adjoint, so mass and
the relaxed stress mean are conserved exactly and the energy cannot grow.
Density and stress derivatives at the walls only feed the velocity equation
there, which is overwritten by the Dirichlet data after every stage.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .control import ControlSignal, linear_input_propagators, mode_expm, mode_matrices
from .errors import ConfigurationError, ValidationError
from .state import GridField, ModalState, grid

CFL = 0.4
DEFAULT_SNAPSHOTS = 33


@dataclass
class Trajectory:
    times: np.ndarray
    states: list
    kind: str  # "modal" or "grid"

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.size == 0 or self.times[0] != 0.0 or np.any(np.diff(self.times) <= 0):
            raise ValidationError("times", "must start at 0 and increase strictly")
        if len(self.states) != self.times.size:
            raise ValidationError("states", "one state per time is required")

    @property
    def final(self):
        return self.states[-1]


def snapshot_times(T, count=DEFAULT_SNAPSHOTS):
    return np.linspace(0.0, T, count)


# ---------------------------------------------------------------------------
# exact modal evolution


def _mode_vector(s: ModalState, n):
    return np.array([s.alpha0]) if n == 0 else s.coeffs[n - 1]


def _assemble(vectors):
    return ModalState(vectors[0][0], np.array(vectors[1:]).reshape(-1, 3))


def evolve_modal(z0: ModalState, f: Optional[ControlSignal], T, p, bases, times=None) -> Trajectory:
    """Variation of constants, mode by mode.

    Null controls carrying closed-form data are integrated exactly; other
    signals are treated as piecewise linear between their samples and
    integrated exactly in that class.
    """
    times = snapshot_times(T) if times is None else np.asarray(times, dtype=float)
    if len(bases) <= z0.n_max:
        raise ValidationError("bases", f"need bases for modes 0..{z0.n_max}")
    per_mode = []
    for n in range(z0.n_max + 1):
        A = bases[n].A_n
        d0 = _mode_vector(z0, n)
        free = mode_expm(A, times) @ d0
        if f is None or n > f.n_max:
            per_mode.append(free)
        elif f.exact is not None:
            mc = f.exact[n]
            forced = np.array([mc.state(t) for t in times]) - mode_expm(A, times) @ mc.z0
            per_mode.append(free + forced)
        else:
            per_mode.append(free + _sampled_response(bases[n], f, n, times, p))
    states = [_assemble([per_mode[n][k] for n in range(len(per_mode))]) for k in range(times.size)]
    return Trajectory(times, states, "modal")


def _sampled_response(basis, f, n, times, p):
    """Zero-state response to the piecewise-linear interpolant of ``g_n``."""
    pair = mode_matrices(basis, p)
    A, B = pair.A, pair.B.reshape(-1, 1)
    g = f.modal[:, n]
    tk = f.times
    k = A.shape[0]
    steps = {}
    x = np.zeros(k, dtype=complex)
    out = np.zeros((times.size, k), dtype=complex)
    j = 0
    for idx, t in enumerate(times):
        while j + 1 < tk.size and tk[j + 1] <= t:
            h = tk[j + 1] - tk[j]
            key = round(h, 15)
            if key not in steps:
                steps[key] = linear_input_propagators(A, B, h)
            E, Q0, Q1 = steps[key]
            x = E @ x + Q0[:, 0] * g[j] + Q1[:, 0] * g[j + 1]
            j += 1
        if t > tk[j] and j + 1 < tk.size:
            h = t - tk[j]
            gt = g[j] + (g[j + 1] - g[j]) * h / (tk[j + 1] - tk[j])
            E, Q0, Q1 = linear_input_propagators(A, B, h)
            out[idx] = E @ x + Q0[:, 0] * g[j] + Q1[:, 0] * gt
        else:
            out[idx] = x
    return out


# ---------------------------------------------------------------------------
# finite differences


def _check_cfl(T, nx, nt, p):
    h = math.pi / (nx - 1)
    dt = T / nt
    limit = CFL * h / p.c_wave
    if dt > limit * (1 + 1e-12):
        raise ConfigurationError("nt", f"time step {dt:.3e} exceeds CFL limit {limit:.3e}; use nt >= {math.ceil(T / limit)}")
    return h, dt


def min_steps(T, nx, p):
    """Smallest ``nt`` satisfying the CFL constraint."""
    h = math.pi / (nx - 1)
    return max(1, math.ceil(T * p.c_wave / (CFL * h) - 1e-9))


def ddx_even(w, h):
    """Central derivative; wall values are never used."""
    d = np.empty_like(w)
    d[1:-1] = (w[2:] - w[:-2]) / (2.0 * h)
    d[0] = 0.0
    d[-1] = 0.0
    return d


def ddx_odd(w, h):
    """Central derivative with odd-reflection closure at the walls."""
    d = np.empty_like(w)
    d[1:-1] = (w[2:] - w[:-2]) / (2.0 * h)
    d[0] = (w[1] - w[0]) / h
    d[-1] = (w[-1] - w[-2]) / h
    return d


def trapezoid_weights(nx):
    h = math.pi / (nx - 1)
    w = np.full(nx, h)
    w[0] = w[-1] = 0.5 * h
    return w


def discrete_energy(state, p):
    """Z-energy of a ``(3, nx)`` array in the trapezoid norm the scheme conserves."""
    w = trapezoid_weights(state.shape[1])
    rho, u, S = state
    return float(np.sum(w * (p.b * np.abs(rho) ** 2 + p.rho_s * np.abs(u) ** 2 + (p.kappa / p.mu) * np.abs(S) ** 2)))


def discrete_mean(values):
    return complex(np.sum(trapezoid_weights(values.size) * values))


def _step_times(times, T, nt):
    """Snap requested snapshot times to the step grid."""
    dt = T / nt
    k = np.unique(np.clip(np.round(np.asarray(times) / dt).astype(int), 0, nt))
    return k * dt


def _rk4(w0, rhs, bc, T, nt, times, on_step=None):
    dt = T / nt
    snaps = []
    targets = list(np.round(np.asarray(times) / dt).astype(int))
    w = w0.copy()
    bc(0.0, w)
    if targets and targets[0] == 0:
        snaps.append(w.copy())
    if on_step is not None:
        on_step(0, 0.0, w)
    for k in range(nt):
        t = k * dt
        k1 = rhs(t, w)
        s = w + 0.5 * dt * k1
        bc(t + 0.5 * dt, s)
        k2 = rhs(t + 0.5 * dt, s)
        s = w + 0.5 * dt * k2
        bc(t + 0.5 * dt, s)
        k3 = rhs(t + 0.5 * dt, s)
        s = w + dt * k3
        bc(t + dt, s)
        k4 = rhs(t + dt, s)
        w = w + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        bc(t + dt, w)
        if on_step is not None:
            on_step(k + 1, t + dt, w)
        if (k + 1) in targets:
            snaps.extend(w.copy() for _ in range(targets.count(k + 1)))
    return snaps


def control_source(f: Optional[ControlSignal], nx) -> Optional[Callable]:
    """Density source ``t -> f(t, x_grid)`` for the FD solver."""
    if f is None:
        return None
    xs = grid(nx)
    if f.hats is not None:
        return lambda t: f.field_at(t, xs)
    n = np.arange(1, f.n_max + 1)
    basis = np.vstack([np.full(nx, 1.0 / math.sqrt(math.pi)), math.sqrt(2.0 / math.pi) * np.cos(np.outer(n, xs))])
    return lambda t: f.coefficients_at(t) @ basis


def fd_solve(z0: GridField, f, T, nx, nt, p, times=None, on_step=None) -> Trajectory:
    """Finite-difference integration of the controlled forward system.

    ``f`` is a :class:`ControlSignal`, a callable ``t -> density source`` on
    the grid, or ``None``. ``on_step(k, t, state)`` is called after each step.
    """
    if z0.nx != nx:
        raise ValidationError("nx", f"initial field has {z0.nx} points, expected {nx}")
    h, _ = _check_cfl(T, nx, nt, p)
    times = _step_times(snapshot_times(T) if times is None else times, T, nt)
    src = control_source(f, nx) if isinstance(f, ControlSignal) else f
    rs, b, mu, kap = p.rho_s, p.b, p.mu, p.kappa

    def rhs(t, w):
        rho, u, S = w
        ux = ddx_odd(u, h)
        out = np.empty_like(w)
        out[0] = -rs * ux
        out[1] = -b * ddx_even(rho, h) + ddx_even(S, h) / rs
        out[2] = -S / kap + (mu / kap) * ux
        if src is not None:
            out[0] += src(t)
        return out

    def bc(t, w):
        w[1, 0] = 0.0
        w[1, -1] = 0.0

    snaps = _rk4(z0.stack(), rhs, bc, T, nt, times, on_step)
    return Trajectory(times, [GridField.from_stack(s) for s in snaps], "grid")


def adjoint_solve(q0: GridField, sources, boundary, T, nx, nt, p, times=None, on_step=None) -> Trajectory:
    """Finite-difference integration of the adjoint system.

    ``sources`` is ``None`` or a callable ``t -> (3, nx)`` array; ``boundary``
    is ``None`` or a pair of callables giving the velocity at ``x = 0`` and
    ``x = pi``.
    """
    if q0.nx != nx:
        raise ValidationError("nx", f"initial field has {q0.nx} points, expected {nx}")
    h, _ = _check_cfl(T, nx, nt, p)
    times = _step_times(snapshot_times(T) if times is None else times, T, nt)
    rs, b, mu, kap = p.rho_s, p.b, p.mu, p.kappa
    h0, hpi = boundary if boundary is not None else (None, None)

    def rhs(t, w):
        sig, v, S = w
        vx = ddx_odd(v, h)
        out = np.empty_like(w)
        out[0] = rs * vx
        out[1] = b * ddx_even(sig, h) - ddx_even(S, h) / rs
        out[2] = -S / kap - (mu / kap) * vx
        if sources is not None:
            out += sources(t)
        return out

    def bc(t, w):
        w[1, 0] = 0.0 if h0 is None else h0(t)
        w[1, -1] = 0.0 if hpi is None else hpi(t)

    snaps = _rk4(q0.stack(), rhs, bc, T, nt, times, on_step)
    return Trajectory(times, [GridField.from_stack(s) for s in snaps], "grid")


def conservation_run(z0: GridField, T, nx, nt, p, times=None):
    """Uncontrolled FD run recording the conserved quantities at every step.

    Returns the trajectory and per-step arrays of ``int rho``,
    ``e^{t/kappa} int S`` (both trapezoid) and the discrete Z-energy.
    """
    log = {"t": [], "mass": [], "stress": [], "energy": []}

    def on_step(k, t, w):
        log["t"].append(t)
        log["mass"].append(discrete_mean(w[0]))
        log["stress"].append(math.exp(t / p.kappa) * discrete_mean(w[2]))
        log["energy"].append(discrete_energy(w, p))

    traj = fd_solve(z0, None, T, nx, nt, p, times=times, on_step=on_step)
    return traj, {k: np.asarray(v) for k, v in log.items()}


def conservation_summary(log):
    mass, stress, energy = log["mass"], log["stress"], log["energy"]
    return {
        "mass_drift": float(np.abs(mass - mass[0]).max()),
        "stress_drift": float(np.abs(stress - stress[0]).max()),
        "max_energy_increase": float(max(0.0, np.diff(energy).max())) if energy.size > 1 else 0.0,
        "energy_initial": float(energy[0]),
        "energy_final": float(energy[-1]),
    }
