"""Gaussian-beam approximate solutions of the adjoint system and the
observability-violation experiment built on them.

With the complex phase ``phi(x) = (i/2)(x - x0)^2 + (x - x0)`` the beam is

    sigma_k = k^{-3/4} d/dx(e^{ik phi} eta),
    v_k     = k^{-3/4} e^{ik phi} vartheta,
    S_k     = k^{-3/4} d/dx(e^{ik phi} Upsilon),

with ``eta = e^{omega0 t} zeta``, ``vartheta = omega0 eta / rho_s`` and
``Upsilon = b rho_s eta``. Everything factors as ``e^{omega0 t}`` times a
spatial profile, which the FD correction exploits.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .dynamics import adjoint_solve, min_steps, trapezoid_weights
from .errors import GeometryError, ValidationError
from .state import GridField, grid

DEFAULT_RADIUS = 0.5
K_LADDER = (64, 256, 1024, 4096)


@dataclass(frozen=True)
class Bump:
    """Mollifier ``amplitude * e * exp(-1/(1 - s^2))``, ``s = (x - x0)/r``; equals ``amplitude`` at x0."""

    center: float
    radius: float
    amplitude: float = 1.0

    def _s(self, x):
        return (np.asarray(x, dtype=float) - self.center) / self.radius

    def value(self, x):
        s = self._s(x)
        out = np.zeros_like(s)
        inside = np.abs(s) < 1.0
        q = 1.0 - s[inside] ** 2
        out[inside] = self.amplitude * np.exp(1.0 - 1.0 / q)
        return out

    def derivative(self, x):
        s = self._s(x)
        out = np.zeros_like(s)
        inside = np.abs(s) < 1.0
        si = s[inside]
        q = 1.0 - si**2
        out[inside] = self.amplitude * np.exp(1.0 - 1.0 / q) * (-2.0 * si / q**2) / self.radius
        return out


@dataclass(frozen=True)
class BeamFamily:
    k: int
    x0: float
    bump: Bump
    p: object

    @property
    def omega0(self):
        return self.p.omega0

    def phase(self, x):
        d = np.asarray(x, dtype=float) - self.x0
        return 0.5j * d**2 + d

    def phase_derivative(self, x):
        return 1j * (np.asarray(x, dtype=float) - self.x0) + 1.0

    def eta(self, t, x):
        return math.exp(self.omega0 * t) * self.bump.value(x)

    def eta_x(self, t, x):
        return math.exp(self.omega0 * t) * self.bump.derivative(x)

    def eta_t(self, t, x):
        return self.omega0 * self.eta(t, x)

    def vartheta(self, t, x):
        return self.eta_t(t, x) / self.p.rho_s

    def upsilon(self, t, x):
        return self.p.b * self.p.rho_s * self.eta(t, x)

    def ode_residual(self, t, x):
        """Residual of the amplitude ODE satisfied by ``eta``."""
        p = self.p
        return (p.b * p.rho_s + p.mu / (p.kappa * p.rho_s)) * self.eta_t(t, x) + p.b * p.rho_s / p.kappa * self.eta(t, x)

    def profiles(self, x):
        """Spatial profiles at t = 0 of ``(sigma, v, S, residual_v)``; each scales by ``e^{omega0 t}``."""
        x = np.asarray(x, dtype=float)
        p, k = self.p, self.k
        scale = k**-0.75
        z = self.bump.value(x)
        zx = self.bump.derivative(x)
        inside = z != 0.0
        e = np.zeros(x.shape, dtype=complex)
        e[inside] = np.exp(1j * k * self.phase(x[inside]))
        dz = 1j * k * self.phase_derivative(x) * z + zx  # d/dx(e^{ik phi} zeta) / e^{ik phi}
        sigma = scale * e * dz
        v = scale * e * (self.omega0 / p.rho_s) * z
        S = p.b * p.rho_s * sigma
        resid = scale * e * (self.omega0**2 / p.rho_s) * z
        return sigma, v, S, resid


def build_beam(k, x0, bump_radius, p, amplitude=1.0) -> BeamFamily:
    if int(k) != k or k < 1:
        raise ValidationError("k", "frequency parameter must be a positive integer")
    if not (0.0 < x0 - bump_radius and x0 + bump_radius < math.pi):
        raise GeometryError("r", f"bump support [{x0 - bump_radius}, {x0 + bump_radius}] must lie inside (0, pi)")
    if bump_radius <= 0:
        raise GeometryError("r", "bump radius must be positive")
    return BeamFamily(int(k), float(x0), Bump(float(x0), float(bump_radius), float(amplitude)), p)


def beam_grid_size(k):
    """Odd grid size resolving wavenumber ``k`` with eight points per unit wavenumber."""
    n = max(4097, 8 * int(k) + 1)
    return n if n % 2 else n + 1


def beam_fields(beam: BeamFamily, t, xs) -> GridField:
    sigma, v, S, _ = beam.profiles(xs)
    g = math.exp(beam.omega0 * t)
    return GridField(g * sigma, g * v, g * S)


def residual_components(beam: BeamFamily, t, xs):
    """Pointwise ``(g1, h1, l1)`` closure residuals and the surviving second component."""
    p = beam.p
    eta = beam.eta(t, xs)
    th = beam.vartheta(t, xs)
    up = beam.upsilon(t, xs)
    g1 = beam.eta_t(t, xs) - p.rho_s * th
    h1 = -p.b * eta + up / p.rho_s
    l1 = p.b * p.rho_s * beam.eta_t(t, xs) + up / p.kappa + (p.mu / p.kappa) * th
    _, _, _, resid = beam.profiles(xs)
    return g1, h1, l1, math.exp(beam.omega0 * t) * resid


def beam_residual(beam: BeamFamily, t, xs, p=None) -> float:
    """L2 norm of the operator residual; only the velocity component survives."""
    xs = np.asarray(xs, dtype=float)
    _, _, _, r2 = residual_components(beam, t, xs)
    return math.sqrt(simpson(np.abs(r2) ** 2, x=xs))


def concentration(beam: BeamFamily, t, xs):
    """``(int |sigma|^2, tail mass outside |x - x0| <= k^{-1/4})``."""
    xs = np.asarray(xs, dtype=float)
    f = beam_fields(beam, t, xs)
    dens = np.abs(f.rho) ** 2
    tail = np.where(np.abs(xs - beam.x0) > beam.k**-0.25, dens, 0.0)
    return float(simpson(dens, x=xs)), float(simpson(tail, x=xs))


def _interval_mask(xs, interval):
    lo, hi = interval
    return (xs > lo) & (xs < hi)


def check_geometry(beam, O1, O2, O3):
    for name, O in (("O1", O1), ("O2", O2), ("O3", O3)):
        lo, hi = O
        if not 0.0 <= lo < hi <= math.pi:
            raise GeometryError(name, f"({lo}, {hi}) is not a subinterval of (0, pi)")
    lo_s, hi_s = beam.x0 - beam.bump.radius, beam.x0 + beam.bump.radius
    for name, (lo, hi) in (("O1", O1), ("O3", O3)):
        if lo <= beam.x0 <= hi:
            raise GeometryError(name, "x0 must lie outside the closure of O1 and O3")
        if lo < hi_s and lo_s < hi:
            raise GeometryError(name, "bump support must be disjoint from O1 and O3")


def observability_experiment(beam: BeamFamily, O1, O2, O3, T, p, nx=None, nt=None):
    """Corrected beam, its terminal energy ``N`` and observed energy ``D``.

    The correction solves the adjoint system with the beam residual as source
    and the beam's wall traces as velocity data (zero here, since the bump has
    compact support), starting from rest.
    """
    check_geometry(beam, O1, O2, O3)
    if not T > 0:
        raise ValidationError("T", "horizon must be positive")
    nx = beam_grid_size(beam.k) if nx is None else int(nx)
    nt = min_steps(T, nx, p) if nt is None else int(nt)
    xs = grid(nx)
    sig_p, v_p, S_p, res_p = beam.profiles(xs)
    w0 = beam.omega0
    src = np.zeros((3, nx), dtype=complex)
    src[1] = res_p

    def sources(t):
        return math.exp(w0 * t) * src

    def trace0(t):
        return math.exp(w0 * t) * v_p[0]

    def tracepi(t):
        return math.exp(w0 * t) * v_p[-1]

    masks = [_interval_mask(xs, O) for O in (O1, O2, O3)]
    wx = trapezoid_weights(nx)
    dt = T / nt
    acc = {"D": 0.0, "corr": 0.0}

    def on_step(k, t, w):
        g = math.exp(w0 * t)
        full = (g * sig_p - w[0], g * v_p - w[1], g * S_p - w[2])
        obs = sum(float(np.sum(wx[m] * np.abs(c[m]) ** 2)) for m, c in zip(masks, full))
        wt = 0.5 * dt if k in (0, nt) else dt
        acc["D"] += wt * obs
        corr = float(np.sum(wx * (p.b * np.abs(w[0]) ** 2 + p.rho_s * np.abs(w[1]) ** 2 + (p.kappa / p.mu) * np.abs(w[2]) ** 2)))
        acc["corr"] = max(acc["corr"], corr)

    zero = GridField.zeros(nx)
    traj = adjoint_solve(zero, sources, (trace0, tracepi), T, nx, nt, p, times=[0.0, T], on_step=on_step)
    dag = traj.final
    g = math.exp(w0 * T)
    final = GridField(g * sig_p - dag.rho, g * v_p - dag.u, g * S_p - dag.S)
    N = sum(float(simpson(np.abs(c) ** 2, x=xs)) for c in (final.rho, final.u, final.S))
    return {
        "k": beam.k,
        "nx": nx,
        "nt": nt,
        "N": N,
        "D": acc["D"],
        "ratio": N / acc["D"] if acc["D"] > 0 else math.inf,
        "correction_norm": math.sqrt(acc["corr"]),
        "trace_max": float(max(abs(v_p[0]), abs(v_p[-1]))),
    }


def beam_report(k, x0, r, O1, O2, O3, T, p, nx=None):
    """Per-``k`` table row: residual, concentration, sigma energy, and the experiment."""
    beam = build_beam(k, x0, r, p)
    xs = grid(beam_grid_size(k) if nx is None else nx)
    res = max(beam_residual(beam, t, xs) for t in np.linspace(0.0, T, 5))
    mass, tail = concentration(beam, T, xs)
    f0 = beam_fields(beam, 0.0, xs)
    v_mass = max(float(simpson(np.abs(beam_fields(beam, t, xs).u) ** 2, x=xs)) for t in np.linspace(0.0, T, 5))
    row = {
        "k": int(k),
        "residual": res,
        "sigma_mass_T": mass,
        "sigma_limit_T": math.sqrt(math.pi) * beam.eta(T, x0) ** 2,
        "tail_mass_T": tail,
        "v_mass": v_mass,
        "sigma_mean_0": abs(complex(simpson(f0.rho, x=xs))),
        "S_mean_0": abs(complex(simpson(f0.S, x=xs))),
    }
    row.update(observability_experiment(beam, O1, O2, O3, T, p, nx=nx))
    return row
