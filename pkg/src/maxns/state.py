"""Grid fields, modal states, the weighted inner product and projections."""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .basis import gram_weights
from .errors import ConfigurationError, ValidationError

DEFAULT_NX = 4097
DEFAULT_NMAX = 64


def grid(nx):
    return np.linspace(0.0, np.pi, nx)


@dataclass
class GridField:
    """Samples of (density, velocity, stress) on ``nx`` uniform points of [0, pi]."""

    rho: np.ndarray
    u: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=complex)
        self.u = np.asarray(self.u, dtype=complex)
        self.S = np.asarray(self.S, dtype=complex)
        if not (self.rho.shape == self.u.shape == self.S.shape) or self.rho.ndim != 1:
            raise ValidationError("field", "rho, u, S must be 1-D arrays of equal length")
        if self.nx < 16:
            raise ValidationError("nx", "at least 16 grid points are required")

    @property
    def nx(self):
        return self.rho.size

    @property
    def x(self):
        return grid(self.nx)

    @classmethod
    def zeros(cls, nx):
        z = np.zeros(nx, dtype=complex)
        return cls(z, z.copy(), z.copy())

    def stack(self):
        return np.stack([self.rho, self.u, self.S])

    @classmethod
    def from_stack(cls, arr):
        return cls(arr[0], arr[1], arr[2])

    def __add__(self, other):
        return GridField.from_stack(self.stack() + other.stack())

    def __sub__(self, other):
        return GridField.from_stack(self.stack() - other.stack())

    def __mul__(self, c):
        return GridField.from_stack(c * self.stack())

    __rmul__ = __mul__


@dataclass
class ModalState:
    """Coefficients in the eigenbasis: ``alpha0`` on xi_0 and ``coeffs[n-1, l]`` on xi_{n,l+1}."""

    alpha0: complex = 0j
    coeffs: np.ndarray = field(default_factory=lambda: np.zeros((0, 3), dtype=complex))

    def __post_init__(self):
        self.alpha0 = complex(self.alpha0)
        self.coeffs = np.asarray(self.coeffs, dtype=complex).reshape(-1, 3)

    @property
    def n_max(self):
        return self.coeffs.shape[0]

    @classmethod
    def zeros(cls, n_max):
        return cls(0j, np.zeros((n_max, 3), dtype=complex))

    def l2_norm_sq(self):
        return float(abs(self.alpha0) ** 2 + np.sum(np.abs(self.coeffs) ** 2))

    def __add__(self, other):
        return ModalState(self.alpha0 + other.alpha0, self.coeffs + other.coeffs)

    def __sub__(self, other):
        return ModalState(self.alpha0 - other.alpha0, self.coeffs - other.coeffs)

    def __mul__(self, c):
        return ModalState(c * self.alpha0, c * self.coeffs)

    __rmul__ = __mul__


def _check_nx(x, y):
    if x.nx != y.nx:
        raise ValidationError("nx", f"grid size mismatch ({x.nx} vs {y.nx})")


def inner_product(x: GridField, y: GridField, p) -> complex:
    """Simpson approximation of b<rho,sigma> + rho_s<u,v> + (kappa/mu)<S,S~>."""
    _check_nx(x, y)
    if not (np.any(x.rho) or np.any(x.u) or np.any(x.S)):
        return 0j
    integrand = p.b * x.rho * np.conj(y.rho) + p.rho_s * x.u * np.conj(y.u) + (p.kappa / p.mu) * x.S * np.conj(y.S)
    return complex(simpson(integrand, x=x.x))


def z_norm_sq(x: GridField, p) -> float:
    return inner_product(x, x, p).real


def render_coefficients(c0, c, nx):
    """Sample fields from Fourier coefficients.

    ``c0`` is the constant density value and ``c[n-1] = (c_rho, c_u, c_S)``.
    """
    xs = grid(nx)
    n = np.arange(1, c.shape[0] + 1)
    cos = np.cos(np.outer(n, xs))
    sin = np.sin(np.outer(n, xs))
    rho = c0 + c[:, 0] @ cos
    u = c[:, 1] @ sin
    S = c[:, 2] @ cos
    u[0] = u[-1] = 0.0
    return GridField(rho, u, S)


def modal_to_fourier(s: ModalState, bases):
    """Coefficients ``(c0, c)`` of the field represented by ``s``."""
    c = np.zeros((s.n_max, 3), dtype=complex)
    for n in range(1, s.n_max + 1):
        c[n - 1] = bases[n].forward @ s.coeffs[n - 1]
    c0 = s.alpha0 * bases[0].forward[0, 0]
    return c0, c


def fourier_to_modal(c0, c, bases, p):
    """Eigen coordinates from Fourier coefficients, via the adjoint pairing."""
    coeffs = np.zeros((c.shape[0], 3), dtype=complex)
    for n in range(1, c.shape[0] + 1):
        G = gram_weights(n, p)
        coeffs[n - 1] = bases[n].adjoint.conj().T @ (G * c[n - 1])
    alpha0 = gram_weights(0, p)[0] * c0 * np.conj(bases[0].adjoint[0, 0])
    return ModalState(alpha0, coeffs)


def reconstruct(s: ModalState, nx, p, bases) -> GridField:
    """Sum alpha0 xi_0 + sum d_{n,l} xi_{n,l} on an ``nx``-point grid."""
    if nx < 16:
        raise ValidationError("nx", "at least 16 grid points are required")
    if len(bases) <= s.n_max:
        raise ValidationError("bases", f"need bases for modes 0..{s.n_max}")
    c0, c = modal_to_fourier(s, bases)
    return render_coefficients(c0, c, nx)


def fourier_coefficients(x: GridField, n_max):
    """Simpson projections onto cos/sin: returns ``(mean rho, c[n-1])`` with unit-normalized modes."""
    xs = x.x
    n = np.arange(1, n_max + 1)
    cos = np.cos(np.outer(n, xs))
    sin = np.sin(np.outer(n, xs))
    half = 2.0 / np.pi
    c = np.empty((n_max, 3), dtype=complex)
    c[:, 0] = half * simpson(cos * x.rho, x=xs, axis=-1)
    c[:, 1] = half * simpson(sin * x.u, x=xs, axis=-1)
    c[:, 2] = half * simpson(cos * x.S, x=xs, axis=-1)
    c0 = simpson(x.rho, x=xs) / np.pi
    return c0, c


def project(x: GridField, n_max, p, bases) -> ModalState:
    """Eigen coordinates ``<x, xi*>`` computed by quadrature.

    The constant stress component lies outside the mean-zero stress space and
    is dropped; :func:`mean_checks` reports it.
    """
    if len(bases) <= n_max:
        raise ValidationError("n_max", f"only {len(bases) - 1} bases available")
    if x.nx < 8 * n_max:
        raise ConfigurationError("nx", f"grid of {x.nx} points under-resolves {n_max} modes (need >= {8 * n_max})")
    c0, c = fourier_coefficients(x, n_max)
    return fourier_to_modal(c0, c, bases, p)


def mean_checks(x: GridField):
    xs = x.x
    return {"rho_mean": float(simpson(x.rho, x=xs).real), "S_mean": float(simpson(x.S, x=xs).real)}


def modal_norm_sq(s: ModalState, bases, p) -> float:
    """Exact Z-norm squared of the field represented by ``s`` (closed form)."""
    c0, c = modal_to_fourier(s, bases)
    total = gram_weights(0, p)[0] * abs(c0) ** 2
    for n in range(1, s.n_max + 1):
        total += float(np.sum(gram_weights(n, p) * np.abs(c[n - 1]) ** 2))
    return float(total)


def riesz_bounds(bases, p):
    """Exact frame constants ``(C1, C2)``: extreme eigenvalues of ``X^H G X`` over all modes."""
    lo, hi = 1.0, 1.0  # mode 0 is orthonormal
    for b in bases[1:]:
        G = gram_weights(b.n, p)
        ev = np.linalg.eigvalsh(b.forward.conj().T @ (G[:, None] * b.forward))
        lo, hi = min(lo, ev[0]), max(hi, ev[-1])
    return float(lo), float(hi)


def random_modal_state(n_max, rng, decay=True):
    """Complex Gaussian coefficients with variance ``1/(1+n^2)`` per mode."""
    n = np.arange(1, n_max + 1)
    sd = np.sqrt(1.0 / (1.0 + n**2)) if decay else np.ones(n_max)
    z = (rng.standard_normal((n_max, 3)) + 1j * rng.standard_normal((n_max, 3))) / np.sqrt(2.0)
    a0 = (rng.standard_normal() + 1j * rng.standard_normal()) / np.sqrt(2.0)
    return ModalState(a0, z * sd[:, None])
