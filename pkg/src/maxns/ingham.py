"""Ingham-type inequality for the oscillating part of the spectrum, and
coefficient recovery from localized observations of the adjoint density."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .spectrum import Multiplicity, solve_mode

DEFAULT_M = 10
RESONANCE_TOL = 1e-12


@dataclass(frozen=True)
class FrequencyFamily:
    """Frequencies ``mu_n`` for ``M <= |n| <= n_max``, ordered by index ``n``."""

    M: int
    n_max: int
    index: np.ndarray
    mu: np.ndarray
    gap: float
    min_spacing: float
    epsilon: np.ndarray
    delta: np.ndarray

    def __len__(self):
        return self.mu.size


def frequencies(M, n_max, p, spectra=None) -> FrequencyFamily:
    """``mu_n = -i lambda2_n`` for ``n >= M`` and ``-i lambda3_|n|`` for ``n <= -M``.

    ``spectra`` may map ``n`` to a :class:`ModeSpectrum`; missing modes are solved.
    Raises :class:`NumericalError` naming the offending ``n`` when the gap
    ``c_wave / 2`` is violated or a mode is not a conjugate pair.
    """
    if M < 1 or n_max < M:
        raise ValidationError("M", "need 1 <= M <= n_max")
    lookup = spectra if spectra is not None else {}
    modes = {n: lookup[n] if n in lookup else solve_mode(n, p) for n in range(M, n_max + 1)}
    for n, m in modes.items():
        if m.multiplicity is not Multiplicity.SIMPLE or not m.is_conjugate_pair:
            raise NumericalError("mode is not a conjugate pair; increase M", n=n)
    pos = np.arange(M, n_max + 1)
    lam2 = np.array([modes[n].lambda2 for n in pos])
    lam3 = np.array([modes[n].lambda3 for n in pos])
    index = np.concatenate([-pos[::-1], pos])
    mu = np.concatenate([(-1j * lam3)[::-1], -1j * lam2])
    gap = 0.5 * p.c_wave
    spacing = np.diff(mu.real)
    # the jump across the excluded band (-M, M) is wide by construction
    bad = np.nonzero(spacing < gap)[0]
    if bad.size:
        raise NumericalError("gap condition violated", n=int(index[bad[0]]), spacing=float(spacing[bad[0]]))
    eps = lam2.real + 0.5 * (p.omega0 + 1.0 / p.kappa)
    delta = lam2.imag - pos * p.c_wave
    return FrequencyFamily(M, n_max, index, mu, gap, float(spacing.min()), eps, delta)


def gram_matrix(mu, T):
    """``G[j, l] = int_0^T exp(i (mu_j - conj(mu_l)) t) dt`` in closed form."""
    mu = np.asarray(mu, dtype=complex)
    s = mu[:, None] - np.conj(mu)[None, :]
    G = np.empty(s.shape, dtype=complex)
    small = np.abs(s) < RESONANCE_TOL
    G[small] = T
    z = 1j * s[~small]
    G[~small] = np.expm1(z * T) / z
    return G


def gram_quadrature(mu, T, panels=100, order=100):
    """Composite Gauss-Legendre evaluation of the same Gram entries."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, T, panels + 1)
    half = 0.5 * np.diff(edges)
    t = (edges[:-1, None] + half[:, None] * (x[None, :] + 1.0)).ravel()
    wt = (half[:, None] * w[None, :]).ravel()
    E = np.exp(1j * np.outer(np.asarray(mu), t))
    return (E * wt[None, :]) @ E.conj().T


def ingham_constants(family: FrequencyFamily, T):
    """Best constants ``(C_low, C_high)`` for the truncated family on ``(0, T)``."""
    if T <= 2.0 * math.pi / family.gap:
        raise ValidationError("T", f"horizon must exceed 2 pi / gap = {2.0 * math.pi / family.gap:.6g}")
    G = gram_matrix(family.mu, T)
    asym = np.abs(G - G.conj().T).max()
    if asym > 1e-12 * max(1.0, np.abs(G).max()):
        raise NumericalError("Gram matrix is not Hermitian", asymmetry=float(asym))
    ev = np.linalg.eigvalsh(0.5 * (G + G.conj().T))
    return {"C_low": float(ev[0]), "C_high": float(ev[-1])}


# ---------------------------------------------------------------------------
# coefficient recovery


def _observation_model(bases, n_max, times, xs):
    """Columns: constant, then ``e^{conj(lam) t} a_rho cos(nx)`` for each ``(n, l)``."""
    cols = [np.full((times.size, xs.size), bases[0].adjoint[0, 0], dtype=complex).ravel()]
    labels = [(0, 0)]
    for n in range(1, n_max + 1):
        b = bases[n]
        cos = np.cos(n * xs)
        for l in range(b.size):
            lam = b.eigenvalues[l]
            col = np.outer(np.exp(np.conj(lam) * times) * b.adjoint[0, l], cos)
            cols.append(col.ravel())
            labels.append((n, l + 1))
    return np.column_stack(cols), labels


def observation_grid(O1, T, nt=181, nx=61):
    return np.linspace(0.0, T, nt), np.linspace(O1[0], O1[1], nx)


def synthesize_observation(alpha, bases, n_max, times, xs):
    """Adjoint density on ``times x xs`` for coefficients ``alpha = (alpha0, alpha_{n,l}...)``.

    Uses the modal adjoint evolution (each adjoint eigenvector decays with the
    conjugate eigenvalue).
    """
    model, _ = _observation_model(bases, n_max, times, xs)
    return (model @ np.asarray(alpha, dtype=complex)).reshape(times.size, xs.size)


def coefficient_recovery(sigma_obs, times, xs, n_max, bases, rcond=1e-10):
    """Least-squares fit of the exponential model to an observation on ``O1``.

    Singular values below ``rcond * s_max`` are truncated. Returns the
    recovered coefficient vector together with residual and conditioning data.
    """
    model, labels = _observation_model(bases, n_max, times, xs)
    rhs = np.asarray(sigma_obs, dtype=complex).ravel()
    if rhs.size != model.shape[0]:
        raise ValidationError("sigma_obs", f"expected {model.shape[0]} samples, got {rhs.size}")
    coef, _, rank, sv = np.linalg.lstsq(model, rhs, rcond=rcond)
    resid = float(np.linalg.norm(model @ coef - rhs))
    return {
        "alpha": coef,
        "labels": labels,
        "residual": resid,
        "rank": int(rank),
        "condition": float(sv[0] / sv[-1]) if sv[-1] > 0 else math.inf,
        "singular_values": sv,
    }


def unique_continuation_margin(bases, n_max, O1, T, nt=181, nx=61):
    """Smallest observed L2 norm over unit coefficient vectors.

    A positive value means no nonzero combination of the first ``n_max``
    modes can vanish on ``(0, T) x O1`` below that level.
    """
    times, xs = observation_grid(O1, T, nt, nx)
    model, _ = _observation_model(bases, n_max, times, xs)
    wt = np.full(times.size, times[1] - times[0])
    wt[[0, -1]] *= 0.5
    wx = np.full(xs.size, xs[1] - xs[0])
    wx[[0, -1]] *= 0.5
    weights = np.sqrt(np.outer(wt, wx).ravel())
    sv = np.linalg.svd(weights[:, None] * model, compute_uv=False)
    return float(sv[-1])
