"""Eigenfamilies of the generator and its adjoint in per-mode coefficient form.

A mode-``n`` state is stored as three complex coefficients
``(c_rho, c_u, c_S)`` meaning ``(c_rho cos(nx), c_u sin(nx), c_S cos(nx))``.
Mode 0 carries a constant density only. All pairings are closed form.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateNormalizerError, NearSingularFrameError, NumericalError, SimplicityViolation
from .spectrum import ModeSpectrum, Multiplicity

CHAIN_TOL = 1e-8


class CoefVector(NamedTuple):
    n: int
    c_rho: complex
    c_u: complex
    c_S: complex

    @property
    def array(self):
        return np.array([self.c_rho, self.c_u, self.c_S], dtype=complex)


def gram_weights(n, p):
    """Diagonal of the metric ``G`` so that ``<x, y> = y^H G x`` for mode ``n``."""
    scale = math.pi if n == 0 else 0.5 * math.pi
    return scale * np.array([p.b, p.rho_s, p.kappa / p.mu])


def pairing(x, y, p):
    """Weighted inner product of two coefficient vectors (closed form)."""
    if x.n != y.n:
        # distinct Fourier modes are orthogonal on (0, pi)
        return 0j
    return complex(np.sum(gram_weights(x.n, p) * x.array * np.conj(y.array)))


def generator_matrix(n, p):
    """Action of the generator on mode-``n`` coefficients."""
    return np.array(
        [
            [0.0, -p.rho_s * n, 0.0],
            [p.b * n, 0.0, -n / p.rho_s],
            [0.0, p.mu * n / p.kappa, -1.0 / p.kappa],
        ]
    )


def adjoint_generator_matrix(n, p):
    """Action of the adjoint generator; equals ``G^{-1} A^H G``."""
    return np.array(
        [
            [0.0, p.rho_s * n, 0.0],
            [-p.b * n, 0.0, n / p.rho_s],
            [0.0, -p.mu * n / p.kappa, -1.0 / p.kappa],
        ]
    )


def fourier_frame(n, p):
    """Diagonal scaling of the orthonormal Fourier frame for mode ``n``."""
    return np.diag(1.0 / np.sqrt(gram_weights(n, p)))


def eigvec_raw(n, lam, p):
    """Unnormalized eigenvector for eigenvalue ``lam``."""
    return np.array([-1.0, lam / (p.rho_s * n), p.mu * lam / (p.rho_s * (1.0 + p.kappa * lam))])


def adjoint_eigvec_raw(n, lam, p):
    lc = np.conj(lam)
    return np.array([1.0, lc / (p.rho_s * n), -p.mu * lc / (p.rho_s * (1.0 + p.kappa * lc))])


def theta(n, lam, p):
    a2 = abs(lam) ** 2
    return math.sqrt(
        0.5 * math.pi
        * (p.b + a2 / (p.rho_s * n**2) + p.kappa * p.mu * a2 / (p.rho_s**2 * abs(1.0 + p.kappa * lam) ** 2))
    )


def psi(n, lam, p):
    """Adjoint normalizer; its square root branch is fixed by the real modulus below."""
    lc = np.conj(lam)
    a2 = abs(lam) ** 2
    num = -p.b + lc**2 / (p.rho_s * n**2) - p.mu * p.kappa * lc**2 / (p.rho_s**2 * (1.0 + p.kappa * lc) ** 2)
    den = math.sqrt(p.b + a2 / (p.rho_s * n**2) + p.mu * p.kappa * a2 / (p.rho_s**2 * abs(1.0 + p.kappa * lam) ** 2))
    return complex(math.sqrt(0.5 * math.pi) * num / den)


@dataclass(frozen=True)
class BasisPair:
    """Forward and adjoint families for one mode.

    ``forward[:, l]`` and ``adjoint[:, l]`` are coefficient columns. In Jordan
    cases ``A_n`` (the generator in the forward basis) carries ``-1`` on the
    superdiagonal of each chain.
    """

    n: int
    forward: np.ndarray
    adjoint: np.ndarray
    structure: Multiplicity
    theta: tuple
    psi: tuple
    eigenvalues: tuple
    A_n: np.ndarray

    def xi(self, l):
        return CoefVector(self.n, *self.forward[:, l])

    def xi_star(self, l):
        return CoefVector(self.n, *self.adjoint[:, l])

    def pairing_table(self, p):
        """``T[l, q] = <xi_l, xi*_q>``."""
        G = gram_weights(self.n, p)
        return self.adjoint.conj().T @ (G[:, None] * self.forward)

    @property
    def size(self):
        return self.forward.shape[1]


def zero_mode_basis(p):
    v = np.array([[1.0 / math.sqrt(p.b * math.pi)], [0.0], [0.0]], dtype=complex)
    return BasisPair(
        n=0,
        forward=v,
        adjoint=v.copy(),
        structure=Multiplicity.SIMPLE,
        theta=(math.sqrt(p.b * math.pi),),
        psi=(math.sqrt(p.b * math.pi),),
        eigenvalues=(0j,),
        A_n=np.zeros((1, 1), dtype=complex),
    )


def _dual_family(X, n, p):
    """Columns ``Y`` with ``Y^H G X = I``."""
    G = gram_weights(n, p)
    return np.linalg.inv(X).conj().T / G[:, None]


def _check_normalizers(lams, p, n):
    for lam in lams:
        if abs(1.0 + p.kappa * lam) < 1e-12:
            raise DegenerateNormalizerError("1 + kappa*lambda vanishes", n=n, lam=lam)


def _simple_basis(mode, p):
    n = mode.n
    lams = tuple(complex(z) for z in mode.roots)
    _check_normalizers(lams, p, n)
    th = tuple(theta(n, lam, p) for lam in lams)
    ps = tuple(psi(n, lam, p) for lam in lams)
    for l, s in enumerate(ps):
        if abs(s) < 1e-12:
            raise SimplicityViolation("adjoint normalizer vanishes", n=n, l=l + 1, psi=s)
    X = np.column_stack([eigvec_raw(n, lam, p) / t for lam, t in zip(lams, th)]).astype(complex)
    Y = np.column_stack([adjoint_eigvec_raw(n, lam, p) / np.conj(s) for lam, s in zip(lams, ps)]).astype(complex)
    # repair: scale each adjoint so the diagonal pairing is exactly one
    G = gram_weights(n, p)
    diag = np.einsum("il,il->l", np.conj(Y), G[:, None] * X)
    Y = Y / np.conj(diag)
    return BasisPair(n, X, Y, Multiplicity.SIMPLE, th, ps, lams, np.diag(np.array(lams)))


def double_root_constant(lam, p):
    k = 1.0 + p.kappa * lam
    num = p.b * p.rho_s**2 * k**4 + p.mu * p.kappa**3 * lam**4
    den = lam * k * (p.b * p.rho_s**2 * k**3 + p.mu * p.kappa**2 * lam**3)
    return num / den


def _double_basis(mode, p):
    n = mode.n
    l1, lam = mode.lambda1.real, mode.lambda2.real
    _check_normalizers((l1, lam), p, n)
    th1, th2 = theta(n, l1, p), theta(n, lam, p)
    k = 1.0 + p.kappa * lam
    c = double_root_constant(lam, p)
    xi3 = np.array(
        [
            c - 1.0 / lam,
            -c * lam / (p.rho_s * n),
            (p.mu * p.kappa * lam - c * p.mu * lam * k) / (p.rho_s * k**2),
        ]
    ) / th2
    X = np.column_stack([eigvec_raw(n, l1, p) / th1, eigvec_raw(n, lam, p) / th2, xi3]).astype(complex)
    A_n = np.array([[l1, 0, 0], [0, lam, -1.0], [0, 0, lam]], dtype=complex)
    psi2 = -0.5 * math.pi * (p.b / lam + p.mu * p.kappa**2 * lam**2 / (p.rho_s**2 * k**3)) / th2
    return _finish_jordan(mode, p, X, A_n, (th1, th2, th2), (psi(n, l1, p), psi2, psi2))


def _triple_basis(mode, p):
    n = mode.n
    lam = mode.lambda1.real
    _check_normalizers((lam,), p, n)
    kap, rs, mu = p.kappa, p.rho_s, p.mu
    th = math.sqrt(3.0 * math.pi * p.b)
    X = np.array(
        [
            [-1.0, 1.5 * kap, -6.75 * kap**2],
            [-1.0 / (3.0 * kap * rs * n), -0.5 / (rs * n), -0.75 * kap / (rs * n)],
            [-mu / (2.0 * kap * rs), -1.5 * mu / rs, -27.0 * mu * kap / (8.0 * rs)],
        ],
        dtype=complex,
    ) / th
    A_n = np.array([[lam, -1.0, 0], [0, lam, -1.0], [0, 0, lam]], dtype=complex)
    ps = -6.75 * p.b * kap**2 * math.pi / th
    return _finish_jordan(mode, p, X, A_n, (th, th, th), (ps, ps, ps))


def _finish_jordan(mode, p, X, A_n, th, ps):
    n = mode.n
    A = generator_matrix(n, p)
    resid = np.linalg.norm(A @ X - X @ A_n) / max(1.0, np.linalg.norm(A))
    if resid > CHAIN_TOL:
        raise NumericalError("Jordan chain relations fail", n=n, residual=resid)
    if np.linalg.cond(X) > 1e12:
        raise NearSingularFrameError("Jordan frame is near singular", n=n)
    Y = _dual_family(X, n, p)
    lams = tuple(complex(z) for z in mode.roots)
    return BasisPair(n, X, Y, mode.multiplicity, th, ps, lams, A_n)


def build_basis(mode: ModeSpectrum, p):
    """Forward/adjoint families for one mode, per its multiplicity tag."""
    if mode.multiplicity is Multiplicity.SIMPLE:
        return _simple_basis(mode, p)
    if mode.multiplicity is Multiplicity.DOUBLE:
        return _double_basis(mode, p)
    return _triple_basis(mode, p)


def build_bases(modes, p):
    """Bases for mode 0 followed by each supplied ``ModeSpectrum``."""
    return [zero_mode_basis(p)] + [build_basis(m, p) for m in modes]


@dataclass(frozen=True)
class GammaMatrix:
    n: int
    matrix: np.ndarray
    inverse: np.ndarray
    norm: float
    inverse_norm: float


def gamma_matrix(basis: BasisPair, p) -> GammaMatrix:
    """Map from orthonormal Fourier coordinates to eigen coordinates."""
    Phi = fourier_frame(basis.n, p)[: basis.size, : basis.size]
    X = basis.forward
    if np.linalg.cond(X) > 1e12:
        raise NearSingularFrameError("eigenframe condition number exceeds 1e12", n=basis.n)
    inverse = np.linalg.solve(Phi, X)
    G = gram_weights(basis.n, p)[: basis.size]
    # X^{-1} = Y^H G by biorthonormality
    matrix = (basis.adjoint.conj().T * G[None, :]) @ Phi
    return GammaMatrix(basis.n, matrix, inverse, float(np.linalg.norm(matrix, 2)), float(np.linalg.norm(inverse, 2)))


def jordan_chain_residuals(basis: BasisPair, p):
    """Forward and adjoint residuals of ``A X = X A_n`` and ``A* Y = Y A_n^H``."""
    if basis.n == 0:
        return 0.0, 0.0
    A = generator_matrix(basis.n, p)
    As = adjoint_generator_matrix(basis.n, p)
    rf = np.linalg.norm(A @ basis.forward - basis.forward @ basis.A_n)
    ra = np.linalg.norm(As @ basis.adjoint - basis.adjoint @ basis.A_n.conj().T)
    return float(rf), float(ra)
