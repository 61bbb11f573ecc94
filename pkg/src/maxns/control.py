"""Projected control pairs, Gramians, minimum-energy null controls and a localized
least-squares control.

The control enters the density equation. Its mode-``n`` part is
``g_n(t) e_n(x)`` with ``e_0 = 1/sqrt(pi)`` and ``e_n = sqrt(2/pi) cos(nx)``.
"""

import functools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.special

from .basis import BasisPair, gram_weights
from .errors import GeometryError, SingularGramianError, ValidationError
from .state import ModalState

DEFAULT_NT = 512
RESONANCE_TOL = 1e-12


@dataclass(frozen=True)
class ProjectedPair:
    n: int
    A: np.ndarray
    B: np.ndarray

    @property
    def is_diagonal(self):
        return not np.any(self.A - np.diag(np.diag(self.A)))


def control_mode_value(n):
    """Density coefficient of the unit control profile ``e_n``."""
    return 1.0 / math.sqrt(math.pi) if n == 0 else math.sqrt(2.0 / math.pi)


def mode_matrices(basis: BasisPair, p) -> ProjectedPair:
    """``(A_n, B_n)`` in the forward eigenbasis.

    ``B_n`` is the eigen coordinate vector of the density profile ``e_n``,
    i.e. ``<e_n, xi*_{n,l}>``; in the simple case this is ``b sqrt(pi/2) / conj(psi)``.
    """
    G0 = gram_weights(basis.n, p)[0]
    B = np.conj(basis.adjoint[0, :]) * G0 * control_mode_value(basis.n)
    return ProjectedPair(basis.n, np.array(basis.A_n, dtype=complex), B.astype(complex))


def hautus_check(pair: ProjectedPair, tol=1e-10):
    """Smallest singular value of ``[lam I - A ; B]`` at each eigenvalue."""
    k = pair.A.shape[0]
    lams = np.diag(pair.A)
    min_sv = []
    for lam in lams:
        M = np.hstack([lam * np.eye(k) - pair.A, pair.B.reshape(k, 1)])
        sv = np.linalg.svd(M, compute_uv=False)
        min_sv.append(float(sv[k - 1]))
    scale = max(1.0, float(np.abs(pair.A).max()), float(np.abs(pair.B).max()))
    ok = all(s > tol * scale for s in min_sv)
    return {"ok": ok, "min_sv": min_sv, "rank": k if ok else None}


def mode_expm(A, t):
    """``exp(t A)`` for the diagonal or Jordan-type per-mode matrices.

    Uses ``e^{tD}(I + tN + t^2 N^2 / 2)`` with ``D`` the diagonal and ``N``
    the (commuting) nilpotent part. ``t`` may be an array; the result then
    has a leading time axis.
    """
    t = np.asarray(t, dtype=float)
    D = np.diag(A)
    N = A - np.diag(D)
    eD = np.exp(np.multiply.outer(t, D))
    if not np.any(N):
        return eD[..., :, None] * np.eye(A.shape[0])
    k = A.shape[0]
    I = np.eye(k)
    N2 = N @ N
    poly = I + np.multiply.outer(t, N) + 0.5 * np.multiply.outer(t**2, N2)
    return eD[..., :, None] * poly


def _resonant_quotient(s, T):
    """``(e^{sT} - 1)/s`` with the removable singularity replaced by ``T``."""
    s = np.asarray(s, dtype=complex)
    out = np.empty_like(s)
    small = np.abs(s) < RESONANCE_TOL
    out[small] = T
    out[~small] = np.expm1(s[~small] * T) / s[~small]
    return out


def gramian_closed_form(lams, B, T):
    lams = np.asarray(lams, dtype=complex)
    s = lams[:, None] + np.conj(lams)[None, :]
    return np.outer(B, np.conj(B)) * _resonant_quotient(s, T)


@functools.lru_cache(maxsize=8)
def _legendre(n):
    return scipy.special.roots_legendre(n)


def gramian_quadrature(pair: ProjectedPair, T, n_nodes=2000):
    """Gauss-Legendre quadrature of ``int_0^T e^{sA} B B^H e^{sA^H} ds``."""
    x, w = _legendre(n_nodes)
    s = 0.5 * T * (x + 1.0)
    w = 0.5 * T * w
    E = mode_expm(pair.A, s)
    v = E @ pair.B
    return np.einsum("k,ki,kj->ij", w, v, np.conj(v))


@dataclass(frozen=True)
class GramianBlock:
    n: int
    T: float
    W: np.ndarray
    W_inv: np.ndarray
    norm: float
    inv_norm: float
    min_eig: float


def gramian(pair: ProjectedPair, T, basis: Optional[BasisPair] = None) -> GramianBlock:
    """Controllability Gramian of one mode (closed form when ``A_n`` is diagonal)."""
    if not T > 0:
        raise ValidationError("T", "horizon must be positive")
    if pair.is_diagonal:
        W = gramian_closed_form(np.diag(pair.A), pair.B, T)
    else:
        n_nodes = max(64, int(8 * T * (np.abs(pair.A).max() + 1.0)))
        W = gramian_quadrature(pair, T, n_nodes=min(n_nodes, 4000))
    W = 0.5 * (W + W.conj().T)
    ev = np.linalg.eigvalsh(W)
    norm = float(ev[-1])
    if ev[0] < 1e-14 * norm or ev[0] <= 0:
        raise SingularGramianError("Gramian is numerically singular", n=pair.n, min_eig=float(ev[0]), norm=norm)
    W_inv = np.linalg.inv(W)
    W_inv = 0.5 * (W_inv + W_inv.conj().T)
    return GramianBlock(pair.n, float(T), W, W_inv, norm, float(1.0 / ev[0]), float(ev[0]))


@dataclass(frozen=True)
class ModeControl:
    """Closed-form minimum-energy control of one mode.

    ``g(t) = -B^H e^{(T-t)A^H} w`` with ``w = W^{-1} e^{TA} z0``.
    """

    pair: ProjectedPair
    gram: GramianBlock
    z0: np.ndarray
    w: np.ndarray

    @property
    def T(self):
        return self.gram.T

    def __call__(self, t):
        E = mode_expm(self.pair.A.conj().T, self.T - np.asarray(t, dtype=float))
        return -(E @ self.w) @ np.conj(self.pair.B)

    def energy(self):
        """``int_0^T |g|^2 dt = w^H W w`` (exact)."""
        return float(np.real(np.conj(self.w) @ self.gram.W @ self.w))

    def state(self, t):
        """Exact controlled trajectory ``e^{tA} z0 - W_t e^{(T-t)A^H} w``."""
        t = float(t)
        Et = mode_expm(self.pair.A, t)
        if t == 0.0:
            return Et @ self.z0
        Wt = partial_gramian(self.pair, t)
        return Et @ self.z0 - Wt @ (mode_expm(self.pair.A.conj().T, self.T - t) @ self.w)


def energy_constant(bases, T, p):
    """Smallest ``C`` with ``||g||^2 <= C ||z0||_Z^2`` for every initial state.

    Per mode this is the top generalized eigenvalue of the energy form
    ``e^{TA^H} W^{-1} e^{TA}`` against the Z-metric ``X^H G X``.
    """
    worst = 0.0
    for b in bases:
        pair = mode_matrices(b, p)
        E = mode_expm(pair.A, T)
        M = E.conj().T @ gramian(pair, T).W_inv @ E
        G = gram_weights(b.n, p)[: b.size]
        H = b.forward.conj().T @ (G[:, None] * b.forward)
        ev = scipy.linalg.eigh(0.5 * (M + M.conj().T), 0.5 * (H + H.conj().T), eigvals_only=True)
        worst = max(worst, float(ev[-1]))
    return worst


def partial_gramian(pair, t):
    if pair.is_diagonal:
        return gramian_closed_form(np.diag(pair.A), pair.B, t)
    n_nodes = max(64, int(8 * t * (np.abs(pair.A).max() + 1.0)))
    return gramian_quadrature(pair, t, n_nodes=min(n_nodes, 4000))


def mode_control(pair: ProjectedPair, basis, T, z0n, gram: Optional[GramianBlock] = None) -> ModeControl:
    """Minimum-energy control steering ``z0n`` to zero at time ``T``."""
    gram = gram if gram is not None else gramian(pair, T, basis)
    z0n = np.asarray(z0n, dtype=complex).reshape(-1)
    w = gram.W_inv @ (mode_expm(pair.A, T) @ z0n)
    return ModeControl(pair, gram, z0n, w)


@dataclass
class ControlSignal:
    """Density control sampled on a time grid.

    ``modal[j, n]`` is the coefficient of ``e_n`` at ``times[j]``. Null controls
    keep their closed-form per-mode data in ``exact``; localized controls keep
    their hat-function coefficients in ``hats``.
    """

    times: np.ndarray
    modal: np.ndarray
    support: object = "everywhere"
    exact: Optional[list] = None
    hats: Optional[dict] = None
    info: dict = field(default_factory=dict)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def T(self):
        return float(self.times[-1])

    @property
    def n_max(self):
        return self.modal.shape[1] - 1

    def coefficients_at(self, t):
        """Mode coefficients at time ``t``: exact if available, else linear interpolation."""
        if self.exact is not None:
            return self._exact_coefficients(t)
        re = [np.interp(t, self.times, self.modal[:, k].real) for k in range(self.modal.shape[1])]
        im = [np.interp(t, self.times, self.modal[:, k].imag) for k in range(self.modal.shape[1])]
        return np.array(re) + 1j * np.array(im)

    def _exact_coefficients(self, t):
        cache = self._cache.get("fast")
        if cache is None:
            # diagonal modes: g_n(t) = sum_l C_nl exp((T - t) conj(lam_nl))
            diag = [k for k, mc in enumerate(self.exact) if mc.pair.is_diagonal]
            width = max(len(mc.w) for mc in self.exact)
            C = np.zeros((len(diag), width), dtype=complex)
            L = np.zeros((len(diag), width), dtype=complex)
            for row, k in enumerate(diag):
                mc = self.exact[k]
                m = len(mc.w)
                C[row, :m] = -np.conj(mc.pair.B) * mc.w
                L[row, :m] = np.conj(np.diag(mc.pair.A))
            others = [k for k in range(len(self.exact)) if k not in set(diag)]
            cache = (np.array(diag, dtype=int), C, L, others)
            self._cache["fast"] = cache
        diag, C, L, others = cache
        out = np.empty(len(self.exact), dtype=complex)
        out[diag] = np.sum(C * np.exp((self.T - t) * L), axis=1)
        for k in others:
            out[k] = self.exact[k](t)
        return out

    def field_at(self, t, xs):
        """Control profile ``f(t, x)`` on the points ``xs``."""
        xs = np.asarray(xs, dtype=float)
        if self.hats is not None:
            tw = _hat_values(self.hats["t_nodes"], t)
            xw = _hat_matrix(self.hats["x_nodes"], self.hats["x_width"], xs)
            return (tw @ self.hats["coef"]) @ xw
        g = self.coefficients_at(t)
        n = np.arange(1, g.size)
        return g[0] / math.sqrt(math.pi) + math.sqrt(2.0 / math.pi) * (g[1:] @ np.cos(np.outer(n, xs)))

    def energy(self):
        """``int_0^T ||f(t)||^2_{L^2} dt``."""
        if self.exact is not None:
            return float(sum(mc.energy() for mc in self.exact))
        if self.hats is not None:
            c = self.hats["coef"]
            return float(np.real(np.sum(np.conj(c) * (self.hats["Mt"] @ c @ self.hats["Mx"]))))
        return float(np.trapezoid(np.sum(np.abs(self.modal) ** 2, axis=1), self.times))

    def per_mode_energies(self):
        if self.exact is not None:
            return [mc.energy() for mc in self.exact]
        return list(np.trapezoid(np.abs(self.modal) ** 2, self.times, axis=0))


def assemble_control(z0: ModalState, T, p, bases, nt=DEFAULT_NT) -> ControlSignal:
    """Null control acting on the whole interval, one minimum-energy control per mode."""
    if not T > 0:
        raise ValidationError("T", "horizon must be positive")
    if len(bases) <= z0.n_max:
        raise ValidationError("n_max", f"need bases for modes 0..{z0.n_max}")
    times = np.linspace(0.0, T, nt + 1)
    controls = []
    for n in range(z0.n_max + 1):
        pair = mode_matrices(bases[n], p)
        zn = np.array([z0.alpha0]) if n == 0 else z0.coeffs[n - 1]
        try:
            controls.append(mode_control(pair, bases[n], T, zn))
        except SingularGramianError as exc:
            raise SingularGramianError(f"mode {n}: {exc}", n=n) from exc
    modal = np.column_stack([mc(times) for mc in controls])
    return ControlSignal(times, modal, "everywhere", exact=controls)


def exact_terminal_state(signal: ControlSignal) -> ModalState:
    """Terminal modal state of a null control, from the closed-form trajectory."""
    if signal.exact is None:
        raise ValidationError("signal", "closed-form data is only kept for null controls")
    d = [mc.state(signal.T) for mc in signal.exact]
    return ModalState(d[0][0], np.array(d[1:]).reshape(-1, 3))


# ---------------------------------------------------------------------------
# piecewise-linear input response


def linear_input_propagators(A, B, h):
    """One-step maps for ``x' = A x + B g`` with ``g`` linear on ``[0, h]``.

    Returns ``(E, P0, P1)`` with ``x(h) = E x(0) + P0 B g(0) + P1 B g(h)``, all
    exact (augmented matrix exponential).
    """
    k = A.shape[0]
    M = np.zeros((3 * k, 3 * k), dtype=complex)
    M[:k, :k] = A
    M[:k, k : 2 * k] = np.eye(k)
    M[k : 2 * k, 2 * k :] = np.eye(k) / h
    F = scipy.linalg.expm(M * h)
    E = F[:k, :k]
    E12 = F[:k, k : 2 * k]
    E13 = F[:k, 2 * k :]
    return E, (E12 - E13) @ B, E13 @ B


def _hat_values(nodes, t):
    """Values of the uniform time hats at ``t`` (length ``len(nodes)``)."""
    nodes = np.asarray(nodes)
    h = nodes[1] - nodes[0]
    return np.clip(1.0 - np.abs(t - nodes) / h, 0.0, None)


def _hat_matrix(centers, width, xs):
    return np.clip(1.0 - np.abs(xs[None, :] - centers[:, None]) / width, 0.0, None)


def _hat_mass(k, h, interior):
    M = np.diag(np.full(k, 2.0 * h / 3.0)) + np.diag(np.full(k - 1, h / 6.0), 1) + np.diag(np.full(k - 1, h / 6.0), -1)
    if not interior:
        M[0, 0] = M[-1, -1] = h / 3.0
    return M


def hat_cosine_projection(centers, width, n_max):
    """``P[n, m] = <psi_m, e_n>_{L^2}`` for space hats ``psi_m`` (closed form)."""
    n = np.arange(n_max + 1)
    half = 0.5 * n * width
    sinc2 = np.sinc(half / np.pi) ** 2  # numpy sinc is sin(pi x)/(pi x)
    P = width * np.cos(np.outer(n, centers)) * sinc2[:, None]
    P[0] /= math.sqrt(math.pi)
    P[1:] *= math.sqrt(2.0 / math.pi)
    return P


def free_evolution(z0: ModalState, T, p, bases) -> ModalState:
    d = [mode_expm(bases[n].A_n, T) @ (np.array([z0.alpha0]) if n == 0 else z0.coeffs[n - 1]) for n in range(z0.n_max + 1)]
    return ModalState(d[0][0], np.array(d[1:]).reshape(-1, 3))


def approx_control(z0: ModalState, zT: ModalState, O1, T, n_max, p, bases, reg=1e-8, nt_c=64, nx_c=16):
    """Tikhonov-regularized control supported in ``O1`` driving ``z0`` near ``zT``.

    The control is a tensor product of ``nt_c`` time hats (nodes include both
    ends) and ``nx_c`` interior space hats on ``O1``. The objective is
    ``||z(T) - zT||_Z^2 + reg ||f||^2_{L^2}`` over the first ``n_max`` modes,
    evaluated exactly through the modal input-to-state map.
    """
    lo, hi = float(O1[0]), float(O1[1])
    if not 0.0 <= lo < hi <= math.pi:
        raise GeometryError("O1", f"({lo}, {hi}) is not a nonempty subinterval of (0, pi)")
    if not T > 0:
        raise ValidationError("T", "horizon must be positive")
    if z0.n_max < n_max or zT.n_max < n_max:
        raise ValidationError("n_max", "states carry fewer modes than requested")
    t_nodes = np.linspace(0.0, T, nt_c)
    ht = t_nodes[1] - t_nodes[0]
    width = (hi - lo) / (nx_c + 1)
    x_nodes = lo + width * np.arange(1, nx_c + 1)
    P = hat_cosine_projection(x_nodes, width, n_max)

    rows, rhs = [], []
    for n in range(n_max + 1):
        A = bases[n].A_n
        pair = mode_matrices(bases[n], p)
        E, Q0, Q1 = linear_input_propagators(A, pair.B.reshape(-1, 1), ht)
        k = A.shape[0]
        # response of d_n(T) to a unit value of g_n at each time node
        K = _node_responses(E, Q0, Q1, nt_c)
        G = gram_weights(n, p)[:k]
        X = bases[n].forward
        L = np.linalg.cholesky(X.conj().T @ (G[:, None] * X)).conj().T
        J = np.kron(K, P[n][None, :])  # columns ordered (j, m)
        start = np.array([z0.alpha0]) if n == 0 else z0.coeffs[n - 1]
        target = np.array([zT.alpha0]) if n == 0 else zT.coeffs[n - 1]
        rows.append(L @ J)
        rhs.append(L @ (target - mode_expm(A, T) @ start))
    J = np.vstack(rows)
    r = np.concatenate(rhs)
    Mt = _hat_mass(nt_c, ht, interior=False)
    Mx = _hat_mass(nx_c, width, interior=True)
    R = np.kron(Mt, Mx)
    H = J.conj().T @ J + reg * R
    rhs_n = J.conj().T @ r
    try:
        c = scipy.linalg.solve(H, rhs_n, assume_a="pos")
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError):
        c = np.linalg.lstsq(H, rhs_n, rcond=None)[0]
    coef = c.reshape(nt_c, nx_c)
    resid = J @ c - r
    terminal_error = float(np.linalg.norm(resid))
    modal = coef @ P.T  # g_n at time nodes
    signal = ControlSignal(
        t_nodes,
        modal,
        support=(lo, hi),
        hats={"t_nodes": t_nodes, "x_nodes": x_nodes, "x_width": width, "coef": coef, "Mt": Mt, "Mx": Mx},
    )
    signal.info.update(
        terminal_error=terminal_error,
        energy=signal.energy(),
        reg=reg,
        cond=float(np.linalg.cond(H)),
    )
    return signal


def _node_responses(E, Q0, Q1, nt_c):
    """``K[:, j]``: terminal response to a unit hat at time node ``j``."""
    k = E.shape[0]
    steps = nt_c - 1
    powers = [np.eye(k, dtype=complex)]
    for _ in range(steps):
        powers.append(E @ powers[-1])
    K = np.zeros((k, nt_c), dtype=complex)
    for j in range(nt_c):
        if j < steps:  # left end of interval j
            K[:, j] += (powers[steps - 1 - j] @ Q0)[:, 0]
        if j > 0:  # right end of interval j-1
            K[:, j] += (powers[steps - j] @ Q1)[:, 0]
    return K
