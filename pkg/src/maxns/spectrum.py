"""Per-mode characteristic cubic: roots, multiplicity, and large-n asymptotics.

For each Fourier index ``n >= 1`` the generator restricted to the ``n``-th
cosine/sine block has eigenvalues given by the roots of the monic cubic

    F_n(lam) = lam**3 + lam**2 / kappa + (mu / (kappa rho_s) + b rho_s) n**2 lam
               + (b rho_s / kappa) n**2.

Roots are returned in a canonical order: ``lambda1`` is the real root in
``(-1/kappa, 0)`` nearest the accumulation point ``omega0``; ``lambda2`` is
the remaining root with nonnegative imaginary part and ``lambda3`` the last.
"""

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError

# classification thresholds; see ``solve_mode``
GAP_TOL = 1e-7
Q_TOL = 1e-7


class Multiplicity(enum.Enum):
    SIMPLE = "simple"
    DOUBLE = "double"
    TRIPLE = "triple"


@dataclass(frozen=True)
class ModeSpectrum:
    n: int
    lambda1: complex
    lambda2: complex
    lambda3: complex
    multiplicity: Multiplicity

    @property
    def roots(self):
        return np.array([self.lambda1, self.lambda2, self.lambda3], dtype=complex)

    @property
    def is_conjugate_pair(self):
        return self.lambda2.imag > 0


def charpoly_coeffs(n, p):
    """Coefficients ``(c2, c1, c0)`` of the monic characteristic cubic."""
    n2 = float(n) ** 2
    return (
        1.0 / p.kappa,
        (p.mu / (p.kappa * p.rho_s) + p.b * p.rho_s) * n2,
        p.b * p.rho_s / p.kappa * n2,
    )


def charpoly_eval(n, lam, p):
    c2, c1, c0 = charpoly_coeffs(n, p)
    return ((lam + c2) * lam + c1) * lam + c0


def _dcharpoly(lam, c2, c1):
    return (3.0 * lam + 2.0 * c2) * lam + c1


def q_n(n, lam, p):
    """Double-root indicator: vanishes at a root ``lam`` iff it is a multiple root."""
    return (
        -p.b
        + lam**2 / (p.rho_s * n**2)
        - p.mu * p.kappa * lam**2 / (p.rho_s**2 * (1.0 + p.kappa * lam) ** 2)
    )


def _poly_scale(lam, c2, c1, c0):
    a = abs(lam)
    return a**3 + c2 * a**2 + c1 * a + c0


def _newton_polish(lam, c2, c1, c0, steps=2):
    """Newton steps on the cubic that are kept only when they reduce |F|."""
    f = ((lam + c2) * lam + c1) * lam + c0
    for _ in range(steps):
        d = _dcharpoly(lam, c2, c1)
        if d == 0:
            break
        cand = lam - f / d
        fc = ((cand + c2) * cand + c1) * cand + c0
        if abs(fc) >= abs(f):
            break
        lam, f = cand, fc
    return lam


def _bisect_real_root(c2, c1, c0, lo, hi, tol=1e-15, max_iter=200):
    flo = ((lo + c2) * lo + c1) * lo + c0
    fhi = ((hi + c2) * hi + c1) * hi + c0
    if flo * fhi > 0:
        raise NumericalError("no sign change for bisection", lo=lo, hi=hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = ((mid + c2) * mid + c1) * mid + c0
        if fm == 0 or hi - lo < tol * max(1.0, abs(mid)):
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _quadratic_roots(q1, q0):
    """Roots of ``x**2 + q1 x + q0`` with real coefficients, stable form."""
    disc = q1 * q1 - 4.0 * q0
    if disc < 0:
        re = -0.5 * q1
        im = 0.5 * math.sqrt(-disc)
        return complex(re, im), complex(re, -im)
    s = math.sqrt(disc)
    big = -0.5 * (q1 + math.copysign(s, q1)) if q1 != 0 else 0.5 * s
    if big == 0:
        return 0j, 0j
    return complex(big), complex(q0 / big)


def _multiple_root(n, p, c2, c1, c0):
    """Detect a double or triple root through the critical points of ``F_n``.

    Returns ``(multiplicity, r)`` or ``None``. A critical point ``r`` with
    ``F_n(r) ~ 0`` is a multiple root; floating-point eigenvalue solvers only
    resolve such roots to ``eps**(1/m)``, whereas ``r`` is accurate to ``eps``.
    """
    disc = c2 * c2 - 3.0 * c1
    scale_d = c2 * c2 + 3.0 * c1
    if abs(disc) <= 1e-10 * scale_d:
        r = -c2 / 3.0
        f = charpoly_eval(n, r, p)
        if abs(f) <= 1e-10 * _poly_scale(r, c2, c1, c0) and abs(q_n(n, r, p)) < Q_TOL:
            return Multiplicity.TRIPLE, r
    if disc < 0:
        return None
    s = math.sqrt(disc)
    for r in ((-c2 + s) / 3.0, (-c2 - s) / 3.0):
        f = charpoly_eval(n, r, p)
        if abs(f) <= 1e-10 * _poly_scale(r, c2, c1, c0) and abs(q_n(n, r, p)) < Q_TOL:
            return Multiplicity.DOUBLE, r
    return None


def solve_mode(n, p):
    """Roots of the ``n``-th characteristic cubic in canonical order."""
    if int(n) != n or n < 1:
        raise ValidationError("n", f"mode index must be a positive integer, got {n!r}")
    n = int(n)
    c2, c1, c0 = charpoly_coeffs(n, p)

    multiple = _multiple_root(n, p, c2, c1, c0)
    if multiple is not None:
        kind, r = multiple
        if kind is Multiplicity.TRIPLE:
            return ModeSpectrum(n, complex(r), complex(r), complex(r), kind)
        simple = -c2 - 2.0 * r
        return ModeSpectrum(n, complex(simple), complex(r), complex(r), kind)

    raw = np.roots([1.0, c2, c1, c0])
    real = [z.real for z in raw if abs(z.imag) <= 1e-8 * max(1.0, abs(z))]
    candidates = []
    for x in real:
        x = _newton_polish(x, c2, c1, c0)
        if -1.0 / p.kappa < x < 0.0:
            candidates.append(x)
    if candidates:
        lam1 = min(candidates, key=lambda x: (abs(x - p.omega0), -x))
    else:
        lam1 = _bisect_real_root(c2, c1, c0, -1.0 / p.kappa, 0.0)
    lam1 = _newton_polish(lam1, c2, c1, c0, steps=3)
    if not -1.0 / p.kappa < lam1 < 0.0:
        raise NumericalError("real root left (-1/kappa, 0)", n=n, lambda1=lam1)

    # deflate: F = (lam - lam1)(lam**2 + q1 lam + q0)
    q1 = c2 + lam1
    q0 = c1 + lam1 * q1
    lam2, lam3 = _quadratic_roots(q1, q0)
    if lam2.imag == 0:
        lam2 = complex(_newton_polish(lam2.real, c2, c1, c0))
        lam3 = complex(_newton_polish(lam3.real, c2, c1, c0))
        if lam3.real > lam2.real:
            lam2, lam3 = lam3, lam2
    else:
        lam2 = _newton_polish(lam2, c2, c1, c0)
        lam3 = lam2.conjugate()

    roots = (lam1, lam2, lam3)
    resid = [abs(charpoly_eval(n, z, p)) / _poly_scale(z, c2, c1, c0) for z in roots]
    if max(resid) > 1e-10:
        raise NumericalError("root polishing did not converge", n=n, residuals=resid)
    return ModeSpectrum(n, complex(lam1), complex(lam2), complex(lam3), Multiplicity.SIMPLE)


def solve_modes(n_max, p):
    return [solve_mode(n, p) for n in range(1, n_max + 1)]


def asymptotic_prediction(n, p):
    """Large-``n`` reference values: ``(lambda1_pred, (lambda2_pred, lambda3_pred))``."""
    re = -0.5 * (p.omega0 + 1.0 / p.kappa)
    im = n * p.c_wave
    return p.omega0, (complex(re, im), complex(re, -im))


def vieta_residuals(mode, p):
    """Relative residuals of the three elementary symmetric identities."""
    l1, l2, l3 = mode.roots
    c2, c1, c0 = charpoly_coeffs(mode.n, p)
    return (
        abs(l1 + l2 + l3 + c2) / c2,
        abs(l1 * l2 + l2 * l3 + l3 * l1 - c1) / c1,
        abs(l1 * l2 * l3 + c0) / c0,
    )
