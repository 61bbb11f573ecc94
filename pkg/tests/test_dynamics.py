import math

import numpy as np
import pytest

from maxns import P_STAR, ConfigurationError, ValidationError, solve_mode
from maxns.basis import build_bases
from maxns.dynamics import (
    Trajectory,
    adjoint_solve,
    conservation_run,
    conservation_summary,
    evolve_modal,
    fd_solve,
    min_steps,
)
from maxns.state import GridField, ModalState, random_modal_state, reconstruct, z_norm_sq

P = P_STAR
N = 8
BASES = build_bases([solve_mode(n, P) for n in range(1, N + 1)], P)


def _eigenmode(n, l, nx):
    s = ModalState.zeros(N)
    s.coeffs[n - 1, l] = 1.0
    return s, reconstruct(s, nx, P, BASES)


def test_fd_eigenmode_decays_at_its_eigenvalue():
    nx, T = 1025, 1.0
    s, x0 = _eigenmode(3, 1, nx)
    lam = BASES[3].eigenvalues[1]
    traj = fd_solve(x0, None, T, nx, min_steps(T, nx, P), P, times=[0.0, T])
    exact = reconstruct(s * np.exp(lam * T), nx, P, BASES)
    err = math.sqrt(z_norm_sq(traj.final - exact, P) / z_norm_sq(exact, P))
    # central-difference phase error ~ (n h)^2 / 6 * |Im lam| * T
    h = math.pi / (nx - 1)
    assert err < 3.0 * (3 * h) ** 2 / 6.0 * abs(lam.imag) * T


def test_fd_converges_at_second_order():
    errs = []
    for nx in (257, 513):
        s, x0 = _eigenmode(2, 0, nx)
        traj = fd_solve(x0, None, 0.5, nx, min_steps(0.5, nx, P), P, times=[0.0, 0.5])
        exact = reconstruct(s * np.exp(BASES[2].eigenvalues[0] * 0.5), nx, P, BASES)
        errs.append(math.sqrt(z_norm_sq(traj.final - exact, P)))
    assert 3.0 < errs[0] / errs[1] < 5.0


def test_modal_evolution_is_exact_for_free_dynamics():
    z0 = random_modal_state(N, np.random.default_rng(0))
    traj = evolve_modal(z0, None, 2.0, P, BASES, times=[0.0, 1.0, 2.0])
    for t, st in zip(traj.times, traj.states):
        assert np.allclose(st.coeffs[4], np.exp(np.array(BASES[5].eigenvalues) * t) * z0.coeffs[4], atol=1e-14)


def test_conservation_and_dissipation():
    z0 = random_modal_state(N, np.random.default_rng(1))
    nx = 257
    _, log = conservation_run(reconstruct(z0, nx, P, BASES), 1.0, nx, min_steps(1.0, nx, P), P)
    summ = conservation_summary(log)
    assert summ["mass_drift"] < 1e-12
    assert summ["stress_drift"] < 1e-10
    assert summ["max_energy_increase"] <= 1e-12
    assert summ["energy_final"] < summ["energy_initial"]


def test_adjoint_is_dual_to_forward():
    # d/dt <z(t), q(T - t)> = 0 for the source-free pair on a fine grid
    nx, T = 1025, 0.5
    nt = min_steps(T, nx, P)
    rng = np.random.default_rng(2)
    z0 = reconstruct(random_modal_state(N, rng), nx, P, BASES)
    q0 = reconstruct(random_modal_state(N, rng), nx, P, BASES)
    q0 = GridField(q0.rho, -q0.u, q0.S)  # adjoint variables share the same parity
    zT = fd_solve(z0, None, T, nx, nt, P, times=[0.0, T]).final
    qT = adjoint_solve(q0, None, None, T, nx, nt, P, times=[0.0, T]).final
    from maxns.state import inner_product

    lhs = inner_product(zT, q0, P)
    rhs = inner_product(z0, qT, P)
    assert abs(lhs - rhs) < 1e-5 * math.sqrt(z_norm_sq(z0, P) * z_norm_sq(q0, P))


def test_cfl_violation_is_a_configuration_error():
    with pytest.raises(ConfigurationError, match="nt"):
        fd_solve(GridField.zeros(257), None, 1.0, 257, 10, P)


def test_trajectory_validation():
    with pytest.raises(ValidationError):
        Trajectory([0.0, 0.0], [None, None], "grid")
    with pytest.raises(ValidationError):
        Trajectory([0.0, 1.0], [None], "grid")
