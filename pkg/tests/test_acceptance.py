"""Acceptance criteria, run at their stated tolerances.

Each test records one PASS/FAIL line (printed in the terminal summary) and
then asserts every sub-check, naming the ones that failed.
"""

import math
import time
import timeit

import numpy as np
import pytest

from maxns import P_STAR, Multiplicity, PhysicalParams, solve_mode
from maxns.basis import build_bases
from maxns.beam import K_LADDER, beam_report
from maxns.control import (
    approx_control,
    assemble_control,
    energy_constant,
    exact_terminal_state,
    gramian,
    gramian_quadrature,
    mode_matrices,
)
from maxns.dynamics import conservation_run, evolve_modal, fd_solve, min_steps
from maxns.ingham import frequencies, gram_matrix, gram_quadrature, ingham_constants
from maxns.spectrum import vieta_residuals
from maxns.state import ModalState, grid, modal_norm_sq, random_modal_state, reconstruct, z_norm_sq

P = P_STAR


def _conclude(record, label, checks, detail):
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    record(label, ok, detail + ("" if ok else f" | failed: {', '.join(failed)}"))
    assert ok, f"{label}: failed sub-checks {failed}; {detail}"


def test_c1_spectrum_structure(record):
    t0 = time.perf_counter()
    modes = [solve_mode(n, P) for n in range(1, 201)]
    runtime = time.perf_counter() - t0
    roots = np.array([m.roots for m in modes])
    vieta = max(max(vieta_residuals(m, P)) for m in modes)
    l1 = np.array([m.lambda1 for m in modes])
    pair_err = max(abs(m.lambda2 - np.conj(m.lambda3)) for m in modes)
    d1 = abs(modes[-1].lambda1 + 0.5)
    d2 = abs(modes[-1].lambda2.real + 0.25)
    checks = {
        "Re<0": bool(np.all(roots.real < 0)),
        "lambda1 real in (-1,0)": bool(np.all(np.abs(l1.imag) == 0) and np.all((l1.real > -1) & (l1.real < 0))),
        "vieta 1e-10": vieta < 1e-10,
        "lambda1(200)": d1 < 1e-3,
        "Re lambda2(200)": d2 < 1e-3,
        "conjugate 1e-12": pair_err < 1e-12,
        "runtime<1s": runtime < 1.0,
    }
    detail = f"vieta={vieta:.2e} |l1+0.5|={d1:.2e} |Re l2+0.25|={d2:.2e} pair={pair_err:.1e} t={runtime:.3f}s"
    _conclude(record, "C1 spectrum structure", checks, detail)


def test_c2_triple_root(record):
    p = PhysicalParams.from_b(1.0, 1.0, 8.0 / math.sqrt(27.0), 1.0 / math.sqrt(27.0))
    m = solve_mode(1, p)
    err = float(np.abs(m.roots + math.sqrt(3.0)).max())
    runtime = min(timeit.repeat(lambda: solve_mode(1, p), number=50, repeat=5)) / 50
    checks = {
        "classified triple": m.multiplicity is Multiplicity.TRIPLE,
        "roots -sqrt3 1e-8": err < 1e-8,
        "runtime<1ms": runtime < 1e-3,
    }
    _conclude(record, "C2 triple root", checks, f"class={m.multiplicity.name} err={err:.1e} t={runtime * 1e6:.1f}us")


def _simpson_weights(nx):
    h = math.pi / (nx - 1)
    w = np.full(nx, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * h / 3.0


def _sampled_family(bases, xs, which):
    """Rows: each basis vector sampled on ``xs`` as ``(3, nx)``."""
    out = []
    for b in bases:
        cols = b.forward if which == "forward" else b.adjoint
        cos, sin = np.cos(b.n * xs), np.sin(b.n * xs)
        for l in range(b.size):
            c = cols[:, l]
            out.append(np.stack([c[0] * cos, c[1] * sin, c[2] * cos]))
    return np.array(out)


def test_c3_biorthonormality(record):
    t0 = time.perf_counter()
    bases = build_bases([solve_mode(n, P) for n in range(1, 51)], P)
    closed = max(float(np.abs(b.pairing_table(P) - np.eye(b.size)).max()) for b in bases)
    nx = 4097
    xs = grid(nx)
    X = _sampled_family(bases, xs, "forward")
    Y = _sampled_family(bases, xs, "adjoint")
    w = _simpson_weights(nx)
    metric = np.array([P.b, P.rho_s, P.kappa / P.mu])
    table = np.einsum("icx,jcx,c,x->ij", X, np.conj(Y), metric, w)
    quad = float(np.abs(table - np.eye(table.shape[0])).max())
    runtime = time.perf_counter() - t0
    checks = {"closed form 1e-10": closed < 1e-10, "quadrature 1e-8": quad < 1e-8, "runtime<5s": runtime < 5.0}
    _conclude(record, "C3 biorthonormality", checks, f"closed={closed:.1e} quad(nx={nx})={quad:.1e} t={runtime:.2f}s")


def test_c4_gramian(record):
    t0 = time.perf_counter()
    T = 1.0
    modes = [solve_mode(n, P) for n in range(1, 201)]
    bases = build_bases(modes, P)
    pairs = [mode_matrices(b, P) for b in bases]
    quad_err = 0.0
    for pair in pairs[:51]:
        W = gramian(pair, T).W
        quad_err = max(quad_err, float(np.abs(W - gramian_quadrature(pair, T)).max()))
    blocks = [gramian(pair, T) for pair in pairs]
    herm = max(float(np.abs(g.W - g.W.conj().T).max()) for g in blocks)
    pd = min(g.min_eig for g in blocks)
    W200 = blocks[200].W
    lim11, lim22 = (1 - math.exp(-1)) / math.pi, (1 - math.exp(-0.5)) / math.pi
    r11, r22 = abs(W200[0, 0]) / lim11 - 1, abs(W200[1, 1]) / lim22 - 1
    norms = np.array([g.norm for g in blocks[100:201]])
    inv = np.array([g.inv_norm for g in blocks[100:201]])
    var_n, var_i = norms.max() / norms.min() - 1, inv.max() / inv.min() - 1
    runtime = time.perf_counter() - t0
    checks = {
        "closed vs quadrature 1e-8": quad_err < 1e-8,
        "|W11(200)| within 5%": abs(r11) < 0.05,
        "|W22(200)| within 5%": abs(r22) < 0.05,
        "Hermitian-PD": herm < 1e-12 and pd > 0,
        "norm uniformity <10%": var_n < 0.1 and var_i < 0.1,
        "runtime<5s": runtime < 5.0,
    }
    detail = (
        f"quad={quad_err:.1e} |W11|={abs(W200[0, 0]):.5f} (ref {lim11:.5f}, {r11:+.1%}) "
        f"|W22|={abs(W200[1, 1]):.5f} (ref {lim22:.5f}, {r22:+.1%}) min_eig={pd:.2e} "
        f"var(|W|)={var_n:.1%} var(|W^-1|)={var_i:.1%} t={runtime:.2f}s"
    )
    _conclude(record, "C4 Gramian", checks, detail)


def test_c5_null_control(record):
    t0 = time.perf_counter()
    T, n_max = 1.0, 64
    bases = build_bases([solve_mode(n, P) for n in range(1, n_max + 1)], P)
    consts, exact_err = [], 0.0
    signal0 = z00 = None
    for seed in range(10):
        z0 = random_modal_state(n_max, np.random.default_rng(seed))
        sig = assemble_control(z0, T, P, bases)
        z0n = modal_norm_sq(z0, bases, P)
        exact_err = max(exact_err, math.sqrt(modal_norm_sq(exact_terminal_state(sig), bases, P) / z0n))
        consts.append(sig.energy() / z0n)
        if seed == 0:
            signal0, z00 = sig, z0
    fd = []
    for nx in (2001, 4001):
        x0 = reconstruct(z00, nx, P, bases)
        traj = fd_solve(x0, signal0, T, nx, min_steps(T, nx, P), P, times=[0.0, T])
        fd.append(math.sqrt(z_norm_sq(traj.final, P) / z_norm_sq(x0, P)))
    c_op = energy_constant(bases, T, P)
    runtime = time.perf_counter() - t0
    spread = max(consts) / min(consts)
    checks = {
        "energy <= C_op |z0|^2": max(consts) <= c_op * (1 + 1e-10),
        "exact modal <1e-8": exact_err < 1e-8,
        "FD nx=2001 <5e-2": fd[0] < 5e-2,
        "FD improves on doubling": fd[1] < fd[0],
        "energy constant spread <2": spread < 2.0,
        "runtime<60s": runtime < 60.0,
    }
    detail = (
        f"exact={exact_err:.1e} fd(2001)={fd[0]:.2e} fd(4001)={fd[1]:.2e} "
        f"C_seed in [{min(consts):.2f}, {max(consts):.2f}] C_op={c_op:.2f} t={runtime:.1f}s"
    )
    _conclude(record, "C5 null control", checks, detail)


def test_c6_gaussian_beam(record):
    t0 = time.perf_counter()
    geo = dict(x0=1.2, r=0.5, O1=(2.2, 2.8), O2=(0.0, math.pi), O3=(2.2, 2.8), T=1.0)
    rows = [beam_report(k, geo["x0"], geo["r"], geo["O1"], geo["O2"], geo["O3"], geo["T"], P) for k in K_LADDER]
    runtime = time.perf_counter() - t0
    kres = [r["k"] * r["residual"] for r in rows]
    kv = [r["k"] ** 2 * r["v_mass"] for r in rows]
    kc = [r["k"] ** 0.75 * r["correction_norm"] for r in rows]
    ratio = [r["ratio"] for r in rows]
    growth = [b / a for a, b in zip(ratio, ratio[1:])]
    last = rows[-1]
    mass_err = abs(last["sigma_mass_T"] / last["sigma_limit_T"] - 1)
    checks = {
        "k*residual bounded": max(kres) <= 1.5 * kres[0],
        "k^2*|v|^2 bounded": max(kv) <= 1.5 * kv[0],
        "sigma mass within 5%": mass_err < 0.05,
        "k^(3/4)*correction bounded": max(kc) <= 1.5 * kc[0],
        "ratio growth >=2": min(growth) >= 2.0,
        "runtime<10min": runtime < 600.0,
    }
    detail = (
        f"k*res={['%.3f' % v for v in kres]} k^2v={['%.3f' % v for v in kv]} "
        f"k^.75corr={['%.2e' % v for v in kc]} growth={['%.1f' % g for g in growth]} "
        f"mass err={mass_err:.2%} t={runtime:.0f}s"
    )
    _conclude(record, "C6 Gaussian beam", checks, detail)


def test_c7_ingham(record):
    t0 = time.perf_counter()
    fam = frequencies(10, 200, P)
    consts = [ingham_constants(fam, T) for T in (9.0, 12.0, 15.0)]
    low = [c["C_low"] for c in consts]
    G = gram_matrix(fam.mu, 9.0)
    quad = float(np.abs(G - gram_quadrature(fam.mu, 9.0)).max())
    runtime = time.perf_counter() - t0
    checks = {
        "Hermitian-PD": low[0] > 0 and float(np.abs(G - G.conj().T).max()) < 1e-12,
        "C_low non-decreasing": all(b >= a for a, b in zip(low, low[1:])),
        "closed vs quadrature 1e-8": quad < 1e-8,
        "runtime<30s": runtime < 30.0,
    }
    detail = f"C_low(9,12,15)={['%.6f' % v for v in low]} C_high(9)={consts[0]['C_high']:.4f} quad={quad:.1e} t={runtime:.1f}s"
    _conclude(record, "C7 Ingham", checks, detail)


def test_c8_approximate_control(record):
    t0 = time.perf_counter()
    T, n_max, O1 = 9.0, 32, (0.3, 0.6)
    bases = build_bases([solve_mode(n, P) for n in range(1, n_max + 1)], P)
    errs, energies = [], []
    for seed in range(5):
        z0 = random_modal_state(n_max, np.random.default_rng(seed))
        sig = approx_control(z0, ModalState.zeros(n_max), O1, T, n_max, P, bases)
        zT = evolve_modal(z0, sig, T, P, bases, times=[0.0, T]).final
        errs.append(math.sqrt(modal_norm_sq(zT, bases, P) / modal_norm_sq(z0, bases, P)))
        energies.append(sig.energy())
    runtime = time.perf_counter() - t0
    checks = {"terminal error <=1e-2": max(errs) <= 1e-2, "runtime<5min": runtime < 300.0}
    detail = f"errors={['%.2e' % e for e in errs]} energies={['%.1f' % e for e in energies]} t={runtime:.1f}s"
    _conclude(record, "C8 approximate control", checks, detail)


def test_c9_conservation(record):
    t0 = time.perf_counter()
    n_max, nx, T = 32, 1025, 1.0
    bases = build_bases([solve_mode(n, P) for n in range(1, n_max + 1)], P)
    z0 = random_modal_state(n_max, np.random.default_rng(7))
    x0 = reconstruct(z0, nx, P, bases)
    _, log = conservation_run(x0, T, nx, min_steps(T, nx, P), P, times=[0.0, T])
    mass = float(np.abs(log["mass"] - log["mass"][0]).max())
    stress = float(np.abs(log["stress"] - log["stress"][0]).max())
    rise = float(np.diff(log["energy"]).max())
    runtime = time.perf_counter() - t0
    checks = {
        "mass 1e-8": mass < 1e-8,
        "S e^(t/kappa) 1e-6": stress < 1e-6,
        "energy non-increasing 1e-8": rise <= 1e-8,
        "dissipative": log["energy"][-1] < log["energy"][0],
        "runtime<10s": runtime < 10.0,
    }
    detail = f"mass drift={mass:.1e} stress drift={stress:.1e} max step rise={rise:.1e} t={runtime:.2f}s"
    _conclude(record, "C9 conservation/dissipation", checks, detail)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
